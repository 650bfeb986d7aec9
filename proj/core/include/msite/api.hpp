#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "msite/engine.hpp"
#include "msite/error.hpp"

namespace msite {

struct ApiRequest {
    std::string method;  // GET or POST
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// HTTP status for an engine error code.
[[nodiscard]] int http_status(ErrorCode code) noexcept;

/// Transport-independent request handling for the /v1 API.
///
/// Reads run concurrently; every write holds an exclusive lock while it runs
/// against the engine, then appends the new events to the log file when one
/// is configured.
class Api {
public:
    using Clock = std::function<Timestamp()>;

    /// When `log_path` names an existing file its events are replayed first.
    Api(EngineConfig config, Clock clock, std::optional<std::filesystem::path> log_path = std::nullopt);
    ~Api();

    [[nodiscard]] ApiResponse handle(const ApiRequest& request);

    /// Runs a processing tick at the clock's current time.
    TickDelta tick();
    TickDelta tick(Timestamp now);

    /// Read access to the engine under the shared lock.
    void read(const std::function<void(const Engine&)>& fn) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

[[nodiscard]] nlohmann::json session_json(const EmaSession& s);
[[nodiscard]] nlohmann::json window_json(const ContextWindowRecord& w);

}  // namespace msite
