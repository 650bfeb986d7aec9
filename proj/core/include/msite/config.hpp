#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "msite/engine.hpp"

namespace msite {

/// Nested objects become dotted keys: {"place": {"eps_m": 80}} -> "place.eps_m".
[[nodiscard]] std::map<std::string, nlohmann::json> flatten_config(const nlohmann::json& j);

/// Reads engine keys (place.*, audio.*, context.*, schedule.*, processing.*,
/// bank.*, seed) over the defaults. Keys under "sim." are left for the
/// simulator; any other unknown key throws InvalidConfig. Bank file paths are
/// resolved against `base_dir`.
[[nodiscard]] EngineConfig engine_config_from(const std::map<std::string, nlohmann::json>& flat,
                                              const std::filesystem::path& base_dir = {});

[[nodiscard]] std::map<std::string, nlohmann::json> load_config_file(const std::filesystem::path& path);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace msite
