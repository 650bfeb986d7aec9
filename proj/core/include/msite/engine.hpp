#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "msite/context.hpp"
#include "msite/conversation.hpp"
#include "msite/ema.hpp"
#include "msite/engagement.hpp"
#include "msite/message_bank.hpp"
#include "msite/metrics.hpp"
#include "msite/place.hpp"
#include "msite/rng.hpp"
#include "msite/trace.hpp"

namespace msite {

struct ProcessingConfig {
    Seconds upload_interval{600};      // U
    Seconds processing_interval{600};  // P
    void validate() const;
};

struct EngineConfig {
    PlaceConfig place;
    AudioConfig audio;
    ContextConfig context;
    DailySchedule schedule;
    ProcessingConfig processing;
    std::uint64_t seed = 1;
    /// Script bank (JSONL) and generic message bank text; empty selects the built-in banks.
    std::string item_bank_jsonl;
    std::string seed_messages;
    /// Off skips the event history; replay and the log file then see nothing.
    bool record_history = true;
};

struct UploadBatch {
    std::string participant_id;
    std::vector<SensorRecord> records;
    /// Lines the device sent that did not parse; reported back, never stored.
    std::vector<MalformedLine> malformed;
    Timestamp device_sent_at;
    Timestamp received_at;
};

/// Parses trace text into a batch. Lines naming another participant are rejected.
[[nodiscard]] UploadBatch make_batch(std::string participant_id, std::string_view trace_text,
                                     Timestamp device_sent_at, Timestamp received_at);

struct IngestAck {
    std::int64_t accepted = 0;
    std::int64_t duplicates = 0;
    std::vector<MalformedLine> rejected;
};

struct StoredRecord {
    SensorRecord record;
    Timestamp received_at;
};

struct TickDelta {
    Timestamp now;
    std::vector<std::string> refit;      // participants whose place model was re-fit
    std::vector<std::string> delivered;  // session ids
    std::vector<std::string> expired;    // session ids
    [[nodiscard]] bool empty() const noexcept { return refit.empty() && delivered.empty() && expired.empty(); }
};

struct ContextWindowRecord {
    std::string session_id;
    SocialContextWindow window;
    friend bool operator==(const ContextWindowRecord&, const ContextWindowRecord&) = default;
};

// ---------------------------------------------------------------------------
// Event history. Every accepted command is appended; replaying the history
// into a fresh engine with the same config rebuilds all derived state.

namespace event {
struct Enroll {
    Enrollment enrollment;
};
struct Ingest {
    UploadBatch batch;
};
struct AddMessage {
    std::optional<std::string> scope;
    MessageCategory category = MessageCategory::DefeatistChallenge;
    std::string text;
    Timestamp at;
};
struct SubmitAnswer {
    std::string session_id;
    std::string node_id;
    AnswerValue value;
    Timestamp at;
};
struct UpsertGoal {
    std::string participant_id;
    std::optional<std::string> parent;
    GoalLevel level = GoalLevel::LongTerm;
    std::string title;
    bool in_session = false;
};
struct PlanActivity {
    std::string participant_id;
    std::string activity_id;
    std::string title;
    int anticipated = 0;
};
struct CompleteActivity {
    std::string participant_id;
    std::string activity_id;
    int experienced = 0;
    std::optional<SavorArtifact> savor;
};
struct Spin {
    std::string participant_id;
    std::string target_id;
    Timestamp at;
};
struct Tick {
    Timestamp now;
};
}  // namespace event

using Event = std::variant<event::Enroll, event::Ingest, event::AddMessage, event::SubmitAnswer, event::UpsertGoal,
                           event::PlanActivity, event::CompleteActivity, event::Spin, event::Tick>;

/// One JSON object per line.
[[nodiscard]] std::string serialize_event(const Event& e);
[[nodiscard]] Event parse_event(std::string_view line);
[[nodiscard]] std::vector<Event> parse_event_log(std::string_view text);

// ---------------------------------------------------------------------------

/// Server-side state machine. Time is always supplied by the caller, so the
/// same engine runs against a wall clock or a simulator's virtual clock.
/// Not synchronized; callers serialize access.
class Engine {
public:
    explicit Engine(EngineConfig config);
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;
    Engine(Engine&&) noexcept;
    Engine& operator=(Engine&&) noexcept;
    ~Engine();

    /// Throws AlreadyEnrolled, InvalidParams (end before start, empty id).
    const Enrollment& enroll(Enrollment enrollment);

    /// Stores new records with their receive time; repeats of
    /// (participant, captured_at, payload) are counted as duplicates.
    /// Throws UnknownParticipant, InvalidRequest (received before sent).
    IngestAck ingest(const UploadBatch& batch);

    /// Re-fits place models after local 04:00, delivers every prompt whose fire
    /// time has passed (building contextual scripts from records received by
    /// `now`), and expires overdue sessions.
    TickDelta process_tick(Timestamp now);

    /// `scope` absent adds a generic message. Throws UnknownParticipant, EmptyText.
    const Message& add_message(std::optional<std::string> scope, MessageCategory category, std::string text,
                               Timestamp at);

    /// Throws UnknownSession plus everything advance() throws.
    const EmaSession& answer(const std::string& session_id, const std::string& node_id, const AnswerValue& value,
                             Timestamp at);

    const GoalNode& upsert_goal(const std::string& participant, const std::optional<std::string>& parent,
                                GoalLevel level, std::string title, bool in_session = false);
    const ActivityLog& plan_activity(const std::string& participant, const std::string& activity_id,
                                     std::string title, int anticipated);
    const ActivityLog& complete_activity(const std::string& participant, const std::string& activity_id,
                                         int experienced, std::optional<SavorArtifact> savor);
    const AwardEntry& spin(const std::string& participant, const std::string& target_id, Timestamp at);

    // Queries. Participant lookups throw UnknownParticipant.
    [[nodiscard]] const EngineConfig& config() const noexcept;
    [[nodiscard]] std::vector<std::string> participants() const;
    [[nodiscard]] bool enrolled(const std::string& participant) const;
    [[nodiscard]] const Enrollment& enrollment(const std::string& participant) const;
    [[nodiscard]] const std::vector<StoredRecord>& records(const std::string& participant) const;
    [[nodiscard]] const std::optional<PlaceModel>& place_model(const std::string& participant) const;
    [[nodiscard]] const std::vector<EmaSession>& sessions(const std::string& participant) const;
    [[nodiscard]] const EmaSession& session(const std::string& session_id) const;
    [[nodiscard]] const std::vector<ContextWindowRecord>& context_windows(const std::string& participant) const;
    /// Windows with from inside [from, to).
    [[nodiscard]] std::vector<ContextWindowRecord> context_windows(const std::string& participant, Timestamp from,
                                                                   Timestamp to) const;
    [[nodiscard]] std::vector<ContextResolution> resolutions(const std::string& participant) const;
    [[nodiscard]] std::vector<Message> messages(const std::string& participant) const;
    [[nodiscard]] const MessageBank& message_bank() const noexcept;
    [[nodiscard]] const Engagement& engagement(const std::string& participant) const;
    [[nodiscard]] ParticipantReport report(const std::string& participant) const;
    [[nodiscard]] const std::vector<Event>& events() const noexcept;

    /// Classifies [from, to) from records received by `as_of`, using the
    /// participant's current place model.
    [[nodiscard]] SocialContextWindow assess(const std::string& participant, Timestamp from, Timestamp to,
                                             Timestamp as_of) const;

    /// Applies one event as if the matching command had been issued.
    void apply(const Event& e);
    [[nodiscard]] static Engine replay(EngineConfig config, std::span<const Event> history);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Pure window assessment over one participant's records: only records
/// captured inside [from, to) and received by `as_of` are used.
[[nodiscard]] SocialContextWindow assess_window(std::span<const StoredRecord> records, const PlaceModel* model,
                                                Timestamp from, Timestamp to, Timestamp as_of,
                                                const EngineConfig& config);

}  // namespace msite
