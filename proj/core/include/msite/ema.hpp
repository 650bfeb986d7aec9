#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "msite/context.hpp"
#include "msite/message_bank.hpp"
#include "msite/time.hpp"

namespace msite {

enum class ScriptKind { ActionPlan, Contextual, Burst };
[[nodiscard]] std::string_view to_string(ScriptKind k) noexcept;
[[nodiscard]] std::optional<ScriptKind> parse_script_kind(std::string_view text);

enum class AnswerType { Choice, Slider, Minutes, FreeText, PhotoRef, TextOrPhoto };

struct AnswerSpec {
    AnswerType type = AnswerType::Choice;
    std::vector<std::string> options;  // Choice
    std::int64_t min = 1;              // Slider / Minutes
    std::int64_t max = 7;

    static AnswerSpec choice(std::vector<std::string> options) { return {AnswerType::Choice, std::move(options), 0, 0}; }
    static AnswerSpec slider(std::int64_t lo = 1, std::int64_t hi = 7) { return {AnswerType::Slider, {}, lo, hi}; }
    static AnswerSpec minutes() { return {AnswerType::Minutes, {}, 0, 60}; }
    static AnswerSpec text() { return {AnswerType::FreeText, {}, 0, 0}; }
    static AnswerSpec text_or_photo() { return {AnswerType::TextOrPhoto, {}, 0, 0}; }

    friend bool operator==(const AnswerSpec&, const AnswerSpec&) = default;
};

using AnswerValue = std::variant<std::int64_t, std::string>;
[[nodiscard]] std::string to_string(const AnswerValue& v);

/// Node roles the engine interprets. Free-form roles are allowed in bank files.
namespace node_role {
inline constexpr std::string_view kConfirm = "confirm";
inline constexpr std::string_view kFallback = "fallback";
inline constexpr std::string_view kDirectAsk = "direct_ask";
inline constexpr std::string_view kAppraisal = "appraisal";
inline constexpr std::string_view kChallenge = "challenge";
inline constexpr std::string_view kSavor = "savor";
inline constexpr std::string_view kPlan = "plan";
inline constexpr std::string_view kEncourage = "encourage";
inline constexpr std::string_view kBurst = "burst";
}  // namespace node_role

struct ScriptNode {
    std::string node_id;
    std::string prompt;
    AnswerSpec answer;
    std::map<std::string, std::string> branches;  // answer text -> next node
    std::optional<std::string> next;              // taken when no branch matches
    std::string role;
    std::optional<std::string> message_id;  // challenge / encourage nodes
    std::optional<MessageCategory> message_category;
    std::optional<std::string> item_id;  // burst nodes

    [[nodiscard]] bool terminal() const noexcept { return branches.empty() && !next; }
    friend bool operator==(const ScriptNode&, const ScriptNode&) = default;
};

/// Branching interaction. The first node is the entry.
struct EmaScript {
    std::string script_id;
    ScriptKind kind = ScriptKind::ActionPlan;
    std::vector<ScriptNode> nodes;

    [[nodiscard]] const ScriptNode* find(std::string_view node_id) const noexcept;
    [[nodiscard]] const ScriptNode& entry() const { return nodes.front(); }
    /// Throws InvalidScript unless ids are unique, every branch target exists,
    /// every node is reachable from the entry, and the graph is acyclic.
    void validate() const;

    friend bool operator==(const EmaScript&, const EmaScript&) = default;
};

/// Next node after answering `node` with `value`, or nullopt when the node is terminal.
[[nodiscard]] std::optional<std::string> next_node(const ScriptNode& node, const AnswerValue& value);
[[nodiscard]] bool in_domain(const AnswerSpec& spec, const AnswerValue& value);

// ---------------------------------------------------------------------------
// Item bank

enum class BurstDomain { Slider, Minutes };

struct BurstItem {
    std::string item_id;
    std::string prompt;
    BurstDomain domain = BurstDomain::Slider;

    [[nodiscard]] AnswerSpec spec() const {
        return domain == BurstDomain::Slider ? AnswerSpec::slider() : AnswerSpec::minutes();
    }
};

/// Editable text for the scripted prompts.
struct ItemBank {
    EmaScript action_plan;
    std::vector<ScriptNode> threat_items;
    std::vector<ScriptNode> defeatist_items;
    ScriptNode savor;
    std::vector<BurstItem> burst_items;
};

/// One JSON record per line; see data/script_bank.jsonl.
[[nodiscard]] ItemBank parse_item_bank(std::string_view jsonl);
[[nodiscard]] const ItemBank& default_item_bank();

// ---------------------------------------------------------------------------
// Scheduling

enum class Slot { Morning, Noon, Evening };
[[nodiscard]] std::string_view to_string(Slot s) noexcept;

struct SlotSpec {
    ScriptKind kind = ScriptKind::ActionPlan;
    Seconds fire_at{0};  // local time of day
    Seconds window_from{0};
    /// Words used in prompts for the assessment window ("morning", "afternoon").
    std::string period_phrase;
};

struct DailySchedule {
    std::array<SlotSpec, 3> slots{{
        {ScriptKind::ActionPlan, Seconds{8 * 3600}, Seconds{0}, "night"},
        {ScriptKind::Contextual, Seconds{12 * 3600}, Seconds{6 * 3600}, "morning"},
        {ScriptKind::Contextual, Seconds{18 * 3600}, Seconds{12 * 3600}, "afternoon"},
    }};
    Seconds expire_after{4 * 3600};

    /// Throws InvalidConfig unless morning < noon < evening and each window precedes its fire time.
    void validate() const;
};

struct Enrollment {
    std::string participant_id;
    LocalDate start;
    LocalDate end;  // inclusive
    UtcOffset offset;
    std::vector<int> burst_weeks;  // zero-based weeks from start

    [[nodiscard]] bool active_on(LocalDate d) const noexcept { return start <= d && d <= end; }
    [[nodiscard]] bool burst_on(LocalDate d) const;
    [[nodiscard]] int days() const { return days_between(start, end) + 1; }
};

struct PendingPrompt {
    std::string participant_id;
    LocalDate date;
    Slot slot = Slot::Morning;
    ScriptKind kind = ScriptKind::ActionPlan;
    Timestamp fire_at;
    /// Assessment window for contextual prompts; ends at fire_at.
    std::optional<TimeWindow> window;
    std::string period_phrase;
    bool burst = false;
};

/// Exactly three prompts, in slot order. Throws InactiveParticipant outside the enrollment.
[[nodiscard]] std::vector<PendingPrompt> schedule_day(const Enrollment& enrollment, LocalDate date,
                                                      const DailySchedule& schedule, bool burst_week);

// ---------------------------------------------------------------------------
// Script construction

[[nodiscard]] std::string confirm_prompt(SocialContext detected, std::string_view period);
[[nodiscard]] std::string fallback_prompt(std::string_view period);
[[nodiscard]] std::string direct_ask_prompt(std::string_view period);

/// Contextual script: confirm -> (No -> fallback) -> appraisal sliders ->
/// challenge -> savor (only when the effective company is WithOthers).
///
/// Each effective context reachable from the confirm/fallback answers gets its
/// own appraisal/challenge chain. `message` must match the detected context's
/// category (CategoryMismatch otherwise); a chain whose corrected context needs
/// the other challenge category shows `alternate`, which is then required.
/// With an Insufficient basis the entry is a direct question about company.
/// `savor_message`, when given, is appended to every savor prompt.
[[nodiscard]] EmaScript build_contextual_session(const SocialContextWindow& window, std::string_view period_phrase,
                                                 const SelectedMessage& message,
                                                 const std::optional<SelectedMessage>& alternate,
                                                 const std::optional<SelectedMessage>& savor_message,
                                                 const ItemBank& bank, std::string script_id);

/// Action-plan script from the bank; `encouragement` fills the encourage node.
[[nodiscard]] EmaScript build_action_plan_session(const ItemBank& bank,
                                                  const std::optional<SelectedMessage>& encouragement,
                                                  std::string script_id);

/// Chains burst items after every terminal node.
void append_burst_items(EmaScript& script, std::span<const BurstItem> items);

// ---------------------------------------------------------------------------
// Sessions

enum class SessionState { Delivered, InProgress, Completed, Expired };
[[nodiscard]] std::string_view to_string(SessionState s) noexcept;

struct Answer {
    std::string node_id;
    AnswerValue value;
    Timestamp answered_at;

    friend bool operator==(const Answer&, const Answer&) = default;
};

struct EmaSession {
    std::string session_id;
    std::string participant_id;
    EmaScript script;
    Slot slot = Slot::Morning;
    LocalDate date;
    Timestamp delivered_at;
    Timestamp expires_at;
    SessionState state = SessionState::Delivered;
    std::vector<Answer> answers;
    std::optional<SocialContextWindow> window;
    std::vector<SelectedMessage> drawn;  // messages placed into the script

    [[nodiscard]] ScriptKind kind() const noexcept { return script.kind; }
    friend bool operator==(const EmaSession&, const EmaSession&) = default;
    /// Node awaiting an answer; nullopt once Completed or Expired.
    [[nodiscard]] std::optional<std::string> current_node() const;
};

[[nodiscard]] EmaSession deliver(std::string session_id, const PendingPrompt& prompt, EmaScript script,
                                 Timestamp delivered_at, Seconds expire_after);

/// Records an answer to the current node.
/// Throws SessionExpired (at or after expiry, or already Expired), WrongNode
/// (not the current node, or session Completed), ValueOutOfDomain.
[[nodiscard]] EmaSession advance(EmaSession session, std::string_view node_id, const AnswerValue& value, Timestamp at);

/// Marks Delivered/InProgress sessions Expired once `now` reaches expires_at. Returns true on change.
bool expire_if_due(EmaSession& session, Timestamp now);

/// The confirm-node answer: Yes, No, or NoAnswer when skipped, unanswered, or direct-ask.
[[nodiscard]] Confirmation confirmation_of(const EmaSession& session);

/// Full resolution once the confirm (and, after No, the fallback) node has an
/// answer; for direct-ask sessions the answer sets the company and the result is
/// excluded from accuracy. nullopt while pending.
[[nodiscard]] std::optional<ContextResolution> resolution_of(const EmaSession& session);

/// Messages on nodes the participant reached (answered, or awaiting an answer).
[[nodiscard]] std::vector<SelectedMessage> shown_messages(const EmaSession& session);

enum class ActionPlanChoiceKind { InteractWithSomeone, FunActivityOutOfHome, GoalStep, CustomGoal };
struct ActionPlanChoice {
    ActionPlanChoiceKind kind = ActionPlanChoiceKind::InteractWithSomeone;
    std::string custom_text;  // nonempty for CustomGoal
};
[[nodiscard]] std::optional<ActionPlanChoice> action_plan_choice(const EmaSession& session);

struct BurstAnswer {
    std::string participant_id;
    std::string item_id;
    std::int64_t value = 0;
    Timestamp answered_at;
};
[[nodiscard]] std::vector<BurstAnswer> burst_answers(const EmaSession& session);

}  // namespace msite
