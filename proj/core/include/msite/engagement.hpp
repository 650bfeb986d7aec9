#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msite/rng.hpp"
#include "msite/time.hpp"

namespace msite {

enum class GoalLevel { LongTerm, ShortTerm, Step };
enum class GoalStatus { Open, Completed };
[[nodiscard]] std::string_view to_string(GoalLevel l) noexcept;
[[nodiscard]] std::optional<GoalLevel> parse_goal_level(std::string_view text);
[[nodiscard]] std::string_view to_string(GoalStatus s) noexcept;

struct GoalNode {
    std::string goal_id;
    std::optional<std::string> parent;
    GoalLevel level = GoalLevel::LongTerm;
    std::string title;
    GoalStatus status = GoalStatus::Open;
    bool created_in_session = false;

    friend bool operator==(const GoalNode&, const GoalNode&) = default;
};

enum class ActivityStatus { Planned, Done };
[[nodiscard]] std::string_view to_string(ActivityStatus s) noexcept;

/// Savoring text or an opaque photo reference. Media bytes are never stored.
struct SavorArtifact {
    enum class Kind { Text, PhotoRef } kind = Kind::Text;
    std::string value;
    friend bool operator==(const SavorArtifact&, const SavorArtifact&) = default;
};

struct ActivityLog {
    std::string activity_id;
    std::string title;
    int anticipated_pleasure = 0;
    std::optional<int> experienced_pleasure;
    std::optional<SavorArtifact> savor_artifact;
    ActivityStatus status = ActivityStatus::Planned;
    bool awarded = false;

    friend bool operator==(const ActivityLog&, const ActivityLog&) = default;
};

enum class AwardSource { GoalStep, Activity };
[[nodiscard]] std::string_view to_string(AwardSource s) noexcept;

struct AwardEntry {
    Timestamp earned_at;
    AwardSource source = AwardSource::GoalStep;
    std::string target_id;
    int diamonds = 0;
    friend bool operator==(const AwardEntry&, const AwardEntry&) = default;
};

struct AwardLedger {
    std::string participant_id;
    std::vector<AwardEntry> entries;
    std::int64_t total = 0;
};

/// One participant's goals, activities and awards.
class Engagement {
public:
    static constexpr int kMinRating = 1;
    static constexpr int kMaxRating = 7;
    static constexpr int kMinDiamonds = 1;
    static constexpr int kMaxDiamonds = 5;

    explicit Engagement(std::string participant_id = {}) { ledger_.participant_id = std::move(participant_id); }

    /// Returns the existing node when (parent, level, title) already exists.
    /// Throws BadParentLevel unless LongTerm has no parent, ShortTerm sits under
    /// LongTerm and Step under ShortTerm; UnknownTarget for a missing parent;
    /// EmptyText for a blank title.
    const GoalNode& upsert_goal_node(const std::optional<std::string>& parent, GoalLevel level, std::string title,
                                     bool in_session = false);

    /// Plan: stores the anticipated rating, creating the activity if needed.
    /// Throws RatingOutOfDomain, AlreadyCompleted when the activity is Done.
    const ActivityLog& plan_activity(const std::string& activity_id, std::string title, int anticipated);
    /// Complete: throws CompleteBeforePlan, RatingOutOfDomain, AlreadyCompleted.
    const ActivityLog& complete_activity(const std::string& activity_id, int experienced,
                                         std::optional<SavorArtifact> savor);

    /// Marks a Step goal Completed (or credits a Done activity) and spins the
    /// wheel: diamonds uniform on 1..5. Each target pays out once.
    /// Throws UnknownTarget, NotAStep, AlreadyCompleted.
    const AwardEntry& complete_step_and_spin(const std::string& target_id, Rng& rng, Timestamp now);

    [[nodiscard]] const std::vector<GoalNode>& goals() const noexcept { return goals_; }
    [[nodiscard]] const std::vector<ActivityLog>& activities() const noexcept { return activities_; }
    [[nodiscard]] const AwardLedger& ledger() const noexcept { return ledger_; }
    [[nodiscard]] const GoalNode* find_goal(std::string_view goal_id) const noexcept;
    [[nodiscard]] const ActivityLog* find_activity(std::string_view activity_id) const noexcept;

private:
    GoalNode* goal_mut(std::string_view goal_id) noexcept;
    ActivityLog* activity_mut(std::string_view activity_id) noexcept;

    std::vector<GoalNode> goals_;
    std::vector<ActivityLog> activities_;
    AwardLedger ledger_;
    std::uint64_t next_goal_ = 1;
};

/// `goal_id,parent,level,title,status`
[[nodiscard]] std::string goals_csv(const std::vector<GoalNode>& goals);
/// `activity_id,anticipated,experienced,status`
[[nodiscard]] std::string activities_csv(const std::vector<ActivityLog>& activities);

}  // namespace msite
