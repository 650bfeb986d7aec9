#include "msite/engagement.hpp"

#include <algorithm>

#include "msite/error.hpp"

namespace msite {

namespace {

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

void check_rating(int r) {
    if (r < Engagement::kMinRating || r > Engagement::kMaxRating) {
        throw Error(ErrorCode::RatingOutOfDomain, std::to_string(r));
    }
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string_view to_string(GoalLevel l) noexcept {
    switch (l) {
        case GoalLevel::LongTerm: return "LongTerm";
        case GoalLevel::ShortTerm: return "ShortTerm";
        case GoalLevel::Step: return "Step";
    }
    return "LongTerm";
}

std::optional<GoalLevel> parse_goal_level(std::string_view text) {
    if (text == "LongTerm") return GoalLevel::LongTerm;
    if (text == "ShortTerm") return GoalLevel::ShortTerm;
    if (text == "Step") return GoalLevel::Step;
    return std::nullopt;
}

std::string_view to_string(GoalStatus s) noexcept { return s == GoalStatus::Open ? "Open" : "Completed"; }
std::string_view to_string(ActivityStatus s) noexcept { return s == ActivityStatus::Planned ? "Planned" : "Done"; }
std::string_view to_string(AwardSource s) noexcept { return s == AwardSource::GoalStep ? "GoalStep" : "Activity"; }

const GoalNode* Engagement::find_goal(std::string_view goal_id) const noexcept {
    for (const auto& g : goals_) {
        if (g.goal_id == goal_id) return &g;
    }
    return nullptr;
}

GoalNode* Engagement::goal_mut(std::string_view goal_id) noexcept {
    return const_cast<GoalNode*>(std::as_const(*this).find_goal(goal_id));
}

const ActivityLog* Engagement::find_activity(std::string_view activity_id) const noexcept {
    for (const auto& a : activities_) {
        if (a.activity_id == activity_id) return &a;
    }
    return nullptr;
}

ActivityLog* Engagement::activity_mut(std::string_view activity_id) noexcept {
    return const_cast<ActivityLog*>(std::as_const(*this).find_activity(activity_id));
}

const GoalNode& Engagement::upsert_goal_node(const std::optional<std::string>& parent, GoalLevel level,
                                             std::string title, bool in_session) {
    if (blank(title)) throw Error(ErrorCode::EmptyText, "goal title");
    if (level == GoalLevel::LongTerm) {
        if (parent) throw Error(ErrorCode::BadParentLevel, "a long-term goal has no parent");
    } else {
        if (!parent) throw Error(ErrorCode::BadParentLevel, std::string(to_string(level)) + " needs a parent");
        const auto* p = find_goal(*parent);
        if (p == nullptr) throw Error(ErrorCode::UnknownTarget, *parent);
        const auto want = level == GoalLevel::ShortTerm ? GoalLevel::LongTerm : GoalLevel::ShortTerm;
        if (p->level != want) {
            throw Error(ErrorCode::BadParentLevel,
                        std::string(to_string(level)) + " under " + std::string(to_string(p->level)));
        }
    }
    for (const auto& g : goals_) {
        if (g.parent == parent && g.level == level && g.title == title) return g;
    }
    GoalNode g;
    g.goal_id = "goal-" + std::to_string(next_goal_++);
    g.parent = parent;
    g.level = level;
    g.title = std::move(title);
    g.created_in_session = in_session;
    goals_.push_back(std::move(g));
    return goals_.back();
}

const ActivityLog& Engagement::plan_activity(const std::string& activity_id, std::string title, int anticipated) {
    check_rating(anticipated);
    if (blank(activity_id)) throw Error(ErrorCode::EmptyText, "activity id");
    if (auto* a = activity_mut(activity_id)) {
        if (a->status == ActivityStatus::Done) throw Error(ErrorCode::AlreadyCompleted, activity_id);
        a->anticipated_pleasure = anticipated;
        if (!blank(title)) a->title = std::move(title);
        return *a;
    }
    ActivityLog a;
    a.activity_id = activity_id;
    a.title = blank(title) ? activity_id : std::move(title);
    a.anticipated_pleasure = anticipated;
    activities_.push_back(std::move(a));
    return activities_.back();
}

const ActivityLog& Engagement::complete_activity(const std::string& activity_id, int experienced,
                                                 std::optional<SavorArtifact> savor) {
    auto* a = activity_mut(activity_id);
    if (a == nullptr) throw Error(ErrorCode::CompleteBeforePlan, activity_id);
    if (a->status == ActivityStatus::Done) throw Error(ErrorCode::AlreadyCompleted, activity_id);
    check_rating(experienced);
    if (savor && blank(savor->value)) throw Error(ErrorCode::EmptyText, "savor artifact");
    a->experienced_pleasure = experienced;
    a->savor_artifact = std::move(savor);
    a->status = ActivityStatus::Done;
    return *a;
}

const AwardEntry& Engagement::complete_step_and_spin(const std::string& target_id, Rng& rng, Timestamp now) {
    AwardSource source;
    if (auto* g = goal_mut(target_id)) {
        if (g->level != GoalLevel::Step) throw Error(ErrorCode::NotAStep, target_id);
        if (g->status == GoalStatus::Completed) throw Error(ErrorCode::AlreadyCompleted, target_id);
        g->status = GoalStatus::Completed;
        source = AwardSource::GoalStep;
    } else if (auto* a = activity_mut(target_id)) {
        if (a->status != ActivityStatus::Done) throw Error(ErrorCode::CompleteBeforePlan, target_id);
        if (a->awarded) throw Error(ErrorCode::AlreadyCompleted, target_id);
        a->awarded = true;
        source = AwardSource::Activity;
    } else {
        throw Error(ErrorCode::UnknownTarget, target_id);
    }
    const auto diamonds = static_cast<int>(rng.uniform_int(kMinDiamonds, kMaxDiamonds));
    ledger_.entries.push_back({now, source, target_id, diamonds});
    ledger_.total += diamonds;
    return ledger_.entries.back();
}

std::string goals_csv(const std::vector<GoalNode>& goals) {
    std::string out = "goal_id,parent,level,title,status\n";
    for (const auto& g : goals) {
        out += g.goal_id + "," + g.parent.value_or("") + "," + std::string(to_string(g.level)) + "," +
               csv_field(g.title) + "," + std::string(to_string(g.status)) + "\n";
    }
    return out;
}

std::string activities_csv(const std::vector<ActivityLog>& activities) {
    std::string out = "activity_id,anticipated,experienced,status\n";
    for (const auto& a : activities) {
        out += csv_field(a.activity_id) + "," + std::to_string(a.anticipated_pleasure) + "," +
               (a.experienced_pleasure ? std::to_string(*a.experienced_pleasure) : "") + "," +
               std::string(to_string(a.status)) + "\n";
    }
    return out;
}

}  // namespace msite
