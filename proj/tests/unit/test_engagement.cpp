#include <doctest.h>

#include "../support.hpp"
#include "msite/engagement.hpp"
#include "msite/error.hpp"

using namespace msite;
using testing_support::ts;

namespace {
ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidRequest;
}
}  // namespace

TEST_CASE("goal hierarchy levels") {
    Engagement e("P");
    const auto lt = e.upsert_goal_node(std::nullopt, GoalLevel::LongTerm, "Make friends").goal_id;
    const auto st = e.upsert_goal_node(lt, GoalLevel::ShortTerm, "Join a club").goal_id;
    const auto step = e.upsert_goal_node(st, GoalLevel::Step, "Look up clubs").goal_id;
    CHECK(e.goals().size() == 3);
    CHECK(e.upsert_goal_node(st, GoalLevel::Step, "Look up clubs").goal_id == step);
    CHECK(e.goals().size() == 3);
    CHECK(code_of([&] { e.upsert_goal_node(lt, GoalLevel::Step, "x"); }) == ErrorCode::BadParentLevel);
    CHECK(code_of([&] { e.upsert_goal_node(std::nullopt, GoalLevel::ShortTerm, "x"); }) == ErrorCode::BadParentLevel);
    CHECK(code_of([&] { e.upsert_goal_node(lt, GoalLevel::LongTerm, "x"); }) == ErrorCode::BadParentLevel);
    CHECK(code_of([&] { e.upsert_goal_node("nope", GoalLevel::ShortTerm, "x"); }) == ErrorCode::UnknownTarget);
    CHECK(code_of([&] { e.upsert_goal_node(std::nullopt, GoalLevel::LongTerm, " "); }) == ErrorCode::EmptyText);
    const auto csv = goals_csv(e.goals());
    CHECK(csv.rfind("goal_id,parent,level,title,status\n", 0) == 0);
}

TEST_CASE("steps pay out once") {
    Engagement e("P");
    const auto lt = e.upsert_goal_node(std::nullopt, GoalLevel::LongTerm, "A").goal_id;
    const auto st = e.upsert_goal_node(lt, GoalLevel::ShortTerm, "B").goal_id;
    const auto step = e.upsert_goal_node(st, GoalLevel::Step, "C").goal_id;
    Rng rng(1);
    const auto& award = e.complete_step_and_spin(step, rng, ts("2026-01-05T10:00:00Z"));
    CHECK(award.diamonds >= 1);
    CHECK(award.diamonds <= 5);
    CHECK(e.find_goal(step)->status == GoalStatus::Completed);
    CHECK(e.ledger().total == award.diamonds);
    CHECK(code_of([&] { e.complete_step_and_spin(step, rng, ts("2026-01-05T10:00:00Z")); }) == ErrorCode::AlreadyCompleted);
    CHECK(code_of([&] { e.complete_step_and_spin(st, rng, ts("2026-01-05T10:00:00Z")); }) == ErrorCode::NotAStep);
    CHECK(code_of([&] { e.complete_step_and_spin("missing", rng, ts("2026-01-05T10:00:00Z")); }) == ErrorCode::UnknownTarget);
}

TEST_CASE("wheel is uniform over one to five") {
    std::map<int, int> seen;
    Rng rng(12, "unit/wheel");
    Engagement e("P");
    const auto lt = e.upsert_goal_node(std::nullopt, GoalLevel::LongTerm, "A").goal_id;
    const auto st = e.upsert_goal_node(lt, GoalLevel::ShortTerm, "B").goal_id;
    for (int i = 0; i < 5000; ++i) {
        const auto id = e.upsert_goal_node(st, GoalLevel::Step, "s" + std::to_string(i)).goal_id;
        ++seen[e.complete_step_and_spin(id, rng, ts("2026-01-05T10:00:00Z")).diamonds];
    }
    REQUIRE(seen.size() == 5);
    for (const auto& [d, n] : seen) CHECK(n == doctest::Approx(1000).epsilon(0.12));
}

TEST_CASE("activity plan then complete") {
    Engagement e("P");
    CHECK(code_of([&] { e.complete_activity("a1", 5, std::nullopt); }) == ErrorCode::CompleteBeforePlan);
    CHECK(code_of([&] { e.plan_activity("a1", "Walk", 0); }) == ErrorCode::RatingOutOfDomain);
    e.plan_activity("a1", "Walk", 4);
    e.plan_activity("a1", "Walk", 6);  // re-plan updates the rating
    CHECK(e.find_activity("a1")->anticipated_pleasure == 6);
    CHECK(code_of([&] { e.complete_activity("a1", 8, std::nullopt); }) == ErrorCode::RatingOutOfDomain);
    const auto& a = e.complete_activity("a1", 5, SavorArtifact{SavorArtifact::Kind::PhotoRef, "photo://1"});
    CHECK(a.status == ActivityStatus::Done);
    CHECK(a.experienced_pleasure == 5);
    CHECK(code_of([&] { e.complete_activity("a1", 5, std::nullopt); }) == ErrorCode::AlreadyCompleted);
    CHECK(code_of([&] { e.plan_activity("a1", "Walk", 3); }) == ErrorCode::AlreadyCompleted);
    Rng rng(3);
    e.complete_step_and_spin("a1", rng, ts("2026-01-05T10:00:00Z"));
    CHECK(e.find_activity("a1")->awarded);
    CHECK(e.ledger().entries.back().source == AwardSource::Activity);
    CHECK(activities_csv(e.activities()).find("a1,6,5,Done") != std::string::npos);
}
