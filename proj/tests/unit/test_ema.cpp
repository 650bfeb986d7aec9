#include <functional>

#include <doctest.h>

#include "../support.hpp"
#include "msite/error.hpp"

using namespace msite;
using testing_support::contextual_session;
using testing_support::day;
using testing_support::selected;
using testing_support::ts;

namespace {

/// Answers nodes with `pick` until the session completes; returns visited node ids.
std::vector<std::string> walk(EmaSession& s, const std::function<AnswerValue(const ScriptNode&)>& pick) {
    std::vector<std::string> visited;
    auto t = s.delivered_at;
    while (auto node = s.current_node()) {
        const auto* n = s.script.find(*node);
        REQUIRE(n != nullptr);
        visited.push_back(*node);
        t += Seconds{5};
        s = advance(s, *node, pick(*n), t);
    }
    return visited;
}

AnswerValue first_option(const ScriptNode& n) {
    switch (n.answer.type) {
        case AnswerType::Choice: return n.answer.options.front();
        case AnswerType::Slider:
        case AnswerType::Minutes: return n.answer.min;
        default: return std::string("text");
    }
}

std::function<AnswerValue(const ScriptNode&)> say(std::map<std::string, std::string> at_node) {
    return [at_node](const ScriptNode& n) -> AnswerValue {
        if (auto it = at_node.find(n.node_id); it != at_node.end()) return it->second;
        return first_option(n);
    };
}

}  // namespace

TEST_CASE("default item bank loads and validates") {
    const auto& bank = default_item_bank();
    CHECK_NOTHROW(bank.action_plan.validate());
    CHECK(bank.threat_items.size() == 3);
    CHECK(bank.defeatist_items.size() == 3);
    CHECK(bank.burst_items.size() == 5);
    CHECK_THROWS_AS((void)parse_item_bank("{not json\n"), std::exception);
}

TEST_CASE("three prompts per active day") {
    Enrollment en{"P", day("2026-01-05"), day("2026-01-11"), UtcOffset{Seconds{-8 * 3600}}, {0}};
    const auto p = schedule_day(en, day("2026-01-06"), DailySchedule{}, true);
    REQUIRE(p.size() == 3);
    CHECK(p[0].kind == ScriptKind::ActionPlan);
    CHECK(p[1].kind == ScriptKind::Contextual);
    CHECK(p[1].fire_at == ts("2026-01-06T20:00:00Z"));
    REQUIRE(p[1].window);
    CHECK(p[1].window->from == ts("2026-01-06T14:00:00Z"));
    CHECK(p[1].window->to == p[1].fire_at);
    CHECK(p[2].period_phrase == "afternoon");
    CHECK(p[0].burst);
    CHECK_THROWS_AS((void)schedule_day(en, day("2026-01-12"), DailySchedule{}, false), Error);
    CHECK(en.burst_on(day("2026-01-11")));
    CHECK(en.days() == 7);
}

TEST_CASE("schedule validation") {
    DailySchedule s;
    CHECK_NOTHROW(s.validate());
    s.slots[1].fire_at = Seconds{7 * 3600};
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("confirmed contexts walk appraisal, challenge, and savor when with others") {
    for (auto loc : {Location::Home, Location::Away}) {
        for (auto comp : {Company::Alone, Company::WithOthers}) {
            const SocialContext ctx{loc, comp};
            auto s = contextual_session(ctx, Basis::Sensed, "morning");
            const auto* confirm = s.script.find("confirm");
            REQUIRE(confirm != nullptr);
            CHECK(confirm->prompt == confirm_prompt(ctx, "morning"));
            const auto path = walk(s, say({{"confirm", "Yes"}}));
            CHECK(s.state == SessionState::Completed);
            const bool with_others = comp == Company::WithOthers;
            CHECK(path.size() == 1 + 3 + 1 + (with_others ? 1 : 0));
            CHECK(s.script.find(path[4])->role == node_role::kChallenge);
            CHECK(s.script.find(path[4])->message_category == category_for_context(ctx));
            if (with_others) CHECK(s.script.find(path.back())->role == node_role::kSavor);
            const auto r = resolution_of(s);
            REQUIRE(r);
            CHECK(r->effective == ctx);
            CHECK(confirmation_of(s) == Confirmation::Yes);
        }
    }
}

TEST_CASE("confirm No goes through the fallback and corrects company") {
    auto s = contextual_session({Location::Home, Company::WithOthers}, Basis::Sensed, "afternoon");
    const auto path = walk(s, say({{"confirm", "No"}, {"fallback", "No"}}));
    REQUIRE(path.size() >= 2);
    CHECK(path[1] == "fallback");
    CHECK(s.script.find("fallback")->prompt == "Sorry that we got it wrong! Were you around others this afternoon?");
    const auto r = resolution_of(s);
    REQUIRE(r);
    CHECK(r->confirmed == Confirmation::No);
    CHECK(r->effective == SocialContext{Location::Home, Company::Alone});
    // Home/Alone after correction shows a threat challenge.
    const auto shown = shown_messages(s);
    CHECK(std::any_of(shown.begin(), shown.end(), [](const SelectedMessage& m) {
        return m.message.category == MessageCategory::ThreatChallenge;
    }));
}

TEST_CASE("skip counts as no answer") {
    auto s = contextual_session({Location::Away, Company::Alone}, Basis::Sensed);
    walk(s, say({{"confirm", "Skip"}}));
    CHECK(confirmation_of(s) == Confirmation::NoAnswer);
    REQUIRE(resolution_of(s));
    CHECK(resolution_of(s)->excluded_from_accuracy());
}

TEST_CASE("insufficient data starts with a direct question") {
    auto s = contextual_session({Location::Away, Company::Alone}, Basis::Insufficient, "morning");
    CHECK(s.script.entry().node_id == "direct_ask");
    CHECK(s.script.find("confirm") == nullptr);
    walk(s, say({{"direct_ask", "Yes"}}));
    const auto r = resolution_of(s);
    REQUIRE(r);
    CHECK(r->effective.company == Company::WithOthers);
    CHECK(r->excluded_from_accuracy());
}

TEST_CASE("mismatched message category is rejected") {
    SocialContextWindow w;
    w.detected = {Location::Away, Company::Alone};
    CHECK_THROWS_AS((void)build_contextual_session(w, "morning", selected(MessageCategory::ThreatChallenge), std::nullopt,
                                                   std::nullopt, default_item_bank(), "x"),
                    Error);
    // Home/WithOthers can be corrected to Home/Alone, which needs a threat alternate.
    w.detected = {Location::Home, Company::WithOthers};
    CHECK_THROWS_AS((void)build_contextual_session(w, "morning", selected(MessageCategory::DefeatistChallenge),
                                                   std::nullopt, std::nullopt, default_item_bank(), "x"),
                    Error);
}

TEST_CASE("advance enforces node, domain and expiry") {
    auto s = contextual_session({Location::Away, Company::Alone}, Basis::Sensed);
    const auto t = s.delivered_at + Seconds{10};
    CHECK_THROWS_AS((void)advance(s, "fallback", std::string("Yes"), t), Error);
    CHECK_THROWS_AS((void)advance(s, "confirm", std::string("Maybe"), t), Error);
    CHECK_THROWS_AS((void)advance(s, "confirm", std::int64_t{3}, t), Error);
    try {
        (void)advance(s, "confirm", std::string("Yes"), s.expires_at);
        FAIL("expected SessionExpired");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SessionExpired);
    }
    s = advance(s, "confirm", std::string("Yes"), t);
    CHECK(s.state == SessionState::InProgress);
    CHECK_FALSE(expire_if_due(s, s.expires_at - Seconds{1}));
    CHECK(expire_if_due(s, s.expires_at));
    CHECK(s.state == SessionState::Expired);
    CHECK_FALSE(s.current_node());
}

TEST_CASE("slider and minutes domains") {
    CHECK(in_domain(AnswerSpec::slider(), AnswerValue{std::int64_t{1}}));
    CHECK(in_domain(AnswerSpec::slider(), AnswerValue{std::int64_t{7}}));
    CHECK_FALSE(in_domain(AnswerSpec::slider(), AnswerValue{std::int64_t{8}}));
    CHECK(in_domain(AnswerSpec::minutes(), AnswerValue{std::int64_t{0}}));
    CHECK_FALSE(in_domain(AnswerSpec::minutes(), AnswerValue{std::int64_t{61}}));
    CHECK_FALSE(in_domain(AnswerSpec::text(), AnswerValue{std::string("")}));
    CHECK(in_domain(AnswerSpec::text(), AnswerValue{std::string("x")}));
}

TEST_CASE("action plan with custom goal and burst items") {
    auto script = build_action_plan_session(default_item_bank(), selected(MessageCategory::SocialEncouragement), "ap");
    append_burst_items(script, default_item_bank().burst_items);
    CHECK_NOTHROW(script.validate());
    PendingPrompt p;
    p.participant_id = "P";
    p.kind = ScriptKind::ActionPlan;
    p.fire_at = ts("2026-01-05T16:00:00Z");
    auto s = deliver("P_ap", p, script, p.fire_at, Seconds{4 * 3600});
    const auto path = walk(s, [](const ScriptNode& n) -> AnswerValue {
        if (n.node_id == "plan") return std::string("Custom goal");
        if (n.answer.type == AnswerType::Slider) return std::int64_t{5};
        if (n.answer.type == AnswerType::Minutes) return std::int64_t{30};
        return first_option(n);
    });
    CHECK(path[1] == "custom");
    const auto choice = action_plan_choice(s);
    REQUIRE(choice);
    CHECK(choice->kind == ActionPlanChoiceKind::CustomGoal);
    CHECK(choice->custom_text == "text");
    const auto burst = burst_answers(s);
    REQUIRE(burst.size() == 5);
    CHECK(burst.back().item_id == "home_minutes");
    CHECK(burst.back().value == 30);
    CHECK(burst.front().value == 5);
}

TEST_CASE("scripts with cycles or dangling branches are invalid") {
    EmaScript s;
    s.nodes.push_back({"a", "A", AnswerSpec::choice({"x"}), {}, "b", "", {}, {}, {}});
    s.nodes.push_back({"b", "B", AnswerSpec::choice({"x"}), {}, "a", "", {}, {}, {}});
    CHECK_THROWS_AS(s.validate(), Error);
    s.nodes[1].next = "zzz";
    CHECK_THROWS_AS(s.validate(), Error);
    s.nodes[1].next.reset();
    CHECK_NOTHROW(s.validate());
    s.nodes.push_back({"c", "C", AnswerSpec::choice({"x"}), {}, {}, "", {}, {}, {}});
    CHECK_THROWS_AS(s.validate(), Error);  // unreachable
}
