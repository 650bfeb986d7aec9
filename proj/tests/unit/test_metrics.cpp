#include <nlohmann/json.hpp>

#include <doctest.h>

#include "../oracles/recount_oracle.hpp"
#include "../support.hpp"
#include "msite/metrics.hpp"

using namespace msite;
using testing_support::day;
using testing_support::ts;

namespace {
EmaSession session(ScriptKind k, SessionState s) {
    EmaSession e;
    e.script.kind = k;
    e.state = s;
    return e;
}
}  // namespace

TEST_CASE("adherence counts completed over delivered") {
    std::vector<EmaSession> log{session(ScriptKind::ActionPlan, SessionState::Completed),
                                session(ScriptKind::ActionPlan, SessionState::Expired),
                                session(ScriptKind::Contextual, SessionState::Completed),
                                session(ScriptKind::Contextual, SessionState::InProgress)};
    const auto a = adherence(log);
    CHECK(a.delivered == 4);
    CHECK(a.answered == 2);
    CHECK(a.rate == 0.5);
    CHECK(a.by_kind.at(ScriptKind::ActionPlan).rate == 0.5);
    CHECK(a.answered_mix.at(ScriptKind::Contextual) == 0.5);
    CHECK(adherence({}).rate == 0.0);
}

TEST_CASE("accuracy excludes unanswered confirmations") {
    const SocialContext c{Location::Home, Company::Alone};
    std::vector<ContextResolution> r{reconcile(c, Confirmation::Yes, std::nullopt),
                                     reconcile(c, Confirmation::Yes, std::nullopt),
                                     reconcile(c, Confirmation::No, Company::WithOthers),
                                     reconcile(c, Confirmation::NoAnswer, std::nullopt)};
    const auto a = detection_accuracy(r);
    CHECK(a.confirmed_yes == 2);
    CHECK(a.confirmed_no == 1);
    CHECK(a.excluded_no_answer == 1);
    REQUIRE(a.accuracy);
    CHECK(*a.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(detection_accuracy({}).accuracy);
}

TEST_CASE("coverage per local day") {
    const UtcOffset off{};
    std::vector<SensorRecord> recs;
    const auto d0 = ts("2026-01-05T00:00:00Z");
    // Day one: fixes every 5 minutes all day, one audio frame per window all day.
    for (int s = 0; s < 86400; s += 300) recs.push_back({"P", d0 + Seconds{s}, LocationSample{1, 1, 5}});
    for (int w = 0; w < 144; ++w) recs.push_back({"P", d0 + Seconds{w * 600}, AudioFrame{w, 0, -50, 0}});
    // Day two: twelve hours of location only.
    for (int s = 0; s < 12 * 3600; s += 300) recs.push_back({"P", d0 + kDay + Seconds{s}, LocationSample{1, 1, 5}});
    std::stable_sort(recs.begin(), recs.end(), [](auto& a, auto& b) { return a.captured_at < b.captured_at; });
    const auto c = coverage(recs, day("2026-01-05"), day("2026-01-06"), off);
    REQUIRE(c.days.size() == 2);
    CHECK(c.days[0].location_h == doctest::Approx(24.0));
    CHECK(c.days[0].audio_h == doctest::Approx(24.0));
    CHECK(c.days[1].location_h == doctest::Approx(12.0).epsilon(0.01));
    CHECK(c.days[1].audio_h == 0.0);
    CHECK(c.days_at_target == 1);
    CHECK(c.fraction_days_at_target == 0.5);
}

TEST_CASE("weekly aggregates") {
    const auto start = day("2026-01-05");
    const auto t0 = ts("2026-01-05T00:00:00Z");
    std::vector<ConversationEpisode> eps{{t0 + kHour, 600, -30, 0, 0},
                                         {t0 + Seconds{8 * 86400}, 600, -30, 0, 0},
                                         {t0 + Seconds{9 * 86400}, 600, -30, 0, 0}};
    std::vector<HomeAwayInterval> tl{{t0, t0 + Seconds{10 * 3600}, PresenceState::Home},
                                     {t0 + Seconds{7 * 86400 - 3600}, t0 + Seconds{7 * 86400 + 3600}, PresenceState::Home}};
    const auto w = weekly_aggregate(eps, tl, start, UtcOffset{}, 2);
    REQUIRE(w.size() == 2);
    CHECK(w[0].conversation_count == 1);
    CHECK(w[1].conversation_count == 2);
    CHECK(w[0].home_time_h == doctest::Approx(11.0));
    CHECK(w[1].home_time_h == doctest::Approx(1.0));
}

TEST_CASE("burst summary and message mix") {
    std::vector<BurstAnswer> a{{"P", "pleasure", 4, {}}, {"P", "pleasure", 6, {}}, {"P", "home_minutes", 30, {}}};
    const auto b = burst_summary(a, "P", 0);
    REQUIRE(b.items.size() == 2);
    CHECK(b.items[0].item_id == "home_minutes");
    CHECK(b.items[1].mean == 5.0);
    CHECK(b.items[1].n == 2);

    std::vector<MessageCategory> log{MessageCategory::ThreatChallenge, MessageCategory::ThreatChallenge,
                                     MessageCategory::SocialEncouragement};
    CHECK(message_mix(log) == oracle::shares(log));
    CHECK(message_mix(std::span<const MessageCategory>{}).empty());
}

TEST_CASE("report renderings") {
    ParticipantReport r;
    r.participant_id = "P";
    r.adherence.rate = 0.77;
    r.accuracy.accuracy = 0.9;
    const auto j = to_json(r);
    CHECK(j.at("participant_id") == "P");
    CHECK(render_text(r).find("77.0%") != std::string::npos);
    const std::vector<ParticipantReport> all{r};
    const auto csv = render_csv(all);
    CHECK(csv.rfind("participant_id,section,key,value\n", 0) == 0);
    CHECK(csv.find("P,adherence,rate,0.770000") != std::string::npos);
    CHECK(format_fixed(0.1234567, 6) == "0.123457");
    CHECK(format_fixed(2.0, 3) == "2.000");
}

TEST_CASE("growing social activity shows as rising weekly conversation counts") {
    const auto p = testing_support::persona({{"conv_rate_home_h", 0.15},
                                             {"conv_rate_away_h", 0.3},
                                             {"conv_growth_weekly", 1.0},
                                             {"meal_conv_prob", 0.0},
                                             {"tv_prob", 0.0}});
    const auto start = day("2026-01-05");
    std::vector<TimedFrame> frames;
    for (int d = 0; d < 28; ++d) {
        const auto date = add_days(start, d);
        Rng tr(6, "growth-truth/" + format_date(date));
        Rng nr(6, "growth-noise/" + format_date(date));
        const auto recs = render_sensor_traces(generate_ground_truth(p, date, d / 7, tr), p, NoiseParams{}, nr);
        const auto f = frames_of(recs);
        frames.insert(frames.end(), f.begin(), f.end());
    }
    const auto eps = detect_episodes(frames, AudioConfig{});
    const auto weeks = weekly_aggregate(eps, {}, start, p.offset, 4);
    REQUIRE(weeks.size() == 4);
    for (std::size_t w = 1; w < weeks.size(); ++w) {
        CHECK(weeks[w].conversation_count > weeks[w - 1].conversation_count);
    }
}
