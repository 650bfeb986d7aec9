#include <doctest.h>

#include "../support.hpp"
#include "msite/config.hpp"
#include "msite/error.hpp"

using namespace msite;
using testing_support::day;
using testing_support::ts;

namespace {

const UtcOffset kOff{Seconds{-8 * 3600}};

std::vector<SensorRecord> rendered_days(const Persona& p, LocalDate first, int n, std::uint64_t seed) {
    std::vector<SensorRecord> out;
    for (int d = 0; d < n; ++d) {
        const auto date = add_days(first, d);
        Rng tr(seed, "truth/" + format_date(date));
        Rng nr(seed, "noise/" + format_date(date));
        const auto recs = render_sensor_traces(generate_ground_truth(p, date, 0, tr), p, NoiseParams{}, nr);
        out.insert(out.end(), recs.begin(), recs.end());
    }
    return out;
}

/// Uploads every 10 minutes with a tick after each, from `from` to `to`.
void drive(Engine& e, const std::string& pid, const std::vector<SensorRecord>& recs, Timestamp from, Timestamp to) {
    std::size_t i = 0;
    while (i < recs.size() && recs[i].captured_at < from) ++i;
    for (auto t = from; t <= to; t += Seconds{600}) {
        UploadBatch b{pid, {}, {}, t, t};
        while (i < recs.size() && recs[i].captured_at <= t) b.records.push_back(recs[i++]);
        if (!b.records.empty()) e.ingest(b);
        e.process_tick(t);
    }
}

}  // namespace

TEST_CASE("enrollment and ingest errors") {
    Engine e(EngineConfig{});
    e.enroll({"P", day("2026-01-05"), day("2026-01-11"), kOff, {}});
    CHECK_THROWS_AS(e.enroll({"P", day("2026-01-05"), day("2026-01-11"), kOff, {}}), Error);
    CHECK_THROWS_AS(e.enroll({"Q", day("2026-01-05"), day("2026-01-01"), kOff, {}}), Error);
    CHECK_THROWS_AS(e.enroll({"", day("2026-01-05"), day("2026-01-11"), kOff, {}}), Error);
    const auto t = ts("2026-01-05T10:00:00Z");
    CHECK_THROWS_AS(e.ingest({"Z", {}, {}, t, t}), Error);
    CHECK_THROWS_AS(e.ingest({"P", {}, {}, t, t - Seconds{1}}), Error);
    CHECK_THROWS_AS((void)e.session("nope"), Error);
    CHECK(e.participants() == std::vector<std::string>{"P"});
}

TEST_CASE("duplicate records are counted, not stored") {
    Engine e(EngineConfig{});
    e.enroll({"P", day("2026-01-05"), day("2026-01-11"), kOff, {}});
    const auto t = ts("2026-01-05T10:00:00Z");
    const auto batch = make_batch("P",
                                  "P,2026-01-05T09:59:00Z,LOC,34.05,-118.25,10\n"
                                  "P,2026-01-05T09:59:01Z,AUD,0,0,-50,0.1\n"
                                  "Q,2026-01-05T09:59:02Z,LOC,34.05,-118.25,10\n"
                                  "broken line\n",
                                  t, t);
    CHECK(batch.records.size() == 2);
    CHECK(batch.malformed.size() == 2);
    auto ack = e.ingest(batch);
    CHECK(ack.accepted == 2);
    CHECK(ack.rejected.size() == 2);
    ack = e.ingest(batch);
    CHECK(ack.accepted == 0);
    CHECK(ack.duplicates == 2);
    CHECK(e.records("P").size() == 2);
}

TEST_CASE("a day of ticks delivers three prompts and builds context windows") {
    const auto p = testing_support::persona({{"participant_id", "P"}, {"utc_offset_min", -480}});
    const auto first = day("2026-01-05");
    const auto recs = rendered_days(p, add_days(first, -7), 9, 4);
    Engine e(EngineConfig{});
    e.enroll({"P", first, add_days(first, 1), kOff, {0}});
    e.ingest({"P",
              slice(recs, Timestamp{}, local_midnight(first, kOff)),
              {},
              local_midnight(first, kOff),
              local_midnight(first, kOff)});
    drive(e, "P", recs, local_midnight(first, kOff), local_midnight(add_days(first, 2), kOff));

    REQUIRE(e.place_model("P"));
    CHECK(e.place_model("P")->home_place() != nullptr);
    const auto& s = e.sessions("P");
    REQUIRE(s.size() == 6);
    CHECK(s[0].session_id == "P_2026-01-05_morning");
    CHECK(s[1].kind() == ScriptKind::Contextual);
    CHECK(s[1].delivered_at == ts("2026-01-05T20:00:00Z"));
    CHECK(e.context_windows("P").size() == 4);
    for (const auto& x : s) CHECK(x.state == SessionState::Expired);
    CHECK(e.report("P").adherence.delivered == 6);
    // Windows filtered by start.
    CHECK(e.context_windows("P", ts("2026-01-05T00:00:00Z"), ts("2026-01-06T00:00:00Z")).size() == 2);
}

TEST_CASE("answers, resolutions and replay") {
    const auto p = testing_support::persona({{"participant_id", "P"}, {"utc_offset_min", -480}});
    const auto first = day("2026-01-05");
    const auto recs = rendered_days(p, add_days(first, -3), 4, 9);
    EngineConfig cfg;
    Engine e(cfg);
    e.enroll({"P", first, first, kOff, {}});
    e.add_message("P", MessageCategory::DefeatistChallenge, "You've got this", ts("2026-01-01T00:00:00Z"));
    drive(e, "P", recs, local_midnight(add_days(first, -3), kOff), ts("2026-01-05T20:00:00Z"));
    auto sid = std::string("P_2026-01-05_noon");
    auto t = ts("2026-01-05T20:05:00Z");
    while (auto node = e.session(sid).current_node()) {
        const auto* n = e.session(sid).script.find(*node);
        AnswerValue v = n->answer.type == AnswerType::Choice   ? AnswerValue{n->answer.options.front()}
                        : n->answer.type == AnswerType::Slider ? AnswerValue{std::int64_t{4}}
                                                               : AnswerValue{std::string("A chat")};
        e.answer(sid, *node, v, t += Seconds{10});
    }
    CHECK(e.session(sid).state == SessionState::Completed);
    CHECK(e.resolutions("P").size() == 1);
    CHECK(e.resolutions("P")[0].confirmed == Confirmation::Yes);
    CHECK_THROWS_AS(e.answer(sid, "confirm", std::string("Yes"), t), Error);

    const auto copy = Engine::replay(cfg, e.events());
    CHECK(copy.sessions("P") == e.sessions("P"));
    CHECK(copy.context_windows("P") == e.context_windows("P"));
    std::string log;
    for (const auto& ev : e.events()) log += serialize_event(ev) + "\n";
    CHECK(parse_event_log(log).size() == e.events().size());

    cfg.record_history = false;
    Engine quiet(cfg);
    quiet.enroll({"P", first, first, kOff, {}});
    CHECK(quiet.events().empty());
}

TEST_CASE("records received late do not change a delivered window") {
    const auto p = testing_support::persona({{"participant_id", "P"}, {"utc_offset_min", -480}});
    const auto first = day("2026-01-05");
    const auto recs = rendered_days(p, add_days(first, -3), 4, 2);
    Engine e(EngineConfig{});
    e.enroll({"P", first, first, kOff, {}});
    drive(e, "P", recs, local_midnight(add_days(first, -3), kOff), ts("2026-01-05T20:00:00Z"));
    const auto before = e.context_windows("P");
    REQUIRE(before.size() == 1);
    // A backlog for the morning arrives after the prompt.
    std::vector<SensorRecord> extra;
    for (int s = 0; s < 6 * 3600; s += 60) {
        extra.push_back({"P", ts("2026-01-05T14:00:00Z") + Seconds{s + 7}, LocationSample{0.0, 0.0, 5}});
    }
    e.ingest({"P", extra, {}, ts("2026-01-05T20:30:00Z"), ts("2026-01-05T20:30:00Z")});
    e.process_tick(ts("2026-01-05T20:30:00Z"));
    CHECK(e.context_windows("P") == before);
    // The pure assessment with a later cutoff does see them.
    const auto later = e.assess("P", ts("2026-01-05T14:00:00Z"), ts("2026-01-05T20:00:00Z"), ts("2026-01-05T21:00:00Z"));
    CHECK(later.detected.location == Location::Away);
}

TEST_CASE("config flattening and unknown keys") {
    const auto flat = flatten_config(nlohmann::json::parse(
        R"({"place":{"eps_m":80,"min_pts":4},"processing":{"upload_interval_min":60},"sim":{"gps_sigma_m":5},"seed":9})"));
    CHECK(flat.at("place.eps_m") == 80);
    const auto c = engine_config_from(flat);
    CHECK(c.place.eps_m == 80.0);
    CHECK(c.place.min_pts == 4);
    CHECK(c.processing.upload_interval == Seconds{3600});
    CHECK(c.seed == 9);
    try {
        (void)engine_config_from({{"place.epsilon", 1}});
        FAIL("expected InvalidConfig");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
    }
    CHECK_THROWS_AS((void)engine_config_from({{"processing.upload_interval_min", 0}}), Error);
}
