#include <filesystem>

#include <doctest.h>

#include "../support.hpp"
#include "msite/config.hpp"
#include "msite/error.hpp"

using namespace msite;
using testing_support::day;

TEST_CASE("persona json validation") {
    CHECK_THROWS_AS((void)testing_support::persona({{"outing_prob", 1.5}}), Error);
    CHECK_THROWS_AS((void)testing_support::persona({{"wake", "25:00"}}), Error);
    CHECK_THROWS_AS((void)persona_from_json({{"home", {{"lat", 1}, {"lon", 1}}}}), Error);
    const auto p = testing_support::persona({{"wake", "06:30"}, {"utc_offset_min", 60}});
    CHECK(p.wake == Seconds{6 * 3600 + 1800});
    CHECK(p.offset.value == Seconds{3600});
    CHECK(p.sites.size() == 3);
    for (const auto& s : p.sites) {
        CHECK(haversine_m(s, p.home) >= 1500.0);
        CHECK(haversine_m(s, p.home) <= 5000.0);
    }
    CHECK_THROWS_AS((void)parse_personas(R"([{"participant_id":"A","home":{"lat":1,"lon":1}},
                                             {"participant_id":"A","home":{"lat":1,"lon":1}}])"),
                    Error);
    CHECK(parse_personas(R"({"personas":[{"participant_id":"A","home":{"lat":1,"lon":1}}]})").size() == 1);
}

TEST_CASE("bundled persona file matches the default cohort") {
    const auto file = parse_personas(read_file(std::filesystem::path(MSITE_DATA_DIR) / "personas.json"));
    const auto builtin = default_personas();
    REQUIRE(file.size() == builtin.size());
    for (std::size_t i = 0; i < file.size(); ++i) {
        CHECK(file[i].participant_id == builtin[i].participant_id);
        CHECK(file[i].home == builtin[i].home);
        CHECK(file[i].outing_prob == builtin[i].outing_prob);
        CHECK(file[i].answer_contextual == builtin[i].answer_contextual);
    }
}

TEST_CASE("ground truth stays partition the day") {
    const auto p = testing_support::persona({{"outing_prob", 1.0}, {"outings_max", 3}});
    for (int seed = 1; seed <= 20; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed), "unit/gt");
        const auto date = day("2026-01-07");
        const auto gt = generate_ground_truth(p, date, 0, rng);
        REQUIRE_FALSE(gt.stays.empty());
        CHECK(gt.stays.front().from == local_midnight(date, p.offset));
        CHECK(gt.stays.back().to == local_midnight(add_days(date, 1), p.offset));
        for (std::size_t i = 1; i < gt.stays.size(); ++i) CHECK(gt.stays[i].from == gt.stays[i - 1].to);
        CHECK(gt.stays.front().home);
        for (const auto& c : gt.conversations) CHECK(c.from < c.to);
    }
}

TEST_CASE("rendered traces are sorted and survive the trace format") {
    const auto p = testing_support::persona();
    Rng tr(1, "t");
    Rng nr(1, "n");
    const auto gt = generate_ground_truth(p, day("2026-01-07"), 0, tr);
    const auto recs = render_sensor_traces(gt, p, NoiseParams{}, nr);
    CHECK(std::is_sorted(recs.begin(), recs.end(),
                         [](const SensorRecord& a, const SensorRecord& b) { return a.captured_at < b.captured_at; }));
    const auto back = parse_trace(serialize_trace(recs));
    CHECK(back.errors.empty());
    CHECK(back.records.size() == recs.size());
}

TEST_CASE("true context uses the same rules as detection") {
    const auto p = testing_support::persona();
    GroundTruthDay d;
    d.date = day("2026-01-07");
    const auto m = local_midnight(d.date, p.offset);
    d.stays = {{m, m + Seconds{10 * 3600}, p.home, true, true}, {m + Seconds{10 * 3600}, m + kDay, p.home, false, true}};
    d.conversations = {{m + Seconds{11 * 3600}, m + Seconds{11 * 3600 + 59}}};
    const std::vector<GroundTruthDay> days{d};
    CHECK(true_context(days, m + Seconds{6 * 3600}, m + Seconds{12 * 3600}) ==
          SocialContext{Location::Home, Company::Alone});
    CHECK(true_context(days, m + Seconds{9 * 3600}, m + Seconds{12 * 3600}) ==
          SocialContext{Location::Away, Company::Alone});
    d.conversations[0].to += Seconds{1};
    const std::vector<GroundTruthDay> days2{d};
    CHECK(true_context(days2, m + Seconds{6 * 3600}, m + Seconds{12 * 3600}).company == Company::WithOthers);
}

TEST_CASE("simulated responses answer the script in domain") {
    const auto p = testing_support::persona({{"answer_contextual", 1.0}, {"confirm_skip", 0.0}});
    auto s = testing_support::contextual_session({Location::Away, Company::WithOthers}, Basis::Sensed);
    Rng rng(3);
    const auto answers = simulate_responses(p, s, SocialContext{Location::Away, Company::Alone}, rng);
    REQUIRE(answers);
    REQUIRE(answers->size() >= 2);
    CHECK(answers->at(0).first == "confirm");
    CHECK(std::get<std::string>(answers->at(0).second) == "No");
    CHECK(answers->at(1).first == "fallback");
    CHECK(std::get<std::string>(answers->at(1).second) == "No");
    auto t = s.delivered_at;
    for (const auto& [node, v] : *answers) s = advance(s, node, v, t += Seconds{5});
    CHECK(s.state == SessionState::Completed);

    const auto never = testing_support::persona({{"answer_contextual", 0.0}});
    CHECK_FALSE(simulate_responses(never, s, std::nullopt, rng));
}

TEST_CASE("a short study is deterministic") {
    StudyConfig sc;
    sc.seed = 21;
    sc.personas = {default_personas()[0], default_personas()[1]};
    const auto a = run_study(sc);
    const auto b = run_study(sc);
    CHECK(a.sessions == b.sessions);
    CHECK(a.confirmed.accuracy == b.confirmed.accuracy);
    REQUIRE(a.reports.size() == 2);
    CHECK(a.reports[0].adherence.delivered == 168);
    CHECK(a.history.empty());
    for (auto lag : a.max_upload_lag_s) CHECK(lag <= 600);
    for (const auto& r : a.reports) {
        for (const auto& d : r.coverage.days) {
            CHECK(d.location_h <= 24.0);
            CHECK(d.audio_h <= 24.0);
        }
        REQUIRE(r.weekly.size() == 8);
        for (const auto& w : r.weekly) CHECK(w.home_time_h <= 168.0);
    }

    sc.seed = 22;
    const auto c = run_study(sc);
    CHECK_FALSE(c.sessions == a.sessions);
}

TEST_CASE("sim config keys") {
    StudyConfig sc;
    apply_sim_config(sc, {{"sim.gps_sigma_m", 5.0}, {"sim.start", "2026-02-02"}, {"place.eps_m", 80}});
    CHECK(sc.noise.gps_sigma_m == 5.0);
    CHECK(sc.start == day("2026-02-02"));
    CHECK_THROWS_AS(apply_sim_config(sc, {{"sim.unknown", 1}}), Error);
}

TEST_CASE("bundle files") {
    StudyConfig sc;
    sc.seed = 2;
    sc.personas = {default_personas()[2]};
    const auto r = run_study(sc);
    const auto dir = std::filesystem::temp_directory_path() / "msite_unit_bundle";
    std::filesystem::remove_all(dir);
    write_bundle(r, sc, dir);
    for (const char* f : {"report.csv", "report.txt", "sessions.csv", "context.csv", "ground_truth.csv", "summary.json"}) {
        CHECK(std::filesystem::exists(dir / f));
    }
    const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
    CHECK(summary.contains("participants"));
    std::filesystem::remove_all(dir);
}
