#include <doctest.h>

#include "../support.hpp"
#include "msite/error.hpp"
#include "msite/geo.hpp"
#include "msite/trace.hpp"

using namespace msite;
using testing_support::day;
using testing_support::ts;

TEST_CASE("iso timestamps round-trip and reject fractions") {
    const auto t = ts("2024-03-05T12:00:00Z");
    CHECK(format_iso8601(t) == "2024-03-05T12:00:00Z");
    CHECK(parse_iso8601("2024-03-05T12:00:00+00:00") == t);
    CHECK_FALSE(parse_iso8601("2024-03-05T12:00:00.5Z"));
    CHECK_FALSE(parse_iso8601("2024-02-30T00:00:00Z"));
    CHECK_FALSE(parse_iso8601("yesterday"));
}

TEST_CASE("local dates follow the fixed offset") {
    const UtcOffset la{Seconds{-8 * 3600}};
    const auto t = ts("2026-01-06T05:00:00Z");
    CHECK(format_date(local_date(t, la)) == "2026-01-05");
    CHECK(local_time_of_day(t, la) == Seconds{21 * 3600});
    CHECK(local_midnight(day("2026-01-05"), la) == ts("2026-01-05T08:00:00Z"));
    CHECK(at_local(day("2026-01-05"), Seconds{12 * 3600}, la) == ts("2026-01-05T20:00:00Z"));
    CHECK(days_between(day("2026-01-05"), day("2026-03-01")) == 55);
    CHECK(add_days(day("2026-02-28"), 1) == day("2026-03-01"));
}

TEST_CASE("windows are half-open") {
    const TimeWindow w{ts("2026-01-05T06:00:00Z"), ts("2026-01-05T12:00:00Z")};
    CHECK(w.contains(w.from));
    CHECK_FALSE(w.contains(w.to));
    CHECK(w.length() == Seconds{6 * 3600});
    CHECK(overlap(w.from, w.to, w.to, w.to + kHour) == Seconds{0});
    CHECK(overlap(w.from, w.to, w.from - kHour, w.from + kHour) == kHour);
}

TEST_CASE("rng streams are reproducible and independent") {
    Rng a(42, "x");
    Rng b(42, "x");
    Rng c(42, "y");
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next();
        CHECK(va == b.next());
        differs |= va != c.next();
    }
    CHECK(differs);

    Rng r(1);
    double sum = 0;
    for (int i = 0; i < 20000; ++i) {
        const auto k = r.uniform_int(1, 5);
        CHECK(k >= 1);
        CHECK(k <= 5);
        const double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += r.normal(3.0, 1.0);
    }
    CHECK(sum / 20000 == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("haversine and offsets agree") {
    const LatLon a{34.0689, -118.4452};
    CHECK(haversine_m(a, a) == 0.0);
    const auto b = offset_m(a, 300.0, 400.0);
    CHECK(haversine_m(a, b) == doctest::Approx(500.0).epsilon(0.002));
    // One degree of latitude.
    CHECK(haversine_m({0, 0}, {1, 0}) == doctest::Approx(111195.0).epsilon(0.001));
}

TEST_CASE("trace parsing is lenient and reports line numbers") {
    const std::string text =
        "# comment\n"
        "P1,2026-01-05T10:00:00Z,LOC,34.05,-118.25,12\n"
        "P1,2026-01-05T10:00:01Z,AUD,3,1,-25.5,0.8\n"
        "P1,2026-01-05T10:00:02Z,LOC,95,0,5\n"
        "P1,not-a-time,LOC,1,2,3\n"
        "P1,2026-01-05T10:00:03Z,OTHER,whatever\n"
        "\n"
        "P1,2026-01-05T09:00:00Z,AUD,3,61,-20,0.5\n";
    const auto parsed = parse_trace_lenient(text);
    REQUIRE(parsed.records.size() == 2);
    CHECK(parsed.records[0].captured_at == ts("2026-01-05T10:00:00Z"));
    CHECK(std::get<AudioFrame>(parsed.records[1].payload).voicing == 0.8);
    REQUIRE(parsed.errors.size() == 3);
    CHECK(parsed.errors[0].line_no == 4);
    CHECK(parsed.errors[0].reason == "out-of-range latitude");
    CHECK(parsed.errors[1].line_no == 5);
    CHECK(parsed.errors[2].line_no == 8);
    CHECK(parsed.ignored == 3);
}

TEST_CASE("trace parse throws only when nothing is valid") {
    CHECK_NOTHROW((void)parse_trace("# nothing here\n"));
    try {
        (void)parse_trace("garbage\nmore garbage\n");
        FAIL("expected NoValidRecords");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoValidRecords);
    }
}

TEST_CASE("serialize then parse is the identity") {
    std::vector<SensorRecord> recs{
        {"A", ts("2026-01-05T10:00:00Z"), LocationSample{34.0512345, -118.2412345, 7.5}},
        {"A", ts("2026-01-05T10:00:01Z"), AudioFrame{12, 1.0, -31.25, 0.625}},
        {"B", ts("2026-01-05T09:00:00Z"), LocationSample{-33.9, 151.2, 20}},
    };
    sort_records(recs);
    const auto back = parse_trace(serialize_trace(recs));
    CHECK(back.records == recs);
    CHECK(back.errors.empty());
}

TEST_CASE("slice keeps [from, to) and rejects inverted windows") {
    std::vector<SensorRecord> recs;
    for (int i = 0; i < 10; ++i) {
        recs.push_back({"A", ts("2026-01-05T10:00:00Z") + Seconds{i * 60}, LocationSample{1, 1, 1}});
    }
    const auto s = slice(recs, recs[2].captured_at, recs[5].captured_at);
    CHECK(s.size() == 3);
    CHECK_THROWS_AS((void)slice(recs, recs[5].captured_at, recs[2].captured_at), Error);
    CHECK(slice(recs, recs[5].captured_at, recs[5].captured_at).empty());
}

TEST_CASE("payload hash depends on content only") {
    const Payload a = LocationSample{1, 2, 3};
    const Payload b = LocationSample{1, 2, 3};
    const Payload c = LocationSample{1, 2, 4};
    CHECK(payload_hash(a) == payload_hash(b));
    CHECK(payload_hash(a) != payload_hash(c));
    CHECK(payload_hash(Payload{AudioFrame{1, 0, -20, 0.5}}) != payload_hash(Payload{AudioFrame{1, 1, -20, 0.5}}));
}
