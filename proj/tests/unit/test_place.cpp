#include <algorithm>
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "../oracles/dbscan_oracle.hpp"
#include "../support.hpp"
#include "msite/error.hpp"
#include "msite/place.hpp"

using namespace msite;
using testing_support::ts;

namespace {

const LatLon kHome{34.05, -118.25};

TimedLocation at(const std::string& iso, LatLon p, double acc = 10.0) {
    return {ts(iso), {p.lat, p.lon, acc}};
}

PlaceModel home_model(double radius = 100.0) {
    PlaceModel m;
    m.places.push_back({0, kHome, 10, 3600.0, {}});
    m.home = 0;
    m.geofence_radius_m = radius;
    return m;
}

}  // namespace

TEST_CASE("dbscan matches the brute-force partition on small random sets") {
    Rng rng(99, "unit/dbscan");
    for (int inst = 0; inst < 200; ++inst) {
        const double eps = rng.uniform(10, 200);
        const int min_pts = static_cast<int>(rng.uniform_int(1, 6));
        const int n = static_cast<int>(rng.uniform_int(0, 60));
        std::vector<LatLon> pts;
        std::vector<oracle::Pt> raw;
        for (int i = 0; i < n; ++i) {
            const auto p = offset_m(kHome, rng.uniform(-600, 600), rng.uniform(-600, 600));
            pts.push_back(p);
            raw.push_back({p.lat, p.lon});
        }
        CHECK(oracle::canonical(dbscan_labels(pts, eps, min_pts)) ==
              oracle::canonical(oracle::dbscan(raw, eps, min_pts)));
    }
}

TEST_CASE("dbscan partition does not depend on input order") {
    Rng rng(3, "unit/order");
    std::vector<LatLon> pts;
    for (int i = 0; i < 80; ++i) pts.push_back(offset_m(kHome, rng.normal(0, 120), rng.normal(0, 120)));
    const auto base = dbscan_labels(pts, 60, 4);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::vector<LatLon> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);
    const auto other = dbscan_labels(shuffled, 60, 4);
    // Same grouping: two points share a cluster in one run iff they do in the other.
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK((base[i] < 0) == (other[pts.size() - 1 - i] < 0));
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (base[i] < 0 || base[j] < 0) continue;
            CHECK((base[i] == base[j]) == (other[pts.size() - 1 - i] == other[pts.size() - 1 - j]));
        }
    }
}

TEST_CASE("cluster_places validates parameters") {
    std::vector<LocationSample> s{{1, 1, 1}};
    CHECK_THROWS_AS((void)cluster_places(s, 0.0, 5), Error);
    CHECK_THROWS_AS((void)cluster_places(s, 100.0, 0), Error);
    CHECK(cluster_places({}, 100.0, 5).empty());
}

TEST_CASE("home is the place with the most night dwell") {
    const UtcOffset off{Seconds{0}};
    const auto work = offset_m(kHome, 3000, 0);
    std::vector<TimedLocation> s;
    // Busy daytime cluster at work, fewer points at home but all at night.
    for (int i = 0; i < 40; ++i) s.push_back({ts("2026-01-05T12:00:00Z") + Seconds{i * 60}, {work.lat, work.lon, 5}});
    for (int i = 0; i < 10; ++i) s.push_back({ts("2026-01-05T02:00:00Z") + Seconds{i * 600}, {kHome.lat, kHome.lon, 5}});
    const auto model = fit_place_model(s, PlaceConfig{}, off);
    REQUIRE(model.home_place() != nullptr);
    CHECK(haversine_m(model.home_place()->centroid, kHome) < 1.0);
    CHECK(model.places.size() == 2);
}

TEST_CASE("no night samples means no home") {
    std::vector<TimedLocation> s;
    for (int i = 0; i < 10; ++i) s.push_back({ts("2026-01-05T12:00:00Z") + Seconds{i * 60}, {kHome.lat, kHome.lon, 5}});
    const auto model = fit_place_model(s, PlaceConfig{}, UtcOffset{});
    CHECK_FALSE(model.home.has_value());
    CHECK_THROWS_AS((void)home_away_timeline(s, model, Seconds{1800}, Seconds{300}), Error);
}

TEST_CASE("inaccurate fixes are dropped before clustering") {
    std::vector<TimedLocation> s{at("2026-01-05T02:00:00Z", kHome, 5), at("2026-01-05T02:05:00Z", kHome, 500)};
    CHECK(filter_accurate(s, 200.0).size() == 1);
    CHECK(filter_accurate(s, 500.0).size() == 2);
}

TEST_CASE("geofence is inclusive at the radius") {
    const auto m = home_model(100.0);
    const auto edge = offset_m(kHome, 100.0, 0.0);
    const double d = haversine_m(kHome, edge);
    auto exact = home_model(d);
    CHECK(classify_point({edge.lat, edge.lon, 5}, exact) == PresenceState::Home);
    exact.geofence_radius_m = std::nextafter(d, 0.0);
    CHECK(classify_point({edge.lat, edge.lon, 5}, exact) == PresenceState::Away);
    const auto far = offset_m(kHome, 150.0, 0.0);
    CHECK(classify_point({far.lat, far.lon, 5}, m) == PresenceState::Away);
}

TEST_CASE("timeline holds across short gaps and goes unknown across long ones") {
    const auto m = home_model();
    const auto away = offset_m(kHome, 2000, 0);
    std::vector<TimedLocation> s{
        at("2026-01-05T10:00:00Z", kHome),
        at("2026-01-05T10:20:00Z", kHome),   // 20 min later: held
        at("2026-01-05T11:30:00Z", away),    // 70 min later: gap
        at("2026-01-05T11:35:00Z", away),
    };
    const auto tl = home_away_timeline(s, m, Seconds{1800}, Seconds{300});
    const std::vector<HomeAwayInterval> want{
        {ts("2026-01-05T10:00:00Z"), ts("2026-01-05T10:25:00Z"), PresenceState::Home},
        {ts("2026-01-05T10:25:00Z"), ts("2026-01-05T11:30:00Z"), PresenceState::Unknown},
        {ts("2026-01-05T11:30:00Z"), ts("2026-01-05T11:40:00Z"), PresenceState::Away},
    };
    CHECK(tl == want);
    CHECK(home_away_timeline({}, m, Seconds{1800}, Seconds{300}).empty());
}
