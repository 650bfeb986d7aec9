#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "msite/geo.hpp"
#include "msite/records.hpp"
#include "msite/time.hpp"

namespace msite {

struct PlaceConfig {
    double eps_m = 100.0;
    int min_pts = 5;
    double geofence_radius_m = 100.0;
    Seconds gap_timeout{30 * 60};
    double max_accuracy_m = 200.0;
    /// Nominal location sampling period; each night sample counts as this much dwell,
    /// and an isolated sample holds its state this long.
    Seconds sample_interval{300};
    Seconds night_from{2 * 3600};
    Seconds night_to{4 * 3600};
    /// History used by the nightly re-fit.
    int history_days = 14;
};

struct Place {
    int place_id = 0;
    LatLon centroid;
    int member_count = 0;
    double dwell_night_s = 0.0;
    std::vector<std::size_t> members;  // indices into the clustered sample span
};

struct PlaceModel {
    std::vector<Place> places;
    std::optional<int> home;
    double geofence_radius_m = 100.0;
    double eps_m = 100.0;
    int min_pts = 5;

    [[nodiscard]] const Place* home_place() const noexcept;
};

enum class PresenceState { Home, Away, Unknown };
[[nodiscard]] std::string_view to_string(PresenceState s) noexcept;

struct HomeAwayInterval {
    Timestamp from;
    Timestamp to;
    PresenceState state = PresenceState::Unknown;

    friend bool operator==(const HomeAwayInterval&, const HomeAwayInterval&) = default;
};

/// Density clustering with haversine distance.
///
/// A point is core when at least `min_pts` points (itself included) lie within
/// `eps_m`. Clusters are the connected components of core points; a non-core
/// point within `eps_m` of a core point joins the cluster of its nearest core
/// point (ties go to the lower index), which makes the partition independent
/// of input order. Everything else is noise.
///
/// Uses a latitude/longitude grid whose cells are small enough that any two
/// points sharing a cell are within eps, so dense cells are core without any
/// distance evaluations.
///
/// Returns one label per point: cluster index, or -1 for noise. Cluster
/// indices are ordered by each cluster's lowest member index.
[[nodiscard]] std::vector<int> dbscan_labels(std::span<const LatLon> points, double eps_m, int min_pts);

/// Places from DBSCAN labels; centroids are the arithmetic mean of member coordinates.
/// Throws InvalidParams if eps_m <= 0 or min_pts < 1.
[[nodiscard]] std::vector<Place> cluster_places(std::span<const LocationSample> samples, double eps_m, int min_pts);

/// Fills dwell_night_s for each place from its members' local time of day and
/// returns the place with the greatest night dwell. Ties: larger member_count,
/// then lower place_id. Absent when no member falls in the night window.
/// `samples` must be the span the places were clustered from.
std::optional<int> label_home(std::span<Place> places, std::span<const TimedLocation> samples, UtcOffset offset,
                              const PlaceConfig& config);

/// Drops low-accuracy fixes, clusters, and labels home.
[[nodiscard]] PlaceModel fit_place_model(std::span<const TimedLocation> samples, const PlaceConfig& config,
                                         UtcOffset offset);

[[nodiscard]] std::vector<TimedLocation> filter_accurate(std::span<const TimedLocation> samples,
                                                         double max_accuracy_m);

/// Home iff within the geofence radius of the home centroid.
[[nodiscard]] PresenceState classify_point(const LocationSample& s, const PlaceModel& model);

/// Converts time-sorted samples into maximal constant-state intervals.
///
/// A sample holds its state until the next sample when the gap is at most
/// `gap_timeout`; across a longer gap it holds for `sample_interval` and the
/// remainder is Unknown. The last sample holds for `sample_interval`.
/// Throws NoHome when the model has no home place.
[[nodiscard]] std::vector<HomeAwayInterval> home_away_timeline(std::span<const TimedLocation> samples,
                                                               const PlaceModel& model, Seconds gap_timeout,
                                                               Seconds sample_interval);

}  // namespace msite
