#include "msite/place.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "msite/error.hpp"

namespace msite {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

struct CellKey {
    std::int64_t row;
    std::int64_t col;
    friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const noexcept {
        const auto h = static_cast<std::uint64_t>(k.row) * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(k.col);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

struct Cell {
    CellKey key;
    std::vector<std::size_t> points;
    std::vector<std::size_t> cores;
    std::vector<std::size_t> neighbors;  // cell indices, including self
};

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

// Grid over (lat, lon) in radians. Cell height and width are at most half the
// angular radius eps/R (shrunk slightly for rounding), so any two points in one
// cell are within eps: meridian leg R*dphi plus parallel leg R*cos(phi)*dlambda.
class Grid {
public:
    Grid(std::span<const LatLon> points, double eps_m) {
        const double angle = eps_m / kEarthRadiusM;
        const double half = angle / 2.0 * (1.0 - 1e-6);
        nrows_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(kPi / half)));
        ncols_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2.0 * kPi / half)));
        row_h_ = kPi / static_cast<double>(nrows_);
        col_w_ = 2.0 * kPi / static_cast<double>(ncols_);

        double max_abs_lat = 0.0;
        for (const auto& p : points) max_abs_lat = std::max(max_abs_lat, std::abs(p.lat) * kDegToRad);

        row_reach_ = static_cast<std::int64_t>(std::ceil(angle / row_h_)) + 1;
        // hav(dlambda) <= hav(angle) / (cos(phi1) cos(phi2)) bounds the longitude reach.
        const double cmin = std::cos(std::min(kPi / 2.0, max_abs_lat + angle));
        const double hav = std::pow(std::sin(angle / 2.0), 2);
        all_cols_ = true;
        if (cmin > 1e-9) {
            const double ratio = hav / (cmin * cmin);
            if (ratio < 1.0) {
                const double reach = 2.0 * std::asin(std::sqrt(ratio));
                col_reach_ = static_cast<std::int64_t>(std::ceil(reach / col_w_)) + 1;
                all_cols_ = 2 * col_reach_ + 1 >= ncols_;
            }
        }

        for (std::size_t i = 0; i < points.size(); ++i) {
            const CellKey key = key_of(points[i]);
            auto [it, inserted] = index_.try_emplace(key, cells_.size());
            if (inserted) cells_.push_back(Cell{key, {}, {}, {}});
            cells_[it->second].points.push_back(i);
        }
        link_neighbors();
    }

    std::vector<Cell>& cells() noexcept { return cells_; }

private:
    CellKey key_of(const LatLon& p) const {
        const double phi = p.lat * kDegToRad + kPi / 2.0;
        const double lambda = p.lon * kDegToRad + kPi;
        auto row = static_cast<std::int64_t>(std::floor(phi / row_h_));
        auto col = static_cast<std::int64_t>(std::floor(lambda / col_w_));
        row = std::clamp<std::int64_t>(row, 0, nrows_ - 1);
        col = ((col % ncols_) + ncols_) % ncols_;
        return {row, col};
    }

    void link_neighbors() {
        if (all_cols_) {
            for (auto& cell : cells_) {
                for (std::size_t j = 0; j < cells_.size(); ++j) {
                    if (std::abs(cells_[j].key.row - cell.key.row) <= row_reach_) cell.neighbors.push_back(j);
                }
            }
            return;
        }
        for (auto& cell : cells_) {
            for (std::int64_t dr = -row_reach_; dr <= row_reach_; ++dr) {
                const std::int64_t row = cell.key.row + dr;
                if (row < 0 || row >= nrows_) continue;
                for (std::int64_t dc = -col_reach_; dc <= col_reach_; ++dc) {
                    const std::int64_t col = ((cell.key.col + dc) % ncols_ + ncols_) % ncols_;
                    if (const auto it = index_.find({row, col}); it != index_.end()) {
                        cell.neighbors.push_back(it->second);
                    }
                }
            }
            std::sort(cell.neighbors.begin(), cell.neighbors.end());
        }
    }

    std::int64_t nrows_ = 1;
    std::int64_t ncols_ = 1;
    double row_h_ = kPi;
    double col_w_ = 2.0 * kPi;
    std::int64_t row_reach_ = 0;
    std::int64_t col_reach_ = 0;
    bool all_cols_ = true;
    std::vector<Cell> cells_;
    std::unordered_map<CellKey, std::size_t, CellKeyHash> index_;
};

void check_params(double eps_m, int min_pts) {
    if (!(eps_m > 0.0) || !std::isfinite(eps_m)) throw Error(ErrorCode::InvalidParams, "eps_m must be > 0");
    if (min_pts < 1) throw Error(ErrorCode::InvalidParams, "min_pts must be >= 1");
}

}  // namespace

const Place* PlaceModel::home_place() const noexcept {
    if (!home) return nullptr;
    for (const auto& p : places) {
        if (p.place_id == *home) return &p;
    }
    return nullptr;
}

std::string_view to_string(PresenceState s) noexcept {
    switch (s) {
        case PresenceState::Home: return "Home";
        case PresenceState::Away: return "Away";
        case PresenceState::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::vector<int> dbscan_labels(std::span<const LatLon> points, double eps_m, int min_pts) {
    check_params(eps_m, min_pts);
    const std::size_t n = points.size();
    std::vector<int> labels(n, -1);
    if (n == 0) return labels;

    Grid grid(points, eps_m);
    auto& cells = grid.cells();
    const auto within = [&](std::size_t a, std::size_t b) { return haversine_m(points[a], points[b]) <= eps_m; };
    const auto min_count = static_cast<std::size_t>(min_pts);

    std::vector<char> is_core(n, 0);
    for (auto& cell : cells) {
        if (cell.points.size() >= min_count) {
            for (const auto p : cell.points) is_core[p] = 1;
            continue;
        }
        for (const auto p : cell.points) {
            std::size_t count = 0;
            for (const auto c : cell.neighbors) {
                for (const auto q : cells[c].points) {
                    if (within(p, q) && ++count >= min_count) break;
                }
                if (count >= min_count) break;
            }
            if (count >= min_count) is_core[p] = 1;
        }
    }
    for (auto& cell : cells) {
        for (const auto p : cell.points) {
            if (is_core[p]) cell.cores.push_back(p);
        }
    }

    // Core points in one cell are mutually within eps, so union whole cells.
    DisjointSet sets(cells.size());
    for (std::size_t a = 0; a < cells.size(); ++a) {
        if (cells[a].cores.empty()) continue;
        for (const auto b : cells[a].neighbors) {
            if (b <= a || cells[b].cores.empty() || sets.find(a) == sets.find(b)) continue;
            bool linked = false;
            for (const auto p : cells[a].cores) {
                for (const auto q : cells[b].cores) {
                    if (within(p, q)) {
                        linked = true;
                        break;
                    }
                }
                if (linked) break;
            }
            if (linked) sets.unite(a, b);
        }
    }

    std::vector<std::size_t> cell_of(n);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (const auto p : cells[c].points) cell_of[p] = c;
    }

    // Provisional label = root cell index; renumbered below by lowest member index.
    std::vector<std::ptrdiff_t> root_of(n, -1);
    for (std::size_t p = 0; p < n; ++p) {
        if (is_core[p]) root_of[p] = static_cast<std::ptrdiff_t>(sets.find(cell_of[p]));
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (is_core[p]) continue;
        double best = std::numeric_limits<double>::infinity();
        std::ptrdiff_t best_core = -1;
        for (const auto c : cells[cell_of[p]].neighbors) {
            for (const auto q : cells[c].cores) {
                const double d = haversine_m(points[p], points[q]);
                if (d > eps_m) continue;
                if (d < best || (d == best && static_cast<std::ptrdiff_t>(q) < best_core)) {
                    best = d;
                    best_core = static_cast<std::ptrdiff_t>(q);
                }
            }
        }
        if (best_core >= 0) root_of[p] = root_of[static_cast<std::size_t>(best_core)];
    }

    std::unordered_map<std::ptrdiff_t, int> renumber;
    int next = 0;
    for (std::size_t p = 0; p < n; ++p) {
        if (root_of[p] < 0) continue;
        auto [it, inserted] = renumber.try_emplace(root_of[p], next);
        if (inserted) ++next;
        labels[p] = it->second;
    }
    return labels;
}

std::vector<Place> cluster_places(std::span<const LocationSample> samples, double eps_m, int min_pts) {
    check_params(eps_m, min_pts);
    std::vector<LatLon> points;
    points.reserve(samples.size());
    for (const auto& s : samples) points.push_back({s.lat, s.lon});
    const auto labels = dbscan_labels(points, eps_m, min_pts);

    const int count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<Place> places(static_cast<std::size_t>(std::max(count, 0)));
    for (int id = 0; id < count; ++id) places[static_cast<std::size_t>(id)].place_id = id;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        places[static_cast<std::size_t>(labels[i])].members.push_back(i);
    }
    for (auto& place : places) {
        double lat = 0.0, lon = 0.0;
        for (const auto i : place.members) {
            lat += points[i].lat;
            lon += points[i].lon;
        }
        place.member_count = static_cast<int>(place.members.size());
        place.centroid = {lat / place.member_count, lon / place.member_count};
    }
    return places;
}

std::optional<int> label_home(std::span<Place> places, std::span<const TimedLocation> samples, UtcOffset offset,
                              const PlaceConfig& config) {
    const double per_sample = static_cast<double>(config.sample_interval.count());
    for (auto& place : places) {
        std::size_t night = 0;
        for (const auto i : place.members) {
            if (i >= samples.size()) continue;
            const auto tod = local_time_of_day(samples[i].captured_at, offset);
            if (tod >= config.night_from && tod < config.night_to) ++night;
        }
        place.dwell_night_s = static_cast<double>(night) * per_sample;
    }
    const Place* best = nullptr;
    for (const auto& place : places) {
        if (place.dwell_night_s <= 0.0) continue;
        if (best == nullptr || place.dwell_night_s > best->dwell_night_s ||
            (place.dwell_night_s == best->dwell_night_s &&
             (place.member_count > best->member_count ||
              (place.member_count == best->member_count && place.place_id < best->place_id)))) {
            best = &place;
        }
    }
    if (best == nullptr) return std::nullopt;
    return best->place_id;
}

std::vector<TimedLocation> filter_accurate(std::span<const TimedLocation> samples, double max_accuracy_m) {
    std::vector<TimedLocation> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.sample.accuracy_m <= max_accuracy_m) out.push_back(s);
    }
    return out;
}

PlaceModel fit_place_model(std::span<const TimedLocation> samples, const PlaceConfig& config, UtcOffset offset) {
    const auto accurate = filter_accurate(samples, config.max_accuracy_m);
    std::vector<LocationSample> coords;
    coords.reserve(accurate.size());
    for (const auto& s : accurate) coords.push_back(s.sample);

    PlaceModel model;
    model.geofence_radius_m = config.geofence_radius_m;
    model.eps_m = config.eps_m;
    model.min_pts = config.min_pts;
    model.places = cluster_places(coords, config.eps_m, config.min_pts);
    model.home = label_home(model.places, accurate, offset, config);
    return model;
}

PresenceState classify_point(const LocationSample& s, const PlaceModel& model) {
    const Place* home = model.home_place();
    if (home == nullptr) throw Error(ErrorCode::NoHome);
    return haversine_m({s.lat, s.lon}, home->centroid) <= model.geofence_radius_m ? PresenceState::Home
                                                                                  : PresenceState::Away;
}

std::vector<HomeAwayInterval> home_away_timeline(std::span<const TimedLocation> samples, const PlaceModel& model,
                                                 Seconds gap_timeout, Seconds sample_interval) {
    if (model.home_place() == nullptr) throw Error(ErrorCode::NoHome);
    std::vector<HomeAwayInterval> out;
    const auto push = [&out](Timestamp from, Timestamp to, PresenceState state) {
        if (to <= from) return;
        if (!out.empty() && out.back().state == state && out.back().to == from) {
            out.back().to = to;
        } else {
            out.push_back({from, to, state});
        }
    };
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto state = classify_point(samples[i].sample, model);
        const auto t = samples[i].captured_at;
        if (i + 1 < samples.size()) {
            const auto next = samples[i + 1].captured_at;
            if (next - t <= gap_timeout) {
                push(t, next, state);
            } else {
                const auto held = std::min(next, t + sample_interval);
                push(t, held, state);
                push(held, next, PresenceState::Unknown);
            }
        } else {
            push(t, t + sample_interval, state);
        }
    }
    return out;
}

}  // namespace msite
