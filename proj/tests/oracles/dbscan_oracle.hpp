#pragma once

// Quadratic DBSCAN over raw coordinates, written without the library's grid.

#include <cmath>
#include <map>
#include <vector>

namespace oracle {

struct Pt {
    double lat;
    double lon;
};

inline double dist_m(Pt a, Pt b) {
    constexpr double r = 6371000.0;
    constexpr double rad = 3.14159265358979323846 / 180.0;
    const double dlat = (b.lat - a.lat) * rad;
    const double dlon = (b.lon - a.lon) * rad;
    const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(a.lat * rad) * std::cos(b.lat * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2 * r * std::asin(std::sqrt(std::min(1.0, h)));
}

/// Labels, -1 noise. Border points take the cluster of their nearest core
/// neighbour, lower index on ties.
inline std::vector<int> dbscan(const std::vector<Pt>& pts, double eps, int min_pts) {
    const int n = static_cast<int>(pts.size());
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d[i][j] = dist_m(pts[i], pts[j]);
    std::vector<bool> core(n);
    for (int i = 0; i < n; ++i) {
        int c = 0;
        for (int j = 0; j < n; ++j) c += d[i][j] <= eps;
        core[i] = c >= min_pts;
    }
    std::vector<int> label(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (!core[i] || label[i] != -1) continue;
        std::vector<int> stack{i};
        label[i] = next;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            for (int q = 0; q < n; ++q) {
                if (core[q] && label[q] == -1 && d[p][q] <= eps) {
                    label[q] = next;
                    stack.push_back(q);
                }
            }
        }
        ++next;
    }
    for (int i = 0; i < n; ++i) {
        if (core[i]) continue;
        int best = -1;
        for (int j = 0; j < n; ++j) {
            if (core[j] && d[i][j] <= eps && (best == -1 || d[i][j] < d[i][best])) best = j;
        }
        if (best != -1) label[i] = label[best];
    }
    return label;
}

/// Renumbers labels by first appearance so partitions compare directly.
inline std::vector<int> canonical(const std::vector<int>& labels) {
    std::map<int, int> m;
    std::vector<int> out;
    for (int l : labels) {
        if (l < 0) {
            out.push_back(-1);
            continue;
        }
        auto it = m.find(l);
        if (it == m.end()) it = m.emplace(l, static_cast<int>(m.size())).first;
        out.push_back(it->second);
    }
    return out;
}

}  // namespace oracle
