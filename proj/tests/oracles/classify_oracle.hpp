#pragma once

// Second-by-second recomputation of a window's context.

#include <cstdint>
#include <vector>

namespace oracle {

struct Span {
    std::int64_t from;
    std::int64_t to;
    int state;  // 0 home, 1 away, 2 unknown
};

struct Ep {
    std::int64_t start;
    std::int64_t duration;
};

struct Verdict {
    bool home;
    bool with_others;
    bool insufficient;
    std::int64_t home_s;
    std::int64_t away_s;
};

inline Verdict classify(const std::vector<Span>& timeline, const std::vector<Ep>& eps, std::int64_t from,
                        std::int64_t to, double home_threshold, std::int64_t min_conv, double max_unknown) {
    std::int64_t home = 0, away = 0;
    for (std::int64_t s = from; s < to; ++s) {
        for (const auto& sp : timeline) {
            if (sp.from <= s && s < sp.to) {
                home += sp.state == 0;
                away += sp.state == 1;
                break;
            }
        }
    }
    bool others = false;
    for (const auto& e : eps) {
        if (e.duration < min_conv) continue;
        for (std::int64_t s = e.start; s < e.start + e.duration; ++s) {
            if (from <= s && s < to) {
                others = true;
                break;
            }
        }
    }
    const std::int64_t len = to - from;
    const std::int64_t unknown = len - home - away;
    const bool is_home = home + away > 0 && static_cast<double>(home) >= home_threshold * static_cast<double>(home + away);
    return {is_home, others, static_cast<double>(unknown) > max_unknown * static_cast<double>(len), home, away};
}

}  // namespace oracle
