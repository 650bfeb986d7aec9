#pragma once

// Run-merging over a dense slot sequence: 1 positive, 0 negative, -1 missing.

#include <vector>

namespace oracle {

struct Run {
    int first;
    int last;
};

inline std::vector<Run> merge_runs(const std::vector<int>& slots, int gap) {
    std::vector<Run> runs;
    const int n = static_cast<int>(slots.size());
    int i = 0;
    while (i < n) {
        if (slots[i] != 1) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < n && slots[j + 1] == 1) ++j;
        runs.push_back({i, j});
        i = j + 1;
    }
    std::vector<Run> out;
    for (const auto& r : runs) {
        if (!out.empty() && r.first - out.back().last - 1 <= gap) {
            out.back().last = r.last;
        } else {
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace oracle
