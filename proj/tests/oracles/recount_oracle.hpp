#pragma once

// Naive counting used to check metrics.

#include <cstddef>
#include <map>
#include <vector>

namespace oracle {

template <class T>
std::map<T, double> shares(const std::vector<T>& xs) {
    std::map<T, std::size_t> c;
    for (const auto& x : xs) ++c[x];
    std::map<T, double> out;
    for (const auto& [k, v] : c) out[k] = static_cast<double>(v) / static_cast<double>(xs.size());
    return out;
}

inline double mean(const std::vector<long long>& xs) {
    long long s = 0;
    for (auto x : xs) s += x;
    return static_cast<double>(s) / static_cast<double>(xs.size());
}

}  // namespace oracle
