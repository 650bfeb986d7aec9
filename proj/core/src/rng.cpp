#include "msite/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace msite {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept {
    // FNV-1a over the stream name, then mixed with the root seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : stream) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(seed) ^ h);
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit span
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t draw = 0;
    do {
        draw = engine_();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % range);
}

double Rng::normal(double mean, double sd) {
    // Box-Muller, one variate per call so the draw count is fixed.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(1.0 - uniform01()) / rate;
}

}  // namespace msite
