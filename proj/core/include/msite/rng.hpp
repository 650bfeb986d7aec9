#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace msite {

/// Mixes a root seed with a stream name so each component draws from its own
/// sub-stream; adding draws in one component never shifts another.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept;

/// Seeded generator with platform-independent sampling.
///
/// std::mt19937_64's output sequence is fixed by the standard, but the
/// standard distributions are not, so all variates are derived here from raw
/// 64-bit draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, std::string_view stream) : engine_(derive_seed(seed, stream)) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1) with 53 bits of precision.
    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform01() < p; }
    double normal(double mean, double sd);
    double exponential(double rate);

private:
    std::mt19937_64 engine_;
};

}  // namespace msite
