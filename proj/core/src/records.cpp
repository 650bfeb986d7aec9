#include "msite/records.hpp"

#include <bit>
#include <cstring>

namespace msite {

namespace {

struct Fnv {
    std::uint64_t h = 0xcbf29ce484222325ULL;

    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    }
    void f64(double v) {
        // Normalize -0.0 so equal payloads hash equally.
        if (v == 0.0) v = 0.0;
        const auto bits = std::bit_cast<std::uint64_t>(v);
        bytes(&bits, sizeof bits);
    }
    void i64(std::int64_t v) { bytes(&v, sizeof v); }
};

}  // namespace

bool is_location(const SensorRecord& r) noexcept { return std::holds_alternative<LocationSample>(r.payload); }
bool is_audio(const SensorRecord& r) noexcept { return std::holds_alternative<AudioFrame>(r.payload); }

std::vector<TimedLocation> locations_of(const std::vector<SensorRecord>& records) {
    std::vector<TimedLocation> out;
    for (const auto& r : records) {
        if (const auto* s = std::get_if<LocationSample>(&r.payload)) out.push_back({r.captured_at, *s});
    }
    return out;
}

std::vector<TimedFrame> frames_of(const std::vector<SensorRecord>& records) {
    std::vector<TimedFrame> out;
    for (const auto& r : records) {
        if (const auto* f = std::get_if<AudioFrame>(&r.payload)) out.push_back({r.captured_at, *f});
    }
    return out;
}

std::uint64_t payload_hash(const Payload& p) noexcept {
    Fnv fnv;
    if (const auto* s = std::get_if<LocationSample>(&p)) {
        fnv.i64(1);
        fnv.f64(s->lat);
        fnv.f64(s->lon);
        fnv.f64(s->accuracy_m);
    } else {
        const auto& f = std::get<AudioFrame>(p);
        fnv.i64(2);
        fnv.i64(f.window_id);
        fnv.f64(f.offset_s);
        fnv.f64(f.energy_db);
        fnv.f64(f.voicing);
    }
    return fnv.h;
}

}  // namespace msite
