#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "msite/time.hpp"

namespace msite {

/// GPS fix. Coordinates in degrees.
struct LocationSample {
    double lat = 0.0;
    double lon = 0.0;
    double accuracy_m = 0.0;

    friend bool operator==(const LocationSample&, const LocationSample&) = default;
};

/// One second of on-device audio inference output inside a duty-cycle window.
/// Holds derived features only; there is no field that could carry waveform data.
struct AudioFrame {
    std::int64_t window_id = 0;
    double offset_s = 0.0;  // [0, 60)
    double energy_db = 0.0;
    double voicing = 0.0;  // [0, 1]

    friend bool operator==(const AudioFrame&, const AudioFrame&) = default;
};

using Payload = std::variant<LocationSample, AudioFrame>;

struct SensorRecord {
    std::string participant_id;
    Timestamp captured_at;
    Payload payload;

    friend bool operator==(const SensorRecord&, const SensorRecord&) = default;
};

struct TimedLocation {
    Timestamp captured_at;
    LocationSample sample;
};

struct TimedFrame {
    Timestamp captured_at;
    AudioFrame frame;
};

[[nodiscard]] bool is_location(const SensorRecord& r) noexcept;
[[nodiscard]] bool is_audio(const SensorRecord& r) noexcept;

/// Location records of `records`, in input order.
[[nodiscard]] std::vector<TimedLocation> locations_of(const std::vector<SensorRecord>& records);
[[nodiscard]] std::vector<TimedFrame> frames_of(const std::vector<SensorRecord>& records);

/// Stable content hash of a payload (FNV-1a over the serialized fields).
[[nodiscard]] std::uint64_t payload_hash(const Payload& p) noexcept;

}  // namespace msite
