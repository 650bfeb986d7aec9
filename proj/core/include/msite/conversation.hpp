#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "msite/records.hpp"
#include "msite/time.hpp"

namespace msite {

/// Audio sensing schedule: `active_s` seconds of listening every `period_s`.
struct DutyCycle {
    std::int64_t period_s = 600;
    std::int64_t active_s = 60;

    [[nodiscard]] bool valid() const noexcept { return active_s > 0 && active_s <= period_s; }
};

struct AudioConfig {
    DutyCycle cycle;
    double voicing_min = 0.5;
    double energy_min_db = -40.0;
    double density_min = 0.25;
    int window_merge_gap = 1;
};

struct DutyWindow {
    std::int64_t window_id = 0;
    Timestamp start;
};

/// Stage-1 output for one duty-cycle window: one boolean per active second.
struct SpeechFlags {
    std::int64_t window_id = 0;
    std::vector<bool> flags;

    [[nodiscard]] std::size_t speech_seconds() const noexcept;
};

/// Stage-1 output with the aggregate needed for amplitude reporting.
struct WindowSpeech {
    Timestamp start;
    SpeechFlags speech;
    double speech_energy_sum_db = 0.0;  // sum of energy over flagged seconds
};

/// A detected interval of nearby conversation. Proximity only: the detector
/// cannot tell whether the participant is speaking.
struct ConversationEpisode {
    Timestamp start;
    std::int64_t duration_s = 0;
    double mean_energy_db = 0.0;
    std::int64_t first_window_id = 0;
    std::int64_t last_window_id = 0;

    [[nodiscard]] Timestamp end() const noexcept { return start + Seconds{duration_s}; }
    friend bool operator==(const ConversationEpisode&, const ConversationEpisode&) = default;
};

struct SegmentParams {
    double density_min = 0.25;
    int window_merge_gap = 1;
};

/// Windows at day_start + k * period for k in [0, 86400 / period). window_id = k.
[[nodiscard]] std::vector<DutyWindow> duty_cycle_windows(Timestamp day_start, const DutyCycle& cycle);

/// flag[t] is set iff a frame at offset second t has voicing >= voicing_min and
/// energy >= energy_min_db. Frames past `active_s` are ignored.
/// Throws MixedWindow if frames carry more than one window_id.
[[nodiscard]] SpeechFlags detect_speech(std::span<const AudioFrame> frames, double voicing_min, double energy_min_db,
                                        std::int64_t active_s = 60);

/// Stage 2. A window is positive when its speech density reaches density_min.
/// Positive windows separated by at most window_merge_gap negative or missing
/// windows form one episode spanning first start to last window end.
/// Throws UnsortedInput unless window starts strictly increase.
[[nodiscard]] std::vector<ConversationEpisode> segment_conversations(std::span<const WindowSpeech> windows,
                                                                     const SegmentParams& params,
                                                                     const DutyCycle& cycle);

/// Groups time-sorted frames into windows (start = captured_at - floor(offset_s))
/// and runs stage 1 on each.
[[nodiscard]] std::vector<WindowSpeech> detect_windows(std::span<const TimedFrame> frames, const AudioConfig& config);

/// Both stages over a participant's frames.
[[nodiscard]] std::vector<ConversationEpisode> detect_episodes(std::span<const TimedFrame> frames,
                                                               const AudioConfig& config);

}  // namespace msite
