#include "msite/conversation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "msite/error.hpp"

namespace msite {

std::size_t SpeechFlags::speech_seconds() const noexcept {
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

std::vector<DutyWindow> duty_cycle_windows(Timestamp day_start, const DutyCycle& cycle) {
    if (!cycle.valid()) throw Error(ErrorCode::InvalidParams, "duty cycle requires 0 < active_s <= period_s");
    const std::int64_t count = kDay.count() / cycle.period_s;
    std::vector<DutyWindow> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t k = 0; k < count; ++k) out.push_back({k, day_start + Seconds{k * cycle.period_s}});
    return out;
}

SpeechFlags detect_speech(std::span<const AudioFrame> frames, double voicing_min, double energy_min_db,
                          std::int64_t active_s) {
    SpeechFlags out;
    out.flags.assign(static_cast<std::size_t>(std::max<std::int64_t>(active_s, 0)), false);
    if (frames.empty()) return out;
    out.window_id = frames.front().window_id;
    for (const auto& f : frames) {
        if (f.window_id != out.window_id) throw Error(ErrorCode::MixedWindow);
        const auto second = static_cast<std::int64_t>(std::floor(f.offset_s));
        if (second < 0 || second >= active_s) continue;
        if (f.voicing >= voicing_min && f.energy_db >= energy_min_db) out.flags[static_cast<std::size_t>(second)] = true;
    }
    return out;
}

std::vector<ConversationEpisode> segment_conversations(std::span<const WindowSpeech> windows,
                                                       const SegmentParams& params, const DutyCycle& cycle) {
    if (!cycle.valid()) throw Error(ErrorCode::InvalidParams, "invalid duty cycle");
    for (std::size_t i = 1; i < windows.size(); ++i) {
        if (windows[i].start <= windows[i - 1].start) throw Error(ErrorCode::UnsortedInput);
    }

    std::vector<ConversationEpisode> out;
    const WindowSpeech* first = nullptr;
    const WindowSpeech* last = nullptr;
    double energy_sum = 0.0;
    std::size_t speech_seconds = 0;

    const auto close = [&] {
        if (first == nullptr) return;
        ConversationEpisode e;
        e.start = first->start;
        e.duration_s = (last->start + Seconds{cycle.active_s} - first->start).count();
        e.mean_energy_db = speech_seconds > 0 ? energy_sum / static_cast<double>(speech_seconds) : 0.0;
        e.first_window_id = first->speech.window_id;
        e.last_window_id = last->speech.window_id;
        out.push_back(e);
        first = last = nullptr;
        energy_sum = 0.0;
        speech_seconds = 0;
    };

    for (const auto& w : windows) {
        const auto active = static_cast<double>(w.speech.flags.size());
        const auto seconds = w.speech.speech_seconds();
        const bool positive = active > 0 && static_cast<double>(seconds) / active >= params.density_min;
        if (!positive) continue;
        if (last != nullptr) {
            // Windows strictly between the two positives, whether negative or never recorded.
            const auto periods = (w.start - last->start).count() / cycle.period_s;
            if (periods - 1 > params.window_merge_gap) close();
        }
        if (first == nullptr) first = &w;
        last = &w;
        energy_sum += w.speech_energy_sum_db;
        speech_seconds += seconds;
    }
    close();
    return out;
}

std::vector<WindowSpeech> detect_windows(std::span<const TimedFrame> frames, const AudioConfig& config) {
    // Ordered by window start; frames of one window are contiguous after grouping.
    std::map<Timestamp, std::vector<AudioFrame>> grouped;
    for (const auto& tf : frames) {
        const auto start = tf.captured_at - Seconds{static_cast<std::int64_t>(std::floor(tf.frame.offset_s))};
        grouped[start].push_back(tf.frame);
    }
    std::vector<WindowSpeech> out;
    out.reserve(grouped.size());
    for (auto& [start, group] : grouped) {
        // Group by start time; a device restart could reuse ids, so split on id.
        std::stable_sort(group.begin(), group.end(),
                         [](const AudioFrame& a, const AudioFrame& b) { return a.window_id < b.window_id; });
        const auto id = group.front().window_id;
        std::vector<AudioFrame> same;
        for (const auto& f : group) {
            if (f.window_id == id) same.push_back(f);
        }
        WindowSpeech ws;
        ws.start = start;
        ws.speech = detect_speech(same, config.voicing_min, config.energy_min_db, config.cycle.active_s);
        std::vector<bool> counted(ws.speech.flags.size(), false);
        for (const auto& f : same) {
            const auto second = static_cast<std::int64_t>(std::floor(f.offset_s));
            if (second < 0 || second >= config.cycle.active_s) continue;
            const auto slot = static_cast<std::size_t>(second);
            if (!counted[slot] && f.voicing >= config.voicing_min && f.energy_db >= config.energy_min_db) {
                ws.speech_energy_sum_db += f.energy_db;
                counted[slot] = true;
            }
        }
        out.push_back(std::move(ws));
    }
    return out;
}

std::vector<ConversationEpisode> detect_episodes(std::span<const TimedFrame> frames, const AudioConfig& config) {
    const auto windows = detect_windows(frames, config);
    return segment_conversations(windows, {config.density_min, config.window_merge_gap}, config.cycle);
}

}  // namespace msite
