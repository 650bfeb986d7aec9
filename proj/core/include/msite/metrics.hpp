#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "msite/context.hpp"
#include "msite/conversation.hpp"
#include "msite/ema.hpp"
#include "msite/message_bank.hpp"
#include "msite/place.hpp"
#include "msite/records.hpp"

namespace msite {

struct KindAdherence {
    std::int64_t delivered = 0;
    std::int64_t answered = 0;
    double rate = 0.0;
};

struct AdherenceReport {
    std::int64_t delivered = 0;
    std::int64_t answered = 0;
    double rate = 0.0;
    std::map<ScriptKind, KindAdherence> by_kind;
    /// Share of answered sessions per kind.
    std::map<ScriptKind, double> answered_mix;
};

/// answered = Completed sessions; the denominator includes expired ones.
[[nodiscard]] AdherenceReport adherence(std::span<const EmaSession> sessions);

struct AccuracyReport {
    std::int64_t confirmed_yes = 0;
    std::int64_t confirmed_no = 0;
    std::int64_t excluded_no_answer = 0;
    std::optional<double> accuracy;  // absent when no Yes or No
};

[[nodiscard]] AccuracyReport detection_accuracy(std::span<const ContextResolution> resolutions);

struct DayCoverage {
    LocalDate date;
    double location_h = 0.0;
    double audio_h = 0.0;
};

struct CoverageReport {
    std::vector<DayCoverage> days;
    double target_hours = 18.0;
    std::int64_t days_at_target = 0;
    double fraction_days_at_target = 0.0;
};

struct CoverageParams {
    Seconds location_gap{600};  // a fix covers the time to the next fix, up to this
    DutyCycle cycle;
    double target_hours = 18.0;
};

/// Per local day: union of time covered by location fixes and by duty-cycle
/// windows holding at least one audio frame. A day meets the target when both
/// reach target_hours.
[[nodiscard]] CoverageReport coverage(std::span<const SensorRecord> records, LocalDate first, LocalDate last,
                                      UtcOffset offset, const CoverageParams& params = {});

struct WeeklyAggregate {
    int week_index = 0;
    std::int64_t conversation_count = 0;
    double home_time_h = 0.0;
};

/// Study weeks from `start` (local midnight). Episodes count in the week they start.
[[nodiscard]] std::vector<WeeklyAggregate> weekly_aggregate(std::span<const ConversationEpisode> episodes,
                                                            std::span<const HomeAwayInterval> timeline,
                                                            LocalDate start, UtcOffset offset, int weeks);

struct BurstItemMean {
    std::string item_id;
    double mean = 0.0;
    std::int64_t n = 0;
};

struct BurstSummary {
    std::string participant_id;
    int time_point = 0;  // study week
    std::vector<BurstItemMean> items;  // sorted by item_id
};

[[nodiscard]] BurstSummary burst_summary(std::span<const BurstAnswer> answers, std::string participant_id,
                                         int time_point);

/// Fraction of log entries per category; empty for an empty log.
[[nodiscard]] std::map<MessageCategory, double> message_mix(std::span<const MessageCategory> log);
[[nodiscard]] std::map<MessageCategory, double> message_mix(std::span<const SelectedMessage> log);

struct ParticipantReport {
    std::string participant_id;
    AdherenceReport adherence;
    AccuracyReport accuracy;
    CoverageReport coverage;
    std::vector<WeeklyAggregate> weekly;
    std::vector<BurstSummary> burst;
    std::int64_t messages_shown = 0;
    std::int64_t personalized_shown = 0;
    std::map<MessageCategory, double> message_mix_all;
    std::map<MessageCategory, double> message_mix_personalized;
    std::int64_t goals = 0;
    std::int64_t activities = 0;
    std::int64_t diamonds = 0;
};

[[nodiscard]] nlohmann::json to_json(const ParticipantReport& r);
/// Aligned text tables.
[[nodiscard]] std::string render_text(const ParticipantReport& r);
/// `participant_id,section,key,value` rows.
[[nodiscard]] std::string render_csv(std::span<const ParticipantReport> reports);
/// Fixed six-decimal rendering used in every report output.
[[nodiscard]] std::string format_fixed(double v, int decimals = 6);

}  // namespace msite
