#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msite/engine.hpp"
#include "msite/geo.hpp"
#include "msite/rng.hpp"

namespace msite {

struct PersonaGoal {
    std::string long_term;
    std::string short_term;
    std::vector<std::string> steps;
};

struct PersonaMessage {
    MessageCategory category = MessageCategory::DefeatistChallenge;
    std::string text;
};

/// Synthetic participant. Times of day are local.
struct Persona {
    std::string participant_id;
    LatLon home;
    UtcOffset offset;
    Seconds wake{7 * 3600};
    Seconds bed{22 * 3600 + 1800};

    double outing_prob = 0.7;  // chance of leaving home on a given day
    int outings_max = 2;
    Seconds outing_min{45 * 60};
    Seconds outing_max{4 * 3600};
    std::vector<LatLon> sites;  // outing destinations; generated around home when empty

    double conv_rate_home_h = 0.1;  // Poisson rate while awake
    double conv_rate_away_h = 0.5;
    Seconds conv_min{10 * 60};
    Seconds conv_max{40 * 60};
    /// Chance of a conversation over lunch (before noon) and dinner (before 18:00).
    double meal_conv_prob = 0.3;
    double tv_prob = 0.4;  // chance of an evening of television
    /// Per-week relative growth of conversation rates and outing probability.
    double conv_growth_weekly = 0.0;
    double outing_growth_weekly = 0.0;

    double phone_carry_prob = 1.0;
    double phone_off_day_prob = 0.0;

    double answer_action_plan = 0.9;
    double answer_contextual = 0.75;
    double confirm_truthful = 1.0;
    double confirm_skip = 0.03;
    double appraisal_mean = 4.0;
    std::map<std::string, double> burst_means;  // item_id -> mean answer

    std::vector<PersonaMessage> messages;
    std::vector<PersonaGoal> goals;
};

[[nodiscard]] Persona persona_from_json(const nlohmann::json& j);
/// A JSON array of personas, or an object with a "personas" array.
[[nodiscard]] std::vector<Persona> parse_personas(std::string_view text);
/// Five personas spanning the behaviours the study described.
[[nodiscard]] std::vector<Persona> default_personas();

struct Stay {
    Timestamp from;
    Timestamp to;
    LatLon where;
    bool home = true;
    bool phone_with_participant = true;
};

struct Interval {
    Timestamp from;
    Timestamp to;
};

struct GroundTruthDay {
    LocalDate date;
    std::string participant_id;
    std::vector<Stay> stays;  // partitions the local day
    std::vector<Interval> conversations;
    std::vector<Interval> tv;
    std::optional<Timestamp> phone_off_from;

    [[nodiscard]] bool at_home(Timestamp t) const;
    [[nodiscard]] const Stay* stay_at(Timestamp t) const;
};

/// Behaviour for one day. `week` scales the persona's weekly trends.
[[nodiscard]] GroundTruthDay generate_ground_truth(const Persona& persona, LocalDate date, int week, Rng& rng);

/// What actually happened over [from, to): Home when at least half the time
/// was spent at home, WithOthers when a conversation of at least `min_conv`
/// overlapped the window.
[[nodiscard]] SocialContext true_context(std::span<const GroundTruthDay> days, Timestamp from, Timestamp to,
                                         Seconds min_conv = Seconds{60});

struct NoiseParams {
    double gps_sigma_m = 20.0;
    Seconds location_interval{300};
    /// Location sampling while the phone lies unattended at home.
    Seconds idle_location_interval{3600};
    double outlier_prob = 0.01;
    double speech_prob = 0.6;  // share of conversation seconds with voiced speech
    DutyCycle cycle;
};

/// Location fixes on a fixed grid and duty-cycled audio frames. Windows with
/// conversation or television emit a frame per second; quiet windows emit one.
/// A phone left at home reports home fixes sparsely and no audio; a phone
/// switched off reports nothing.
[[nodiscard]] std::vector<SensorRecord> render_sensor_traces(const GroundTruthDay& day, const Persona& persona,
                                                             const NoiseParams& noise, Rng& rng);

/// Answers the session would receive, in order, or nullopt when the persona
/// ignores it. `truth` is the real context for contextual sessions.
[[nodiscard]] std::optional<std::vector<std::pair<std::string, AnswerValue>>> simulate_responses(
    const Persona& persona, const EmaSession& session, const std::optional<SocialContext>& truth, Rng& rng);

struct StudyConfig {
    std::uint64_t seed = 1;
    int weeks = 8;
    LocalDate start{std::chrono::year{2026}, std::chrono::January, std::chrono::day{5}};
    std::vector<Persona> personas;
    EngineConfig engine;
    NoiseParams noise;
    bool keep_history = false;
    /// Receives each participant-day of rendered records.
    std::function<void(const std::string& participant, const std::vector<SensorRecord>&)> trace_sink;
};

struct GroundTruthScore {
    std::string session_id;
    std::string participant_id;
    SocialContext detected;
    SocialContext truth;
    Basis basis = Basis::Sensed;
    Confirmation confirmed = Confirmation::NoAnswer;
};

struct StudyResult {
    std::vector<ParticipantReport> reports;
    std::vector<GroundTruthScore> scores;
    std::map<std::string, std::vector<EmaSession>> sessions;
    std::vector<Event> history;                               // when keep_history
    std::vector<std::int64_t> max_upload_lag_s;               // per participant
    AccuracyReport confirmed;                                 // pooled over the cohort
    std::optional<double> ground_truth_accuracy;              // sensed windows only
};

/// Reads sim.* keys (gps_sigma_m, outlier_prob, speech_prob, start) into `config`.
void apply_sim_config(StudyConfig& config, const std::map<std::string, nlohmann::json>& flat);

[[nodiscard]] StudyResult run_study(const StudyConfig& config);

/// Writes report.csv, report.txt, sessions.csv, context.csv, ground_truth.csv,
/// and summary.json.
void write_bundle(const StudyResult& result, const StudyConfig& config, const std::filesystem::path& dir);

}  // namespace msite
