#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "msite/config.hpp"
#include "msite/error.hpp"
#include "msite/simulator.hpp"

namespace msite {

namespace {

enum class Kind { Render = 0, Upload = 1, Tick = 2, Answer = 3 };

struct Pending {
    Timestamp at;
    Kind kind;
    std::uint64_t seq;
    std::size_t who;
    bool operator>(const Pending& o) const {
        if (at != o.at) return at > o.at;
        if (kind != o.kind) return kind > o.kind;
        return seq > o.seq;
    }
};

struct Runtime {
    const Persona* persona = nullptr;
    std::vector<GroundTruthDay> days;  // from the run-in day onward
    std::vector<SensorRecord> buffer;
    std::size_t cursor = 0;
    Seconds upload_phase{0};
    std::int64_t max_lag_s = 0;
    LocalDate first_day;
    int day_index = 0;
};

struct Reply {
    std::string session_id;
    std::vector<std::pair<std::string, AnswerValue>> answers;
};

Timestamp ceil_to(Timestamp t, Seconds step, Seconds phase) {
    const auto rel = t.time_since_epoch() - phase;
    auto k = rel / step;
    if (k * step < rel) ++k;
    return Timestamp{k * step + phase};
}

std::span<const GroundTruthDay> days_around(const Runtime& rt, LocalDate date) {
    const auto i = days_between(rt.first_day, date);
    if (i < 0 || i >= static_cast<int>(rt.days.size())) return {};
    const auto lo = static_cast<std::size_t>(std::max(0, i - 1));
    const auto hi = std::min(rt.days.size(), static_cast<std::size_t>(i) + 2);
    return std::span<const GroundTruthDay>(rt.days).subspan(lo, hi - lo);
}

void engage(Engine& engine, const EmaSession& s, std::uint64_t seed, Timestamp at) {
    const auto choice = action_plan_choice(s);
    if (!choice) return;
    const auto& pid = s.participant_id;
    Rng rng(seed, "engage/" + s.session_id);
    if (choice->kind == ActionPlanChoiceKind::GoalStep) {
        for (const auto& g : engine.engagement(pid).goals()) {
            if (g.level == GoalLevel::Step && g.status == GoalStatus::Open) {
                engine.spin(pid, g.goal_id, at);
                return;
            }
        }
    } else if (choice->kind == ActionPlanChoiceKind::FunActivityOutOfHome) {
        const auto id = "act-" + format_date(s.date);
        const auto rating = [&](double mean) {
            return static_cast<int>(std::clamp<long long>(std::llround(rng.normal(mean, 1.0)), 1, 7));
        };
        engine.plan_activity(pid, id, "Fun activity out of home", rating(3.5));
        engine.complete_activity(pid, id, rating(5.0), SavorArtifact{SavorArtifact::Kind::Text, "Went out"});
        engine.spin(pid, id, at);
    }
}

}  // namespace

void apply_sim_config(StudyConfig& config, const std::map<std::string, nlohmann::json>& flat) {
    for (const auto& [key, value] : flat) {
        if (key.rfind("sim.", 0) != 0) continue;
        try {
            if (key == "sim.gps_sigma_m") {
                config.noise.gps_sigma_m = value.get<double>();
            } else if (key == "sim.outlier_prob") {
                config.noise.outlier_prob = value.get<double>();
            } else if (key == "sim.speech_prob") {
                config.noise.speech_prob = value.get<double>();
            } else if (key == "sim.start") {
                const auto d = parse_date(value.get<std::string>());
                if (!d) throw Error(ErrorCode::InvalidConfig, key + ": expected YYYY-MM-DD");
                config.start = *d;
            } else {
                throw Error(ErrorCode::InvalidConfig, "unknown key " + key);
            }
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::InvalidConfig, key + ": " + ex.what());
        }
    }
    if (config.noise.gps_sigma_m < 0 || config.noise.outlier_prob < 0 || config.noise.outlier_prob > 1 ||
        config.noise.speech_prob < 0 || config.noise.speech_prob > 1) {
        throw Error(ErrorCode::InvalidConfig, "sim noise parameters out of range");
    }
}

StudyResult run_study(const StudyConfig& config) {
    if (config.weeks <= 0) throw Error(ErrorCode::InvalidConfig, "weeks must be positive");
    if (config.personas.empty()) throw Error(ErrorCode::InvalidConfig, "no personas");

    EngineConfig ec = config.engine;
    ec.seed = config.seed;
    ec.record_history = config.keep_history;
    NoiseParams noise = config.noise;
    noise.cycle = ec.audio.cycle;
    Engine engine(ec);

    const auto upload = ec.processing.upload_interval;
    const auto period = ec.processing.processing_interval;
    const auto end = add_days(config.start, config.weeks * 7 - 1);
    const std::vector<int> bursts = config.weeks > 1 ? std::vector<int>{0, config.weeks - 1} : std::vector<int>{0};

    std::vector<Runtime> rts(config.personas.size());
    Timestamp t0 = Timestamp::max();
    Timestamp t_end = Timestamp::min();
    for (std::size_t i = 0; i < rts.size(); ++i) {
        const auto& p = config.personas[i];
        auto& rt = rts[i];
        rt.persona = &p;
        rt.first_day = add_days(config.start, -1);
        Rng phase(config.seed, "upload-phase/" + p.participant_id);
        rt.upload_phase = Seconds{phase.uniform_int(0, 599)};
        engine.enroll({p.participant_id, config.start, end, p.offset, bursts});
        t0 = std::min(t0, local_midnight(rt.first_day, p.offset));
        t_end = std::max(t_end, local_midnight(add_days(end, 1), p.offset));
    }
    t_end += ec.schedule.expire_after + kHour;

    for (const auto& p : config.personas) {
        for (const auto& m : p.messages) engine.add_message(p.participant_id, m.category, m.text, t0);
        for (const auto& g : p.goals) {
            const auto& lt = engine.upsert_goal(p.participant_id, std::nullopt, GoalLevel::LongTerm, g.long_term);
            const auto lt_id = lt.goal_id;
            const auto& st = engine.upsert_goal(p.participant_id, lt_id, GoalLevel::ShortTerm, g.short_term);
            const auto st_id = st.goal_id;
            for (const auto& step : g.steps) engine.upsert_goal(p.participant_id, st_id, GoalLevel::Step, step);
        }
    }

    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
    std::uint64_t seq = 0;
    std::map<std::uint64_t, Reply> replies;
    for (std::size_t i = 0; i < rts.size(); ++i) {
        queue.push({local_midnight(rts[i].first_day, rts[i].persona->offset), Kind::Render, seq++, i});
        queue.push({ceil_to(t0, upload, rts[i].upload_phase), Kind::Upload, seq++, i});
    }
    queue.push({ceil_to(t0, period, Seconds{0}), Kind::Tick, seq++, 0});

    std::map<std::string, std::size_t> owner;
    for (std::size_t i = 0; i < rts.size(); ++i) owner[config.personas[i].participant_id] = i;

    while (!queue.empty()) {
        const auto ev = queue.top();
        queue.pop();
        if (ev.at > t_end) break;
        switch (ev.kind) {
            case Kind::Render: {
                auto& rt = rts[ev.who];
                const auto& p = *rt.persona;
                const auto date = add_days(rt.first_day, rt.day_index);
                if (date > end) break;
                const int week = std::max(0, days_between(config.start, date) / 7);
                const auto tag = p.participant_id + "/" + format_date(date);
                Rng truth_rng(config.seed, "truth/" + tag);
                rt.days.push_back(generate_ground_truth(p, date, week, truth_rng));
                Rng noise_rng(config.seed, "noise/" + tag);
                auto recs = render_sensor_traces(rt.days.back(), p, noise, noise_rng);
                if (config.trace_sink) config.trace_sink(p.participant_id, recs);
                rt.buffer.erase(rt.buffer.begin(), rt.buffer.begin() + static_cast<std::ptrdiff_t>(rt.cursor));
                rt.cursor = 0;
                rt.buffer.insert(rt.buffer.end(), std::make_move_iterator(recs.begin()),
                                 std::make_move_iterator(recs.end()));
                ++rt.day_index;
                queue.push({local_midnight(add_days(rt.first_day, rt.day_index), p.offset), Kind::Render, seq++,
                            ev.who});
                break;
            }
            case Kind::Upload: {
                auto& rt = rts[ev.who];
                UploadBatch batch;
                batch.participant_id = rt.persona->participant_id;
                batch.device_sent_at = ev.at;
                batch.received_at = ev.at;
                while (rt.cursor < rt.buffer.size() && rt.buffer[rt.cursor].captured_at <= ev.at) {
                    rt.max_lag_s = std::max(rt.max_lag_s, (ev.at - rt.buffer[rt.cursor].captured_at).count());
                    batch.records.push_back(rt.buffer[rt.cursor++]);
                }
                if (!batch.records.empty()) engine.ingest(batch);
                queue.push({ev.at + upload, Kind::Upload, seq++, ev.who});
                break;
            }
            case Kind::Tick: {
                const auto delta = engine.process_tick(ev.at);
                for (const auto& sid : delta.delivered) {
                    const auto& s = engine.session(sid);
                    const auto who = owner.at(s.participant_id);
                    const auto& rt = rts[who];
                    std::optional<SocialContext> truth;
                    if (s.window) truth = true_context(days_around(rt, s.date), s.window->from, s.window->to);
                    Rng rng(config.seed, "respond/" + sid);
                    auto answers = simulate_responses(*rt.persona, s, truth, rng);
                    if (!answers) continue;
                    Rng delay(config.seed, "delay/" + sid);
                    const auto at = s.delivered_at + Seconds{delay.uniform_int(60, 7200)};
                    replies[seq] = {sid, std::move(*answers)};
                    queue.push({at, Kind::Answer, seq++, who});
                }
                queue.push({ev.at + period, Kind::Tick, seq++, 0});
                break;
            }
            case Kind::Answer: {
                auto node = replies.extract(ev.seq);
                const auto& reply = node.mapped();
                auto at = ev.at;
                for (const auto& [node_id, value] : reply.answers) {
                    engine.answer(reply.session_id, node_id, value, at);
                    at += Seconds{5};
                }
                const auto& s = engine.session(reply.session_id);
                if (s.kind() == ScriptKind::ActionPlan) engage(engine, s, config.seed, at);
                break;
            }
        }
    }

    StudyResult result;
    std::vector<ContextResolution> pooled;
    std::int64_t sensed = 0;
    std::int64_t sensed_match = 0;
    for (std::size_t i = 0; i < rts.size(); ++i) {
        const auto& pid = config.personas[i].participant_id;
        result.reports.push_back(engine.report(pid));
        result.max_upload_lag_s.push_back(rts[i].max_lag_s);
        const auto& sessions = engine.sessions(pid);
        result.sessions[pid] = sessions;
        for (const auto& s : sessions) {
            if (!s.window) continue;
            GroundTruthScore g;
            g.session_id = s.session_id;
            g.participant_id = pid;
            g.detected = s.window->detected;
            g.truth = true_context(days_around(rts[i], s.date), s.window->from, s.window->to);
            g.basis = s.window->basis;
            g.confirmed = confirmation_of(s);
            if (g.basis == Basis::Sensed) {
                ++sensed;
                if (g.detected == g.truth) ++sensed_match;
            }
            result.scores.push_back(g);
        }
        const auto res = engine.resolutions(pid);
        pooled.insert(pooled.end(), res.begin(), res.end());
    }
    result.confirmed = detection_accuracy(pooled);
    if (sensed > 0) result.ground_truth_accuracy = static_cast<double>(sensed_match) / static_cast<double>(sensed);
    if (config.keep_history) result.history = engine.events();
    return result;
}

void write_bundle(const StudyResult& result, const StudyConfig& config, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto& proc = config.engine.processing;
    const auto acc = [](const std::optional<double>& v) { return v ? format_fixed(*v) : std::string("n/a"); };

    write_file(dir / "report.csv", render_csv(result.reports));

    std::ostringstream txt;
    txt << "seed " << config.seed << ", " << config.weeks << " weeks from " << format_date(config.start)
        << ", upload every " << proc.upload_interval.count() / 60 << " min, processing every "
        << proc.processing_interval.count() / 60 << " min\n";
    txt << "cohort confirmed accuracy " << acc(result.confirmed.accuracy) << " (yes " << result.confirmed.confirmed_yes
        << ", no " << result.confirmed.confirmed_no << ", no answer " << result.confirmed.excluded_no_answer << ")\n";
    txt << "ground-truth accuracy " << acc(result.ground_truth_accuracy) << "\n\n";
    for (const auto& r : result.reports) txt << render_text(r) << "\n";
    write_file(dir / "report.txt", txt.str());

    std::ostringstream sessions;
    sessions << "session_id,participant_id,kind,date,slot,delivered_at,state,answers,detected,basis\n";
    for (const auto& [pid, list] : result.sessions) {
        for (const auto& s : list) {
            sessions << s.session_id << ',' << pid << ',' << to_string(s.kind()) << ',' << format_date(s.date) << ','
                     << to_string(s.slot) << ',' << format_iso8601(s.delivered_at) << ',' << to_string(s.state) << ','
                     << s.answers.size() << ',' << (s.window ? to_string(s.window->detected) : std::string()) << ','
                     << (s.window ? std::string(to_string(s.window->basis)) : std::string()) << '\n';
        }
    }
    write_file(dir / "sessions.csv", sessions.str());

    std::ostringstream context;
    context << "session_id,participant_id,window_from,window_to,detected,home_fraction,episodes,basis,confirmed,"
               "effective\n";
    for (const auto& [pid, list] : result.sessions) {
        for (const auto& s : list) {
            if (!s.window) continue;
            const auto& w = *s.window;
            const auto res = resolution_of(s);
            context << s.session_id << ',' << pid << ',' << format_iso8601(w.from) << ',' << format_iso8601(w.to)
                    << ',' << to_string(w.detected) << ',' << format_fixed(w.home_fraction) << ','
                    << w.episode_count << ',' << to_string(w.basis) << ',' << to_string(confirmation_of(s)) << ','
                    << (res ? to_string(res->effective) : std::string()) << '\n';
        }
    }
    write_file(dir / "context.csv", context.str());

    std::ostringstream truth;
    truth << "session_id,participant_id,basis,detected,truth,match,confirmed\n";
    for (const auto& g : result.scores) {
        truth << g.session_id << ',' << g.participant_id << ',' << to_string(g.basis) << ',' << to_string(g.detected)
              << ',' << to_string(g.truth) << ',' << (g.detected == g.truth ? 1 : 0) << ','
              << to_string(g.confirmed) << '\n';
    }
    write_file(dir / "ground_truth.csv", truth.str());

    nlohmann::json summary;
    summary["seed"] = config.seed;
    summary["weeks"] = config.weeks;
    summary["start"] = format_date(config.start);
    summary["upload_interval_min"] = proc.upload_interval.count() / 60;
    summary["processing_interval_min"] = proc.processing_interval.count() / 60;
    summary["confirmed_accuracy"] = result.confirmed.accuracy ? nlohmann::json(format_fixed(*result.confirmed.accuracy))
                                                              : nlohmann::json(nullptr);
    summary["confirmed_yes"] = result.confirmed.confirmed_yes;
    summary["confirmed_no"] = result.confirmed.confirmed_no;
    summary["no_answer"] = result.confirmed.excluded_no_answer;
    summary["ground_truth_accuracy"] = result.ground_truth_accuracy
                                           ? nlohmann::json(format_fixed(*result.ground_truth_accuracy))
                                           : nlohmann::json(nullptr);
    summary["max_upload_lag_s"] = result.max_upload_lag_s;
    summary["participants"] = nlohmann::json::array();
    for (const auto& r : result.reports) summary["participants"].push_back(to_json(r));
    write_file(dir / "summary.json", summary.dump(2) + "\n");
}

}  // namespace msite
