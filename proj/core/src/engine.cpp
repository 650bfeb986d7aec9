#include "msite/engine.hpp"

#include <algorithm>

#include "msite/error.hpp"

namespace msite {

void ProcessingConfig::validate() const {
    if (upload_interval <= Seconds{0} || processing_interval <= Seconds{0}) {
        throw Error(ErrorCode::InvalidConfig, "upload and processing intervals must be positive");
    }
}

UploadBatch make_batch(std::string participant_id, std::string_view trace_text, Timestamp device_sent_at,
                       Timestamp received_at) {
    UploadBatch b;
    b.participant_id = std::move(participant_id);
    b.device_sent_at = device_sent_at;
    b.received_at = received_at;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < trace_text.size()) {
        auto end = trace_text.find('\n', start);
        if (end == std::string_view::npos) end = trace_text.size();
        const auto line = trace_text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        SensorRecord r;
        std::string reason;
        bool ignored = false;
        if (!parse_record_line(line, r, reason, ignored)) {
            if (!ignored) b.malformed.push_back({line_no, reason});
            continue;
        }
        if (r.participant_id != b.participant_id) {
            b.malformed.push_back({line_no, "record for participant " + r.participant_id});
            continue;
        }
        b.records.push_back(std::move(r));
    }
    return b;
}

SocialContextWindow assess_window(std::span<const StoredRecord> records, const PlaceModel* model, Timestamp from,
                                  Timestamp to, Timestamp as_of, const EngineConfig& config) {
    std::vector<TimedLocation> locs;
    std::vector<TimedFrame> frames;
    auto it = std::lower_bound(records.begin(), records.end(), from,
                               [](const StoredRecord& r, Timestamp t) { return r.record.captured_at < t; });
    for (; it != records.end() && it->record.captured_at < to; ++it) {
        if (it->received_at > as_of) continue;
        if (const auto* loc = std::get_if<LocationSample>(&it->record.payload)) {
            if (loc->accuracy_m <= config.place.max_accuracy_m) locs.push_back({it->record.captured_at, *loc});
        } else {
            frames.push_back({it->record.captured_at, std::get<AudioFrame>(it->record.payload)});
        }
    }
    std::vector<HomeAwayInterval> timeline;
    if (model != nullptr && model->home) {
        timeline = home_away_timeline(locs, *model, config.place.gap_timeout, config.place.sample_interval);
    }
    const auto episodes = detect_episodes(frames, config.audio);
    return classify_window(timeline, episodes, from, to, config.context);
}

namespace {

struct Participant {
    Enrollment enrollment;
    std::vector<StoredRecord> records;
    std::set<std::pair<std::int64_t, std::uint64_t>> seen;
    std::optional<PlaceModel> model;
    std::optional<LocalDate> fit_date;
    std::vector<EmaSession> sessions;
    std::vector<ContextWindowRecord> windows;
    std::size_t prompts_delivered = 0;
    std::size_t first_open = 0;
    Engagement engagement;
    Rng message_rng;
    Rng wheel_rng;

    Participant(Enrollment e, std::uint64_t seed)
        : enrollment(std::move(e)),
          engagement(enrollment.participant_id),
          message_rng(seed, "messages/" + enrollment.participant_id),
          wheel_rng(seed, "wheel/" + enrollment.participant_id) {}
};

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

struct Engine::Impl {
    EngineConfig config;
    ItemBank bank;
    MessageBank messages;
    std::map<std::string, Participant> participants;
    std::map<std::string, std::pair<std::string, std::size_t>> session_index;
    std::vector<Event> events;

    void record(Event e) {
        if (config.record_history) events.push_back(std::move(e));
    }

    explicit Impl(EngineConfig c)
        : config(std::move(c)),
          bank(config.item_bank_jsonl.empty() ? default_item_bank() : parse_item_bank(config.item_bank_jsonl)),
          messages(config.seed_messages.empty() ? MessageBank(default_seed_messages())
                                                : MessageBank(parse_seed_messages(config.seed_messages))) {
        config.schedule.validate();
        config.processing.validate();
        if (!config.audio.cycle.valid()) throw Error(ErrorCode::InvalidConfig, "audio duty cycle");
    }

    Participant& get(const std::string& pid) {
        const auto it = participants.find(pid);
        if (it == participants.end()) throw Error(ErrorCode::UnknownParticipant, pid);
        return it->second;
    }
    const Participant& get(const std::string& pid) const {
        const auto it = participants.find(pid);
        if (it == participants.end()) throw Error(ErrorCode::UnknownParticipant, pid);
        return it->second;
    }

    bool refit(Participant& p, Timestamp now) {
        const auto refit_tod = config.place.night_to;
        const auto date = local_date(now - refit_tod, p.enrollment.offset);
        if (date > p.enrollment.end) return false;
        if (p.fit_date && *p.fit_date >= date) return false;
        p.fit_date = date;
        const auto at = at_local(date, refit_tod, p.enrollment.offset);
        const auto from = at - config.place.history_days * kDay;
        std::vector<TimedLocation> locs;
        auto it = std::lower_bound(p.records.begin(), p.records.end(), from,
                                   [](const StoredRecord& r, Timestamp t) { return r.record.captured_at < t; });
        for (; it != p.records.end() && it->record.captured_at < at; ++it) {
            if (it->received_at > now) continue;
            if (const auto* loc = std::get_if<LocationSample>(&it->record.payload)) {
                locs.push_back({it->record.captured_at, *loc});
            }
        }
        auto model = fit_place_model(locs, config.place, p.enrollment.offset);
        // A night without usable fixes keeps the last known home.
        if (!model.home && p.model && p.model->home) return false;
        p.model = std::move(model);
        return true;
    }

    SelectedMessage draw(Participant& p, MessageCategory c, Timestamp now) {
        return messages.select_message(p.enrollment.participant_id, c, p.message_rng, now);
    }

    std::string deliver_next(Participant& p, Timestamp now) {
        const auto day = static_cast<int>(p.prompts_delivered / 3);
        const auto slot_index = p.prompts_delivered % 3;
        const auto date = add_days(p.enrollment.start, day);
        const auto prompts = schedule_day(p.enrollment, date, config.schedule, p.enrollment.burst_on(date));
        const auto& prompt = prompts[slot_index];
        const auto& pid = p.enrollment.participant_id;
        const auto session_id = pid + "_" + format_date(date) + "_" + lower(to_string(prompt.slot));

        EmaScript script;
        std::vector<SelectedMessage> drawn;
        std::optional<SocialContextWindow> window;
        if (prompt.kind == ScriptKind::Contextual) {
            const auto w = assess_window(p.records, p.model ? &*p.model : nullptr, prompt.window->from,
                                         prompt.window->to, now, config);
            const auto category = category_for_context(w.detected);
            auto message = draw(p, category, now);
            std::optional<SelectedMessage> alternate;
            if (w.detected.location == Location::Home) {
                const auto other = category == MessageCategory::ThreatChallenge ? MessageCategory::DefeatistChallenge
                                                                                : MessageCategory::ThreatChallenge;
                alternate = draw(p, other, now);
            }
            auto savor = draw(p, MessageCategory::GoalActivityEncouragement, now);
            script = build_contextual_session(w, prompt.period_phrase, message, alternate, savor, bank, session_id);
            drawn.push_back(std::move(message));
            if (alternate) drawn.push_back(std::move(*alternate));
            drawn.push_back(std::move(savor));
            window = w;
            p.windows.push_back({session_id, w});
        } else {
            auto encouragement = draw(p, MessageCategory::SocialEncouragement, now);
            script = build_action_plan_session(bank, encouragement, session_id);
            drawn.push_back(std::move(encouragement));
        }
        if (prompt.burst) append_burst_items(script, bank.burst_items);

        auto session = deliver(session_id, prompt, std::move(script), now, config.schedule.expire_after);
        session.window = window;
        session.drawn = std::move(drawn);
        session_index[session_id] = {pid, p.sessions.size()};
        p.sessions.push_back(std::move(session));
        ++p.prompts_delivered;
        return session_id;
    }

    std::optional<Timestamp> next_fire(const Participant& p) const {
        const auto day = static_cast<int>(p.prompts_delivered / 3);
        if (day >= p.enrollment.days()) return std::nullopt;
        const auto date = add_days(p.enrollment.start, day);
        return at_local(date, config.schedule.slots[p.prompts_delivered % 3].fire_at, p.enrollment.offset);
    }
};

Engine::Engine(EngineConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Engine::Engine(Engine&&) noexcept = default;
Engine& Engine::operator=(Engine&&) noexcept = default;
Engine::~Engine() = default;

const Enrollment& Engine::enroll(Enrollment enrollment) {
    if (enrollment.participant_id.empty()) throw Error(ErrorCode::InvalidParams, "participant id");
    if (enrollment.end < enrollment.start) throw Error(ErrorCode::InvalidParams, "enrollment ends before it starts");
    if (impl_->participants.contains(enrollment.participant_id)) {
        throw Error(ErrorCode::AlreadyEnrolled, enrollment.participant_id);
    }
    impl_->record(event::Enroll{enrollment});
    const auto pid = enrollment.participant_id;
    auto [it, _] = impl_->participants.emplace(pid, Participant(std::move(enrollment), impl_->config.seed));
    return it->second.enrollment;
}

IngestAck Engine::ingest(const UploadBatch& batch) {
    auto& p = impl_->get(batch.participant_id);
    if (batch.received_at < batch.device_sent_at) throw Error(ErrorCode::InvalidRequest, "received before sent");
    for (const auto& r : batch.records) {
        if (r.participant_id != batch.participant_id) {
            throw Error(ErrorCode::InvalidRequest, "record for participant " + r.participant_id);
        }
    }
    impl_->record(event::Ingest{batch});

    IngestAck ack;
    ack.rejected = batch.malformed;
    std::vector<const SensorRecord*> order;
    order.reserve(batch.records.size());
    for (const auto& r : batch.records) order.push_back(&r);
    std::stable_sort(order.begin(), order.end(),
                     [](const SensorRecord* a, const SensorRecord* b) { return a->captured_at < b->captured_at; });
    for (const auto* r : order) {
        const auto key = std::make_pair(static_cast<std::int64_t>(r->captured_at.time_since_epoch().count()),
                                        payload_hash(r->payload));
        if (!p.seen.insert(key).second) {
            ++ack.duplicates;
            continue;
        }
        ++ack.accepted;
        StoredRecord stored{*r, batch.received_at};
        if (p.records.empty() || p.records.back().record.captured_at <= r->captured_at) {
            p.records.push_back(std::move(stored));
        } else {
            const auto pos =
                std::upper_bound(p.records.begin(), p.records.end(), r->captured_at,
                                 [](Timestamp t, const StoredRecord& s) { return t < s.record.captured_at; });
            p.records.insert(pos, std::move(stored));
        }
    }
    return ack;
}

TickDelta Engine::process_tick(Timestamp now) {
    impl_->record(event::Tick{now});
    TickDelta delta;
    delta.now = now;
    for (auto& [pid, p] : impl_->participants) {
        if (impl_->refit(p, now)) delta.refit.push_back(pid);
        for (auto fire = impl_->next_fire(p); fire && *fire <= now; fire = impl_->next_fire(p)) {
            delta.delivered.push_back(impl_->deliver_next(p, now));
        }
        for (auto i = p.first_open; i < p.sessions.size(); ++i) {
            if (expire_if_due(p.sessions[i], now)) delta.expired.push_back(p.sessions[i].session_id);
        }
        while (p.first_open < p.sessions.size() && (p.sessions[p.first_open].state == SessionState::Completed ||
                                                    p.sessions[p.first_open].state == SessionState::Expired)) {
            ++p.first_open;
        }
    }
    return delta;
}

const Message& Engine::add_message(std::optional<std::string> scope, MessageCategory category, std::string text,
                                   Timestamp at) {
    if (scope) impl_->get(*scope);
    const auto author = scope ? MessageAuthor::Therapist : MessageAuthor::Seed;
    const auto& m = impl_->messages.add_message(scope, category, text, author, at);
    impl_->record(event::AddMessage{std::move(scope), category, std::move(text), at});
    return m;
}

const EmaSession& Engine::answer(const std::string& session_id, const std::string& node_id, const AnswerValue& value,
                                 Timestamp at) {
    const auto it = impl_->session_index.find(session_id);
    if (it == impl_->session_index.end()) throw Error(ErrorCode::UnknownSession, session_id);
    auto& slot = impl_->get(it->second.first).sessions[it->second.second];
    if (slot.state == SessionState::Completed) throw Error(ErrorCode::WrongNode, session_id + " is completed");
    slot = advance(slot, node_id, value, at);
    impl_->record(event::SubmitAnswer{session_id, node_id, value, at});
    return slot;
}

const GoalNode& Engine::upsert_goal(const std::string& participant, const std::optional<std::string>& parent,
                                    GoalLevel level, std::string title, bool in_session) {
    auto& p = impl_->get(participant);
    const auto& g = p.engagement.upsert_goal_node(parent, level, title, in_session);
    impl_->record(event::UpsertGoal{participant, parent, level, std::move(title), in_session});
    return g;
}

const ActivityLog& Engine::plan_activity(const std::string& participant, const std::string& activity_id,
                                         std::string title, int anticipated) {
    auto& p = impl_->get(participant);
    const auto& a = p.engagement.plan_activity(activity_id, title, anticipated);
    impl_->record(event::PlanActivity{participant, activity_id, std::move(title), anticipated});
    return a;
}

const ActivityLog& Engine::complete_activity(const std::string& participant, const std::string& activity_id,
                                             int experienced, std::optional<SavorArtifact> savor) {
    auto& p = impl_->get(participant);
    const auto& a = p.engagement.complete_activity(activity_id, experienced, savor);
    impl_->record(event::CompleteActivity{participant, activity_id, experienced, std::move(savor)});
    return a;
}

const AwardEntry& Engine::spin(const std::string& participant, const std::string& target_id, Timestamp at) {
    auto& p = impl_->get(participant);
    // Validate before drawing so a rejected spin leaves the wheel stream untouched.
    const auto* goal = p.engagement.find_goal(target_id);
    const auto* activity = p.engagement.find_activity(target_id);
    if (goal == nullptr && activity == nullptr) throw Error(ErrorCode::UnknownTarget, target_id);
    if (goal != nullptr && goal->level != GoalLevel::Step) throw Error(ErrorCode::NotAStep, target_id);
    if (goal != nullptr && goal->status == GoalStatus::Completed) throw Error(ErrorCode::AlreadyCompleted, target_id);
    if (goal == nullptr && activity->status != ActivityStatus::Done) {
        throw Error(ErrorCode::CompleteBeforePlan, target_id);
    }
    if (goal == nullptr && activity->awarded) throw Error(ErrorCode::AlreadyCompleted, target_id);
    const auto& e = p.engagement.complete_step_and_spin(target_id, p.wheel_rng, at);
    impl_->record(event::Spin{participant, target_id, at});
    return e;
}

const EngineConfig& Engine::config() const noexcept { return impl_->config; }

std::vector<std::string> Engine::participants() const {
    std::vector<std::string> out;
    for (const auto& [pid, _] : impl_->participants) out.push_back(pid);
    return out;
}

bool Engine::enrolled(const std::string& participant) const { return impl_->participants.contains(participant); }

const Enrollment& Engine::enrollment(const std::string& participant) const {
    return impl_->get(participant).enrollment;
}

const std::vector<StoredRecord>& Engine::records(const std::string& participant) const {
    return impl_->get(participant).records;
}

const std::optional<PlaceModel>& Engine::place_model(const std::string& participant) const {
    return impl_->get(participant).model;
}

const std::vector<EmaSession>& Engine::sessions(const std::string& participant) const {
    return impl_->get(participant).sessions;
}

const EmaSession& Engine::session(const std::string& session_id) const {
    const auto it = impl_->session_index.find(session_id);
    if (it == impl_->session_index.end()) throw Error(ErrorCode::UnknownSession, session_id);
    return impl_->get(it->second.first).sessions[it->second.second];
}

const std::vector<ContextWindowRecord>& Engine::context_windows(const std::string& participant) const {
    return impl_->get(participant).windows;
}

std::vector<ContextWindowRecord> Engine::context_windows(const std::string& participant, Timestamp from,
                                                         Timestamp to) const {
    if (from > to) throw Error(ErrorCode::InvalidWindow);
    std::vector<ContextWindowRecord> out;
    for (const auto& w : impl_->get(participant).windows) {
        if (from <= w.window.from && w.window.from < to) out.push_back(w);
    }
    return out;
}

std::vector<ContextResolution> Engine::resolutions(const std::string& participant) const {
    std::vector<ContextResolution> out;
    for (const auto& s : impl_->get(participant).sessions) {
        if (auto r = resolution_of(s)) out.push_back(*r);
    }
    return out;
}

std::vector<Message> Engine::messages(const std::string& participant) const {
    impl_->get(participant);
    return impl_->messages.personalized_for(participant);
}

const MessageBank& Engine::message_bank() const noexcept { return impl_->messages; }

const Engagement& Engine::engagement(const std::string& participant) const {
    return impl_->get(participant).engagement;
}

SocialContextWindow Engine::assess(const std::string& participant, Timestamp from, Timestamp to,
                                   Timestamp as_of) const {
    const auto& p = impl_->get(participant);
    return assess_window(p.records, p.model ? &*p.model : nullptr, from, to, as_of, impl_->config);
}

ParticipantReport Engine::report(const std::string& participant) const {
    const auto& p = impl_->get(participant);
    const auto& cfg = impl_->config;
    ParticipantReport r;
    r.participant_id = participant;
    r.adherence = adherence(p.sessions);
    const auto res = resolutions(participant);
    r.accuracy = detection_accuracy(res);

    std::vector<SensorRecord> recs;
    std::vector<TimedLocation> locs;
    std::vector<TimedFrame> frames;
    recs.reserve(p.records.size());
    for (const auto& s : p.records) {
        recs.push_back(s.record);
        if (const auto* loc = std::get_if<LocationSample>(&s.record.payload)) {
            if (loc->accuracy_m <= cfg.place.max_accuracy_m) locs.push_back({s.record.captured_at, *loc});
        } else {
            frames.push_back({s.record.captured_at, std::get<AudioFrame>(s.record.payload)});
        }
    }
    CoverageParams cov;
    cov.cycle = cfg.audio.cycle;
    r.coverage = coverage(recs, p.enrollment.start, p.enrollment.end, p.enrollment.offset, cov);

    const auto episodes = detect_episodes(frames, cfg.audio);
    std::vector<HomeAwayInterval> timeline;
    if (p.model && p.model->home) {
        timeline = home_away_timeline(locs, *p.model, cfg.place.gap_timeout, cfg.place.sample_interval);
    }
    const int weeks = (p.enrollment.days() + 6) / 7;
    r.weekly = weekly_aggregate(episodes, timeline, p.enrollment.start, p.enrollment.offset, weeks);

    std::map<int, std::vector<BurstAnswer>> by_week;
    std::vector<SelectedMessage> shown;
    for (const auto& s : p.sessions) {
        for (auto& a : burst_answers(s)) by_week[days_between(p.enrollment.start, s.date) / 7].push_back(a);
        for (auto& m : shown_messages(s)) shown.push_back(m);
    }
    for (const auto& [week, answers] : by_week) r.burst.push_back(burst_summary(answers, participant, week));
    std::vector<SelectedMessage> personalized;
    for (const auto& m : shown) {
        if (m.pool == MessagePool::Personalized) personalized.push_back(m);
    }
    r.messages_shown = static_cast<std::int64_t>(shown.size());
    r.personalized_shown = static_cast<std::int64_t>(personalized.size());
    r.message_mix_all = message_mix(shown);
    r.message_mix_personalized = message_mix(personalized);
    r.goals = static_cast<std::int64_t>(p.engagement.goals().size());
    r.activities = static_cast<std::int64_t>(p.engagement.activities().size());
    r.diamonds = p.engagement.ledger().total;
    return r;
}

const std::vector<Event>& Engine::events() const noexcept { return impl_->events; }

void Engine::apply(const Event& e) {
    std::visit(
        [this](const auto& ev) {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, event::Enroll>) {
                enroll(ev.enrollment);
            } else if constexpr (std::is_same_v<T, event::Ingest>) {
                ingest(ev.batch);
            } else if constexpr (std::is_same_v<T, event::AddMessage>) {
                add_message(ev.scope, ev.category, ev.text, ev.at);
            } else if constexpr (std::is_same_v<T, event::SubmitAnswer>) {
                answer(ev.session_id, ev.node_id, ev.value, ev.at);
            } else if constexpr (std::is_same_v<T, event::UpsertGoal>) {
                upsert_goal(ev.participant_id, ev.parent, ev.level, ev.title, ev.in_session);
            } else if constexpr (std::is_same_v<T, event::PlanActivity>) {
                plan_activity(ev.participant_id, ev.activity_id, ev.title, ev.anticipated);
            } else if constexpr (std::is_same_v<T, event::CompleteActivity>) {
                complete_activity(ev.participant_id, ev.activity_id, ev.experienced, ev.savor);
            } else if constexpr (std::is_same_v<T, event::Spin>) {
                spin(ev.participant_id, ev.target_id, ev.at);
            } else {
                process_tick(ev.now);
            }
        },
        e);
}

Engine Engine::replay(EngineConfig config, std::span<const Event> history) {
    Engine engine(std::move(config));
    for (const auto& e : history) engine.apply(e);
    return engine;
}

}  // namespace msite
