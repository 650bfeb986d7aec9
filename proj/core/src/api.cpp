#include "msite/api.hpp"

#include <fstream>
#include <mutex>
#include <shared_mutex>

#include "msite/config.hpp"
#include "msite/error.hpp"

namespace msite {

namespace {

using nlohmann::json;

struct HttpError {
    int status;
    std::string code;
    std::string detail;
};

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto end = path.find('/', start);
        if (end == std::string_view::npos) end = path.size();
        if (end > start) parts.emplace_back(path.substr(start, end - start));
        start = end + 1;
    }
    return parts;
}

json parse_body(const std::string& body) {
    if (body.empty()) return json::object();
    try {
        auto j = json::parse(body);
        if (!j.is_object()) throw Error(ErrorCode::InvalidRequest, "body must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidRequest, std::string("malformed JSON: ") + e.what());
    }
}

template <typename T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::InvalidRequest, std::string("missing field ") + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidRequest, std::string("bad field ") + key);
    }
}

std::optional<std::string> opt_field(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return field<std::string>(j, key);
}

Timestamp ts_field(const json& j, const char* key) {
    const auto t = parse_iso8601(field<std::string>(j, key));
    if (!t) throw Error(ErrorCode::InvalidRequest, std::string("bad timestamp in ") + key);
    return *t;
}

Timestamp ts_or(const json& j, const char* key, Timestamp fallback) {
    return j.contains(key) && !j.at(key).is_null() ? ts_field(j, key) : fallback;
}

Timestamp ts_query(const std::map<std::string, std::string>& q, const std::string& key) {
    const auto it = q.find(key);
    if (it == q.end()) throw Error(ErrorCode::InvalidRequest, "missing query parameter " + key);
    const auto t = parse_iso8601(it->second);
    if (!t) throw Error(ErrorCode::InvalidRequest, "bad timestamp in " + key);
    return *t;
}

MessageCategory category_field(const json& j) {
    const auto c = parse_category(field<std::string>(j, "category"));
    if (!c) throw Error(ErrorCode::InvalidRequest, "unknown category");
    return *c;
}

json message_json(const Message& m) {
    return {{"message_id", m.message_id},
            {"participant_scope", m.participant_scope ? json(*m.participant_scope) : json(nullptr)},
            {"category", to_string(m.category)},
            {"text", m.text},
            {"created_by", m.created_by == MessageAuthor::Therapist ? "Therapist" : "Seed"},
            {"created_at", format_iso8601(m.created_at)}};
}

json enrollment_json(const Enrollment& e) {
    return {{"participant_id", e.participant_id},
            {"start", format_date(e.start)},
            {"end", format_date(e.end)},
            {"utc_offset_min", e.offset.value.count() / 60},
            {"burst_weeks", e.burst_weeks}};
}

json goal_json(const GoalNode& g) {
    return {{"goal_id", g.goal_id},
            {"parent", g.parent ? json(*g.parent) : json(nullptr)},
            {"level", to_string(g.level)},
            {"title", g.title},
            {"status", to_string(g.status)},
            {"created_in_session", g.created_in_session}};
}

json activity_json(const ActivityLog& a) {
    json j{{"activity_id", a.activity_id},
           {"title", a.title},
           {"anticipated_pleasure", a.anticipated_pleasure},
           {"experienced_pleasure", a.experienced_pleasure ? json(*a.experienced_pleasure) : json(nullptr)},
           {"status", to_string(a.status)},
           {"savor", nullptr}};
    if (a.savor_artifact) {
        j["savor"] = {{"kind", a.savor_artifact->kind == SavorArtifact::Kind::Text ? "text" : "photo"},
                      {"value", a.savor_artifact->value}};
    }
    return j;
}

json award_json(const AwardEntry& e) {
    return {{"earned_at", format_iso8601(e.earned_at)},
            {"source", to_string(e.source)},
            {"target_id", e.target_id},
            {"diamonds", e.diamonds}};
}

json context_json(const SocialContextWindow& w) {
    return {{"from", format_iso8601(w.from)},
            {"to", format_iso8601(w.to)},
            {"detected", to_string(w.detected)},
            {"home_fraction", w.home_fraction},
            {"episode_count", w.episode_count},
            {"basis", to_string(w.basis)}};
}

json answer_value_json(const AnswerValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    return std::get<std::string>(v);
}

}  // namespace

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnknownParticipant:
        case ErrorCode::UnknownSession:
        case ErrorCode::UnknownTarget: return 404;
        case ErrorCode::SessionExpired: return 410;
        case ErrorCode::WrongNode:
        case ErrorCode::AlreadyCompleted:
        case ErrorCode::AlreadyEnrolled: return 409;
        case ErrorCode::InactiveParticipant:
        case ErrorCode::EmptyGenericPool:
        case ErrorCode::InvalidConfig: return 500;
        default: return 400;
    }
}

json window_json(const ContextWindowRecord& w) {
    auto j = context_json(w.window);
    j["session_id"] = w.session_id;
    return j;
}

json session_json(const EmaSession& s) {
    json nodes = json::array();
    for (const auto& n : s.script.nodes) {
        json node{{"node_id", n.node_id}, {"prompt", n.prompt}, {"role", n.role}};
        switch (n.answer.type) {
            case AnswerType::Choice: node["answer"] = {{"type", "choice"}, {"options", n.answer.options}}; break;
            case AnswerType::Slider:
                node["answer"] = {{"type", "slider"}, {"min", n.answer.min}, {"max", n.answer.max}};
                break;
            case AnswerType::Minutes:
                node["answer"] = {{"type", "minutes"}, {"min", n.answer.min}, {"max", n.answer.max}};
                break;
            case AnswerType::FreeText: node["answer"] = {{"type", "text"}}; break;
            case AnswerType::PhotoRef: node["answer"] = {{"type", "photo"}}; break;
            case AnswerType::TextOrPhoto: node["answer"] = {{"type", "text_or_photo"}}; break;
        }
        node["branches"] = n.branches;
        node["next"] = n.next ? json(*n.next) : json(nullptr);
        if (n.message_id) node["message_id"] = *n.message_id;
        nodes.push_back(std::move(node));
    }
    json answers = json::array();
    for (const auto& a : s.answers) {
        answers.push_back({{"node_id", a.node_id},
                           {"value", answer_value_json(a.value)},
                           {"answered_at", format_iso8601(a.answered_at)}});
    }
    const auto current = s.current_node();
    json j{{"session_id", s.session_id},
           {"participant_id", s.participant_id},
           {"script_id", s.script.script_id},
           {"kind", to_string(s.kind())},
           {"slot", to_string(s.slot)},
           {"date", format_date(s.date)},
           {"delivered_at", format_iso8601(s.delivered_at)},
           {"expires_at", format_iso8601(s.expires_at)},
           {"state", to_string(s.state)},
           {"current_node", current ? json(*current) : json(nullptr)},
           {"nodes", nodes},
           {"answers", answers},
           {"context", s.window ? context_json(*s.window) : json(nullptr)},
           {"resolution", nullptr}};
    if (const auto r = resolution_of(s)) {
        j["resolution"] = {{"detected", to_string(r->detected)},
                           {"confirmed", to_string(r->confirmed)},
                           {"corrected_company", r->corrected_company ? json(to_string(*r->corrected_company))
                                                                      : json(nullptr)},
                           {"effective", to_string(r->effective)}};
    }
    return j;
}

struct Api::Impl {
    Engine engine;
    Clock clock;
    std::optional<std::filesystem::path> log_path;
    std::size_t logged = 0;
    mutable std::shared_mutex mutex;

    Impl(EngineConfig config, Clock c, std::optional<std::filesystem::path> path)
        : engine(std::move(config)), clock(std::move(c)), log_path(std::move(path)) {
        if (log_path && std::filesystem::exists(*log_path)) {
            for (const auto& e : parse_event_log(read_file(*log_path))) engine.apply(e);
        }
        logged = engine.events().size();
    }

    void flush() {
        const auto& events = engine.events();
        if (log_path && logged < events.size()) {
            std::ofstream out(*log_path, std::ios::app | std::ios::binary);
            for (auto i = logged; i < events.size(); ++i) out << serialize_event(events[i]) << '\n';
        }
        logged = events.size();
    }

    template <typename Fn>
    auto write(Fn&& fn) {
        std::unique_lock lock(mutex);
        struct Flush {
            Impl* self;
            ~Flush() { self->flush(); }
        } guard{this};
        return fn(engine);
    }

    template <typename Fn>
    auto read(Fn&& fn) const {
        std::shared_lock lock(mutex);
        return fn(engine);
    }

    ApiResponse route(const ApiRequest& req);
};

ApiResponse Api::Impl::route(const ApiRequest& req) {
    const auto parts = split_path(req.path);
    const auto& m = req.method;
    const auto n = parts.size();
    const auto not_found = ApiResponse{404, {{"error", "NotFound"}, {"detail", req.path}}};
    if (n < 2 || parts[0] != "v1") return not_found;

    if (n == 2 && parts[1] == "health" && m == "GET") return {200, {{"status", "ok"}}};

    if (n == 2 && parts[1] == "participants") {
        if (m == "GET") {
            return read([](const Engine& e) {
                json list = json::array();
                for (const auto& pid : e.participants()) list.push_back(enrollment_json(e.enrollment(pid)));
                return ApiResponse{200, list};
            });
        }
        if (m == "POST") {
            const auto body = parse_body(req.body);
            Enrollment en;
            en.participant_id = field<std::string>(body, "participant_id");
            const auto start = parse_date(field<std::string>(body, "start"));
            const auto end = parse_date(field<std::string>(body, "end"));
            if (!start || !end) throw Error(ErrorCode::InvalidRequest, "bad start or end date");
            en.start = *start;
            en.end = *end;
            en.offset = UtcOffset{Seconds{body.value("utc_offset_min", 0) * 60}};
            if (body.contains("burst_weeks")) en.burst_weeks = field<std::vector<int>>(body, "burst_weeks");
            return write([&](Engine& e) { return ApiResponse{201, enrollment_json(e.enroll(std::move(en)))}; });
        }
    }

    if (n == 2 && parts[1] == "ingest" && m == "POST") {
        const auto body = parse_body(req.body);
        const auto pid = field<std::string>(body, "participant_id");
        const auto now = clock();
        const auto sent = ts_or(body, "device_sent_at", now);
        const auto received = ts_or(body, "received_at", now);
        std::string text;
        if (body.contains("lines")) {
            for (const auto& l : field<std::vector<std::string>>(body, "lines")) text += l + "\n";
        } else {
            text = field<std::string>(body, "trace");
        }
        auto batch = make_batch(pid, text, sent, received);
        return write([&](Engine& e) {
            const auto ack = e.ingest(batch);
            json rejected = json::array();
            for (const auto& r : ack.rejected) rejected.push_back({{"line_no", r.line_no}, {"reason", r.reason}});
            return ApiResponse{200, {{"accepted", ack.accepted}, {"duplicates", ack.duplicates}, {"rejected", rejected}}};
        });
    }

    if (n == 2 && parts[1] == "messages" && m == "POST") {
        const auto body = parse_body(req.body);
        const auto category = category_field(body);
        auto text = field<std::string>(body, "text");
        const auto at = ts_or(body, "created_at", clock());
        return write([&](Engine& e) {
            return ApiResponse{201, message_json(e.add_message(std::nullopt, category, std::move(text), at))};
        });
    }

    if (n == 2 && parts[1] == "ticks" && m == "POST") {
        const auto body = parse_body(req.body);
        const auto now = ts_or(body, "now", clock());
        return write([&](Engine& e) {
            const auto d = e.process_tick(now);
            return ApiResponse{200,
                               {{"now", format_iso8601(d.now)},
                                {"refit", d.refit},
                                {"delivered", d.delivered},
                                {"expired", d.expired}}};
        });
    }

    if (n >= 3 && parts[1] == "sessions") {
        const auto& sid = parts[2];
        if (n == 3 && m == "GET") {
            return read([&](const Engine& e) { return ApiResponse{200, session_json(e.session(sid))}; });
        }
        if (n == 4 && parts[3] == "answers" && m == "POST") {
            const auto body = parse_body(req.body);
            const auto node = field<std::string>(body, "node_id");
            if (!body.contains("value")) throw Error(ErrorCode::InvalidRequest, "missing field value");
            const auto& v = body.at("value");
            AnswerValue value;
            if (v.is_number_integer()) value = v.get<std::int64_t>();
            else if (v.is_string()) value = v.get<std::string>();
            else throw Error(ErrorCode::ValueOutOfDomain, "value must be an integer or a string");
            const auto at = ts_or(body, "answered_at", clock());
            return write([&](Engine& e) { return ApiResponse{200, session_json(e.answer(sid, node, value, at))}; });
        }
    }

    if (n == 4 && parts[1] == "participants") {
        const auto& pid = parts[2];
        const auto& what = parts[3];
        if (m == "GET") {
            return read([&](const Engine& e) -> ApiResponse {
                if (what == "context") {
                    json list = json::array();
                    for (const auto& w : e.context_windows(pid, ts_query(req.query, "from"), ts_query(req.query, "to"))) {
                        list.push_back(window_json(w));
                    }
                    return {200, list};
                }
                if (what == "sessions") {
                    json list = json::array();
                    for (const auto& s : e.sessions(pid)) list.push_back(session_json(s));
                    return {200, list};
                }
                if (what == "messages") {
                    json list = json::array();
                    for (const auto& msg : e.messages(pid)) list.push_back(message_json(msg));
                    return {200, list};
                }
                if (what == "goals") {
                    json list = json::array();
                    for (const auto& g : e.engagement(pid).goals()) list.push_back(goal_json(g));
                    return {200, list};
                }
                if (what == "activities") {
                    json list = json::array();
                    for (const auto& a : e.engagement(pid).activities()) list.push_back(activity_json(a));
                    return {200, list};
                }
                if (what == "awards") {
                    const auto& ledger = e.engagement(pid).ledger();
                    json entries = json::array();
                    for (const auto& a : ledger.entries) entries.push_back(award_json(a));
                    return {200, {{"participant_id", pid}, {"total", ledger.total}, {"entries", entries}}};
                }
                if (what == "report") return {200, to_json(e.report(pid))};
                return {404, {{"error", "NotFound"}, {"detail", req.path}}};
            });
        }
        if (m == "POST") {
            const auto body = parse_body(req.body);
            if (what == "messages") {
                const auto category = category_field(body);
                auto text = field<std::string>(body, "text");
                const auto at = ts_or(body, "created_at", clock());
                return write([&](Engine& e) {
                    return ApiResponse{201, message_json(e.add_message(pid, category, std::move(text), at))};
                });
            }
            if (what == "goals") {
                const auto level = parse_goal_level(field<std::string>(body, "level"));
                if (!level) throw Error(ErrorCode::InvalidRequest, "unknown level");
                const auto parent = opt_field(body, "parent");
                auto title = field<std::string>(body, "title");
                const bool in_session = body.value("in_session", false);
                return write([&](Engine& e) {
                    return ApiResponse{201, goal_json(e.upsert_goal(pid, parent, *level, std::move(title), in_session))};
                });
            }
            if (what == "activities") {
                const auto id = field<std::string>(body, "activity_id");
                const auto phase = field<std::string>(body, "phase");
                if (phase == "plan") {
                    auto title = body.value("title", std::string{});
                    const auto anticipated = field<int>(body, "anticipated");
                    return write([&](Engine& e) {
                        return ApiResponse{200, activity_json(e.plan_activity(pid, id, std::move(title), anticipated))};
                    });
                }
                if (phase == "complete") {
                    const auto experienced = field<int>(body, "experienced");
                    std::optional<SavorArtifact> savor;
                    if (body.contains("savor") && !body.at("savor").is_null()) {
                        const auto& s = body.at("savor");
                        savor = SavorArtifact{field<std::string>(s, "kind") == "photo" ? SavorArtifact::Kind::PhotoRef
                                                                                        : SavorArtifact::Kind::Text,
                                              field<std::string>(s, "value")};
                    }
                    return write([&](Engine& e) {
                        return ApiResponse{200, activity_json(e.complete_activity(pid, id, experienced, savor))};
                    });
                }
                throw Error(ErrorCode::InvalidRequest, "phase must be plan or complete");
            }
            if (what == "awards") {
                const auto target = field<std::string>(body, "target_id");
                const auto at = ts_or(body, "at", clock());
                return write([&](Engine& e) { return ApiResponse{201, award_json(e.spin(pid, target, at))}; });
            }
        }
    }
    return not_found;
}

Api::Api(EngineConfig config, Clock clock, std::optional<std::filesystem::path> log_path)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(clock), std::move(log_path))) {}

Api::~Api() = default;

ApiResponse Api::handle(const ApiRequest& request) {
    try {
        return impl_->route(request);
    } catch (const Error& e) {
        return {http_status(e.code()), {{"error", to_string(e.code())}, {"detail", e.what()}}};
    }
}

TickDelta Api::tick() { return tick(impl_->clock()); }

TickDelta Api::tick(Timestamp now) {
    return impl_->write([&](Engine& e) { return e.process_tick(now); });
}

void Api::read(const std::function<void(const Engine&)>& fn) const {
    impl_->read([&](const Engine& e) {
        fn(e);
        return 0;
    });
}

}  // namespace msite
