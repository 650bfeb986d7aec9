#include <nlohmann/json.hpp>

#include "msite/engine.hpp"
#include "msite/error.hpp"

namespace msite {

namespace {

using nlohmann::json;

std::string ts(Timestamp t) { return format_iso8601(t); }

Timestamp parse_ts(const json& j) {
    const auto t = parse_iso8601(j.get<std::string>());
    if (!t) throw Error(ErrorCode::InvalidRequest, "bad timestamp " + j.get<std::string>());
    return *t;
}

LocalDate parse_day(const json& j) {
    const auto d = parse_date(j.get<std::string>());
    if (!d) throw Error(ErrorCode::InvalidRequest, "bad date " + j.get<std::string>());
    return *d;
}

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> opt_string(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

json value_json(const AnswerValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    return std::get<std::string>(v);
}

AnswerValue parse_value(const json& j) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_string()) return j.get<std::string>();
    throw Error(ErrorCode::InvalidRequest, "answer value must be an integer or a string");
}

}  // namespace

std::string serialize_event(const Event& e) {
    json j = std::visit(
        [](const auto& ev) -> json {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, event::Enroll>) {
                const auto& en = ev.enrollment;
                return {{"type", "enroll"},
                        {"participant_id", en.participant_id},
                        {"start", format_date(en.start)},
                        {"end", format_date(en.end)},
                        {"utc_offset_s", en.offset.value.count()},
                        {"burst_weeks", en.burst_weeks}};
            } else if constexpr (std::is_same_v<T, event::Ingest>) {
                json lines = json::array();
                for (const auto& r : ev.batch.records) lines.push_back(format_record(r));
                json bad = json::array();
                for (const auto& m : ev.batch.malformed) bad.push_back({{"line_no", m.line_no}, {"reason", m.reason}});
                return {{"type", "ingest"},
                        {"participant_id", ev.batch.participant_id},
                        {"device_sent_at", ts(ev.batch.device_sent_at)},
                        {"received_at", ts(ev.batch.received_at)},
                        {"lines", lines},
                        {"malformed", bad}};
            } else if constexpr (std::is_same_v<T, event::AddMessage>) {
                return {{"type", "message"},
                        {"scope", opt(ev.scope)},
                        {"category", to_string(ev.category)},
                        {"text", ev.text},
                        {"at", ts(ev.at)}};
            } else if constexpr (std::is_same_v<T, event::SubmitAnswer>) {
                return {{"type", "answer"},
                        {"session_id", ev.session_id},
                        {"node_id", ev.node_id},
                        {"value", value_json(ev.value)},
                        {"at", ts(ev.at)}};
            } else if constexpr (std::is_same_v<T, event::UpsertGoal>) {
                return {{"type", "goal"},
                        {"participant_id", ev.participant_id},
                        {"parent", opt(ev.parent)},
                        {"level", to_string(ev.level)},
                        {"title", ev.title},
                        {"in_session", ev.in_session}};
            } else if constexpr (std::is_same_v<T, event::PlanActivity>) {
                return {{"type", "activity_plan"},
                        {"participant_id", ev.participant_id},
                        {"activity_id", ev.activity_id},
                        {"title", ev.title},
                        {"anticipated", ev.anticipated}};
            } else if constexpr (std::is_same_v<T, event::CompleteActivity>) {
                json savor = nullptr;
                if (ev.savor) {
                    savor = {{"kind", ev.savor->kind == SavorArtifact::Kind::Text ? "text" : "photo"},
                             {"value", ev.savor->value}};
                }
                return {{"type", "activity_complete"},
                        {"participant_id", ev.participant_id},
                        {"activity_id", ev.activity_id},
                        {"experienced", ev.experienced},
                        {"savor", savor}};
            } else if constexpr (std::is_same_v<T, event::Spin>) {
                return {{"type", "spin"},
                        {"participant_id", ev.participant_id},
                        {"target_id", ev.target_id},
                        {"at", ts(ev.at)}};
            } else {
                return {{"type", "tick"}, {"now", ts(ev.now)}};
            }
        },
        e);
    return j.dump();
}

Event parse_event(std::string_view line) {
    try {
        const auto j = json::parse(line);
        const auto type = j.at("type").get<std::string>();
        if (type == "enroll") {
            Enrollment en;
            en.participant_id = j.at("participant_id").get<std::string>();
            en.start = parse_day(j.at("start"));
            en.end = parse_day(j.at("end"));
            en.offset = UtcOffset{Seconds{j.at("utc_offset_s").get<std::int64_t>()}};
            en.burst_weeks = j.at("burst_weeks").get<std::vector<int>>();
            return event::Enroll{std::move(en)};
        }
        if (type == "ingest") {
            UploadBatch b;
            b.participant_id = j.at("participant_id").get<std::string>();
            b.device_sent_at = parse_ts(j.at("device_sent_at"));
            b.received_at = parse_ts(j.at("received_at"));
            for (const auto& l : j.at("lines")) {
                SensorRecord r;
                std::string reason;
                bool ignored = false;
                if (!parse_record_line(l.get<std::string>(), r, reason, ignored)) {
                    throw Error(ErrorCode::InvalidRequest, "stored record: " + reason);
                }
                b.records.push_back(std::move(r));
            }
            for (const auto& m : j.at("malformed")) {
                b.malformed.push_back({m.at("line_no").get<std::size_t>(), m.at("reason").get<std::string>()});
            }
            return event::Ingest{std::move(b)};
        }
        if (type == "message") {
            const auto category = parse_category(j.at("category").get<std::string>());
            if (!category) throw Error(ErrorCode::InvalidRequest, "category");
            return event::AddMessage{opt_string(j, "scope"), *category, j.at("text").get<std::string>(),
                                     parse_ts(j.at("at"))};
        }
        if (type == "answer") {
            return event::SubmitAnswer{j.at("session_id").get<std::string>(), j.at("node_id").get<std::string>(),
                                       parse_value(j.at("value")), parse_ts(j.at("at"))};
        }
        if (type == "goal") {
            const auto level = parse_goal_level(j.at("level").get<std::string>());
            if (!level) throw Error(ErrorCode::InvalidRequest, "level");
            return event::UpsertGoal{j.at("participant_id").get<std::string>(), opt_string(j, "parent"), *level,
                                     j.at("title").get<std::string>(), j.at("in_session").get<bool>()};
        }
        if (type == "activity_plan") {
            return event::PlanActivity{j.at("participant_id").get<std::string>(),
                                       j.at("activity_id").get<std::string>(), j.at("title").get<std::string>(),
                                       j.at("anticipated").get<int>()};
        }
        if (type == "activity_complete") {
            std::optional<SavorArtifact> savor;
            if (!j.at("savor").is_null()) {
                const auto& s = j.at("savor");
                savor = SavorArtifact{s.at("kind").get<std::string>() == "photo" ? SavorArtifact::Kind::PhotoRef
                                                                                 : SavorArtifact::Kind::Text,
                                      s.at("value").get<std::string>()};
            }
            return event::CompleteActivity{j.at("participant_id").get<std::string>(),
                                           j.at("activity_id").get<std::string>(), j.at("experienced").get<int>(),
                                           std::move(savor)};
        }
        if (type == "spin") {
            return event::Spin{j.at("participant_id").get<std::string>(), j.at("target_id").get<std::string>(),
                               parse_ts(j.at("at"))};
        }
        if (type == "tick") return event::Tick{parse_ts(j.at("now"))};
        throw Error(ErrorCode::InvalidRequest, "unknown event type " + type);
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::InvalidRequest, std::string("event: ") + ex.what());
    }
}

std::vector<Event> parse_event_log(std::string_view text) {
    std::vector<Event> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(start, end - start);
        start = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        out.push_back(parse_event(line));
    }
    return out;
}

}  // namespace msite
