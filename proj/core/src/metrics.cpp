#include "msite/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace msite {

namespace {

using Interval = std::pair<Timestamp, Timestamp>;

std::vector<Interval> merge(std::vector<Interval> v) {
    std::sort(v.begin(), v.end());
    std::vector<Interval> out;
    for (const auto& iv : v) {
        if (!out.empty() && iv.first <= out.back().second) {
            out.back().second = std::max(out.back().second, iv.second);
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

double covered_hours(const std::vector<Interval>& merged, Timestamp from, Timestamp to) {
    Seconds total{0};
    auto it = std::lower_bound(merged.begin(), merged.end(), from,
                               [](const Interval& iv, Timestamp t) { return iv.second <= t; });
    for (; it != merged.end() && it->first < to; ++it) total += overlap(it->first, it->second, from, to);
    return static_cast<double>(total.count()) / 3600.0;
}

double ratio(std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::string format_fixed(double v, int decimals) {
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

AdherenceReport adherence(std::span<const EmaSession> sessions) {
    AdherenceReport r;
    for (const auto& s : sessions) {
        auto& k = r.by_kind[s.kind()];
        ++k.delivered;
        ++r.delivered;
        if (s.state == SessionState::Completed) {
            ++k.answered;
            ++r.answered;
        }
    }
    r.rate = ratio(r.answered, r.delivered);
    for (auto& [kind, k] : r.by_kind) {
        k.rate = ratio(k.answered, k.delivered);
        if (r.answered > 0) r.answered_mix[kind] = ratio(k.answered, r.answered);
    }
    return r;
}

AccuracyReport detection_accuracy(std::span<const ContextResolution> resolutions) {
    AccuracyReport r;
    for (const auto& res : resolutions) {
        switch (res.confirmed) {
            case Confirmation::Yes: ++r.confirmed_yes; break;
            case Confirmation::No: ++r.confirmed_no; break;
            case Confirmation::NoAnswer: ++r.excluded_no_answer; break;
        }
    }
    if (r.confirmed_yes + r.confirmed_no > 0) r.accuracy = ratio(r.confirmed_yes, r.confirmed_yes + r.confirmed_no);
    return r;
}

CoverageReport coverage(std::span<const SensorRecord> records, LocalDate first, LocalDate last, UtcOffset offset,
                        const CoverageParams& params) {
    std::vector<Timestamp> fixes;
    std::vector<Interval> audio;
    for (const auto& r : records) {
        if (const auto* f = std::get_if<AudioFrame>(&r.payload)) {
            const auto start = r.captured_at - Seconds{static_cast<std::int64_t>(std::floor(f->offset_s))};
            audio.emplace_back(start, start + Seconds{params.cycle.period_s});
        } else {
            fixes.push_back(r.captured_at);
        }
    }
    std::sort(fixes.begin(), fixes.end());
    std::vector<Interval> location;
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        auto hold = params.location_gap;
        if (i + 1 < fixes.size()) hold = std::min(hold, fixes[i + 1] - fixes[i]);
        if (hold > Seconds{0}) location.emplace_back(fixes[i], fixes[i] + hold);
    }
    const auto loc = merge(std::move(location));
    const auto aud = merge(std::move(audio));

    CoverageReport rep;
    rep.target_hours = params.target_hours;
    for (auto d = first; d <= last; d = add_days(d, 1)) {
        const auto from = local_midnight(d, offset);
        const auto to = from + kDay;
        DayCoverage day{d, covered_hours(loc, from, to), covered_hours(aud, from, to)};
        if (day.location_h >= params.target_hours && day.audio_h >= params.target_hours) ++rep.days_at_target;
        rep.days.push_back(day);
    }
    rep.fraction_days_at_target = ratio(rep.days_at_target, static_cast<std::int64_t>(rep.days.size()));
    return rep;
}

std::vector<WeeklyAggregate> weekly_aggregate(std::span<const ConversationEpisode> episodes,
                                              std::span<const HomeAwayInterval> timeline, LocalDate start,
                                              UtcOffset offset, int weeks) {
    std::vector<WeeklyAggregate> out;
    const auto origin = local_midnight(start, offset);
    for (int w = 0; w < weeks; ++w) {
        const auto from = origin + w * 7 * kDay;
        const auto to = from + 7 * kDay;
        WeeklyAggregate a;
        a.week_index = w;
        for (const auto& e : episodes) {
            if (from <= e.start && e.start < to) ++a.conversation_count;
        }
        Seconds home{0};
        for (const auto& iv : timeline) {
            if (iv.state == PresenceState::Home) home += overlap(iv.from, iv.to, from, to);
        }
        a.home_time_h = static_cast<double>(home.count()) / 3600.0;
        out.push_back(a);
    }
    return out;
}

BurstSummary burst_summary(std::span<const BurstAnswer> answers, std::string participant_id, int time_point) {
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> acc;  // item -> (sum, n)
    for (const auto& a : answers) {
        auto& [sum, n] = acc[a.item_id];
        sum += a.value;
        ++n;
    }
    BurstSummary s;
    s.participant_id = std::move(participant_id);
    s.time_point = time_point;
    for (const auto& [item, sn] : acc) s.items.push_back({item, ratio(sn.first, sn.second), sn.second});
    return s;
}

std::map<MessageCategory, double> message_mix(std::span<const MessageCategory> log) {
    std::map<MessageCategory, std::int64_t> counts;
    for (const auto c : log) ++counts[c];
    std::map<MessageCategory, double> out;
    for (const auto& [c, n] : counts) out[c] = ratio(n, static_cast<std::int64_t>(log.size()));
    return out;
}

std::map<MessageCategory, double> message_mix(std::span<const SelectedMessage> log) {
    std::vector<MessageCategory> cats;
    cats.reserve(log.size());
    for (const auto& m : log) cats.push_back(m.message.category);
    return message_mix(cats);
}

nlohmann::json to_json(const ParticipantReport& r) {
    using nlohmann::json;
    json j;
    j["participant_id"] = r.participant_id;
    json adh{{"delivered", r.adherence.delivered}, {"answered", r.adherence.answered}, {"rate", r.adherence.rate}};
    for (const auto& [kind, k] : r.adherence.by_kind) {
        adh["by_kind"][std::string(to_string(kind))] = {
            {"delivered", k.delivered}, {"answered", k.answered}, {"rate", k.rate}};
    }
    for (const auto& [kind, f] : r.adherence.answered_mix) adh["answered_mix"][std::string(to_string(kind))] = f;
    j["adherence"] = adh;
    j["accuracy"] = {{"confirmed_yes", r.accuracy.confirmed_yes},
                     {"confirmed_no", r.accuracy.confirmed_no},
                     {"excluded_no_answer", r.accuracy.excluded_no_answer},
                     {"accuracy", r.accuracy.accuracy ? json(*r.accuracy.accuracy) : json(nullptr)}};
    json cov{{"target_hours", r.coverage.target_hours},
             {"days_at_target", r.coverage.days_at_target},
             {"fraction_days_at_target", r.coverage.fraction_days_at_target},
             {"days", json::array()}};
    for (const auto& d : r.coverage.days) {
        cov["days"].push_back({{"date", format_date(d.date)}, {"location_h", d.location_h}, {"audio_h", d.audio_h}});
    }
    j["coverage"] = cov;
    j["weekly"] = json::array();
    for (const auto& w : r.weekly) {
        j["weekly"].push_back(
            {{"week", w.week_index}, {"conversations", w.conversation_count}, {"home_time_h", w.home_time_h}});
    }
    j["burst"] = json::array();
    for (const auto& b : r.burst) {
        json items = json::object();
        for (const auto& it : b.items) items[it.item_id] = {{"mean", it.mean}, {"n", it.n}};
        j["burst"].push_back({{"time_point", b.time_point}, {"items", items}});
    }
    j["messages"] = {{"shown", r.messages_shown}, {"personalized_shown", r.personalized_shown}};
    for (const auto& [c, f] : r.message_mix_all) j["messages"]["mix_all"][std::string(to_string(c))] = f;
    for (const auto& [c, f] : r.message_mix_personalized) {
        j["messages"]["mix_personalized"][std::string(to_string(c))] = f;
    }
    j["engagement"] = {{"goals", r.goals}, {"activities", r.activities}, {"diamonds", r.diamonds}};
    return j;
}

std::string render_text(const ParticipantReport& r) {
    std::string out;
    const auto line = [&out](const std::string& k, const std::string& v) {
        std::string key = k;
        if (key.size() < 34) key.resize(34, ' ');
        out += "  " + key + v + "\n";
    };
    const auto pct = [](double v) { return format_fixed(100.0 * v, 1) + "%"; };
    out += "Participant " + r.participant_id + "\n";
    out += "EMA adherence\n";
    line("delivered", std::to_string(r.adherence.delivered));
    line("answered", std::to_string(r.adherence.answered));
    line("rate", pct(r.adherence.rate));
    for (const auto& [kind, k] : r.adherence.by_kind) {
        line(std::string(to_string(kind)),
             std::to_string(k.answered) + "/" + std::to_string(k.delivered) + " (" + pct(k.rate) + ")");
    }
    for (const auto& [kind, f] : r.adherence.answered_mix) {
        line("answered mix " + std::string(to_string(kind)), pct(f));
    }
    out += "Context detection (participant-confirmed)\n";
    line("yes", std::to_string(r.accuracy.confirmed_yes));
    line("no", std::to_string(r.accuracy.confirmed_no));
    line("no answer (excluded)", std::to_string(r.accuracy.excluded_no_answer));
    line("accuracy", r.accuracy.accuracy ? pct(*r.accuracy.accuracy) : "n/a");
    out += "Sensing coverage\n";
    line("days", std::to_string(r.coverage.days.size()));
    line("days with >= " + format_fixed(r.coverage.target_hours, 0) + " h sensed",
         std::to_string(r.coverage.days_at_target) + " (" + pct(r.coverage.fraction_days_at_target) + ")");
    out += "Weekly trends (conversation episodes are proximity-based)\n";
    out += "  week  conversations  home_h\n";
    for (const auto& w : r.weekly) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "  %4d  %13lld  %6.1f\n", w.week_index,
                      static_cast<long long>(w.conversation_count), w.home_time_h);
        out += buf;
    }
    if (!r.burst.empty()) {
        out += "Burst assessments (item means)\n";
        for (const auto& b : r.burst) {
            for (const auto& it : b.items) {
                line("week " + std::to_string(b.time_point) + " " + it.item_id,
                     format_fixed(it.mean, 2) + " (n=" + std::to_string(it.n) + ")");
            }
        }
    }
    out += "Messages shown\n";
    line("total", std::to_string(r.messages_shown));
    line("personalized", std::to_string(r.personalized_shown));
    for (const auto& [c, f] : r.message_mix_personalized) line("personalized " + std::string(to_string(c)), pct(f));
    out += "Engagement\n";
    line("goals", std::to_string(r.goals));
    line("activities", std::to_string(r.activities));
    line("diamonds", std::to_string(r.diamonds));
    return out;
}

std::string render_csv(std::span<const ParticipantReport> reports) {
    std::string out = "participant_id,section,key,value\n";
    for (const auto& r : reports) {
        const auto row = [&](std::string_view section, const std::string& key, const std::string& value) {
            out += r.participant_id + "," + std::string(section) + "," + key + "," + value + "\n";
        };
        row("adherence", "delivered", std::to_string(r.adherence.delivered));
        row("adherence", "answered", std::to_string(r.adherence.answered));
        row("adherence", "rate", format_fixed(r.adherence.rate));
        for (const auto& [kind, k] : r.adherence.by_kind) {
            const auto name = std::string(to_string(kind));
            row("adherence", name + ".delivered", std::to_string(k.delivered));
            row("adherence", name + ".answered", std::to_string(k.answered));
            row("adherence", name + ".rate", format_fixed(k.rate));
        }
        for (const auto& [kind, f] : r.adherence.answered_mix) {
            row("adherence", "mix." + std::string(to_string(kind)), format_fixed(f));
        }
        row("accuracy", "confirmed_yes", std::to_string(r.accuracy.confirmed_yes));
        row("accuracy", "confirmed_no", std::to_string(r.accuracy.confirmed_no));
        row("accuracy", "excluded_no_answer", std::to_string(r.accuracy.excluded_no_answer));
        row("accuracy", "accuracy", r.accuracy.accuracy ? format_fixed(*r.accuracy.accuracy) : "");
        row("coverage", "days", std::to_string(r.coverage.days.size()));
        row("coverage", "days_at_target", std::to_string(r.coverage.days_at_target));
        row("coverage", "fraction_days_at_target", format_fixed(r.coverage.fraction_days_at_target));
        for (const auto& d : r.coverage.days) {
            row("coverage", format_date(d.date) + ".location_h", format_fixed(d.location_h));
            row("coverage", format_date(d.date) + ".audio_h", format_fixed(d.audio_h));
        }
        for (const auto& w : r.weekly) {
            row("weekly", std::to_string(w.week_index) + ".conversations", std::to_string(w.conversation_count));
            row("weekly", std::to_string(w.week_index) + ".home_time_h", format_fixed(w.home_time_h));
        }
        for (const auto& b : r.burst) {
            for (const auto& it : b.items) {
                row("burst", std::to_string(b.time_point) + "." + it.item_id, format_fixed(it.mean));
            }
        }
        row("messages", "shown", std::to_string(r.messages_shown));
        row("messages", "personalized_shown", std::to_string(r.personalized_shown));
        for (const auto& [c, f] : r.message_mix_all) row("messages", "mix_all." + std::string(to_string(c)), format_fixed(f));
        for (const auto& [c, f] : r.message_mix_personalized) {
            row("messages", "mix_personalized." + std::string(to_string(c)), format_fixed(f));
        }
        row("engagement", "goals", std::to_string(r.goals));
        row("engagement", "activities", std::to_string(r.activities));
        row("engagement", "diamonds", std::to_string(r.diamonds));
    }
    return out;
}

}  // namespace msite
