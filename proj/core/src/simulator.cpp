#include "msite/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "msite/error.hpp"

namespace msite {

namespace {

using nlohmann::json;

Seconds parse_clock(const json& j, const char* key) {
    const auto s = j.get<std::string>();
    int h = 0;
    int m = 0;
    char colon = 0;
    if (std::sscanf(s.c_str(), "%d%c%d", &h, &colon, &m) != 3 || colon != ':' || h < 0 || h > 24 || m < 0 ||
        m > 59) {
        throw Error(ErrorCode::InvalidConfig, std::string(key) + ": expected HH:MM, got " + s);
    }
    return Seconds{h * 3600 + m * 60};
}

Seconds minutes(const json& j) { return Seconds{std::llround(j.get<double>() * 60.0)}; }

void check_prob(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidConfig, std::string(name) + " must be in [0, 1]");
}

void check_rate(double r, const char* name) {
    if (!(r >= 0.0)) throw Error(ErrorCode::InvalidConfig, std::string(name) + " must be >= 0");
}

LatLon parse_point(const json& j) { return {j.at("lat").get<double>(), j.at("lon").get<double>()}; }

void fill_sites(Persona& p) {
    if (!p.sites.empty()) return;
    Rng rng(derive_seed(0, "sites/" + p.participant_id));
    for (int i = 0; i < 3; ++i) {
        const double dist = rng.uniform(1500.0, 5000.0);
        const double bearing = rng.uniform(0.0, 2.0 * std::numbers::pi);
        p.sites.push_back(offset_m(p.home, dist * std::cos(bearing), dist * std::sin(bearing)));
    }
}

void validate(const Persona& p) {
    if (p.participant_id.empty()) throw Error(ErrorCode::InvalidConfig, "persona without participant_id");
    check_prob(p.outing_prob, "outing_prob");
    check_prob(p.meal_conv_prob, "meal_conv_prob");
    check_prob(p.tv_prob, "tv_prob");
    check_prob(p.phone_carry_prob, "phone_carry_prob");
    check_prob(p.phone_off_day_prob, "phone_off_day_prob");
    check_prob(p.answer_action_plan, "answer_action_plan");
    check_prob(p.answer_contextual, "answer_contextual");
    check_prob(p.confirm_truthful, "confirm_truthful");
    check_prob(p.confirm_skip, "confirm_skip");
    check_rate(p.conv_rate_home_h, "conv_rate_home_h");
    check_rate(p.conv_rate_away_h, "conv_rate_away_h");
    if (p.outings_max < 0) throw Error(ErrorCode::InvalidConfig, "outings_max must be >= 0");
    if (p.outing_min <= Seconds{0} || p.outing_max < p.outing_min) {
        throw Error(ErrorCode::InvalidConfig, "outing lengths");
    }
    if (p.conv_min <= Seconds{0} || p.conv_max < p.conv_min) {
        throw Error(ErrorCode::InvalidConfig, "conversation lengths");
    }
    if (p.bed <= p.wake || p.bed > kDay) throw Error(ErrorCode::InvalidConfig, "wake must precede bed");
}

bool overlaps(const std::vector<Interval>& xs, Timestamp from, Timestamp to) {
    return std::any_of(xs.begin(), xs.end(), [&](const Interval& i) { return i.from < to && from < i.to; });
}

bool inside(const std::vector<Interval>& xs, Timestamp t) {
    return std::any_of(xs.begin(), xs.end(), [&](const Interval& i) { return i.from <= t && t < i.to; });
}

std::vector<Interval> merge(std::vector<Interval> xs) {
    std::sort(xs.begin(), xs.end(), [](const Interval& a, const Interval& b) { return a.from < b.from; });
    std::vector<Interval> out;
    for (const auto& x : xs) {
        if (!out.empty() && x.from <= out.back().to) {
            out.back().to = std::max(out.back().to, x.to);
        } else {
            out.push_back(x);
        }
    }
    return out;
}

}  // namespace

Persona persona_from_json(const json& j) {
    Persona p;
    try {
        p.participant_id = j.at("participant_id").get<std::string>();
        p.home = parse_point(j.at("home"));
        if (j.contains("utc_offset_min")) p.offset = UtcOffset{Seconds{j.at("utc_offset_min").get<int>() * 60}};
        if (j.contains("wake")) p.wake = parse_clock(j.at("wake"), "wake");
        if (j.contains("bed")) p.bed = parse_clock(j.at("bed"), "bed");
        p.outing_prob = j.value("outing_prob", p.outing_prob);
        p.outings_max = j.value("outings_max", p.outings_max);
        if (j.contains("outing_min_min")) p.outing_min = minutes(j.at("outing_min_min"));
        if (j.contains("outing_max_min")) p.outing_max = minutes(j.at("outing_max_min"));
        if (j.contains("sites")) {
            for (const auto& s : j.at("sites")) p.sites.push_back(parse_point(s));
        }
        p.conv_rate_home_h = j.value("conv_rate_home_h", p.conv_rate_home_h);
        p.conv_rate_away_h = j.value("conv_rate_away_h", p.conv_rate_away_h);
        if (j.contains("conv_min_min")) p.conv_min = minutes(j.at("conv_min_min"));
        if (j.contains("conv_max_min")) p.conv_max = minutes(j.at("conv_max_min"));
        p.meal_conv_prob = j.value("meal_conv_prob", p.meal_conv_prob);
        p.tv_prob = j.value("tv_prob", p.tv_prob);
        p.conv_growth_weekly = j.value("conv_growth_weekly", p.conv_growth_weekly);
        p.outing_growth_weekly = j.value("outing_growth_weekly", p.outing_growth_weekly);
        p.phone_carry_prob = j.value("phone_carry_prob", p.phone_carry_prob);
        p.phone_off_day_prob = j.value("phone_off_day_prob", p.phone_off_day_prob);
        p.answer_action_plan = j.value("answer_action_plan", p.answer_action_plan);
        p.answer_contextual = j.value("answer_contextual", p.answer_contextual);
        p.confirm_truthful = j.value("confirm_truthful", p.confirm_truthful);
        p.confirm_skip = j.value("confirm_skip", p.confirm_skip);
        p.appraisal_mean = j.value("appraisal_mean", p.appraisal_mean);
        if (j.contains("burst_means")) p.burst_means = j.at("burst_means").get<std::map<std::string, double>>();
        if (j.contains("messages")) {
            for (const auto& m : j.at("messages")) {
                const auto c = parse_category(m.at("category").get<std::string>());
                if (!c) throw Error(ErrorCode::InvalidConfig, "message category " + m.at("category").dump());
                p.messages.push_back({*c, m.at("text").get<std::string>()});
            }
        }
        if (j.contains("goals")) {
            for (const auto& g : j.at("goals")) {
                p.goals.push_back({g.at("long_term").get<std::string>(), g.at("short_term").get<std::string>(),
                                   g.value("steps", std::vector<std::string>{})});
            }
        }
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::InvalidConfig, std::string("persona: ") + ex.what());
    }
    validate(p);
    fill_sites(p);
    return p;
}

std::vector<Persona> parse_personas(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::InvalidConfig, std::string("personas: ") + ex.what());
    }
    const json& list = j.is_object() && j.contains("personas") ? j.at("personas") : j;
    if (!list.is_array()) throw Error(ErrorCode::InvalidConfig, "personas: expected an array");
    std::vector<Persona> out;
    for (const auto& p : list) out.push_back(persona_from_json(p));
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            if (out[i].participant_id == out[k].participant_id) {
                throw Error(ErrorCode::InvalidConfig, "duplicate persona " + out[i].participant_id);
            }
        }
    }
    return out;
}

std::vector<Persona> default_personas() {
    const LatLon base{34.0689, -118.4452};
    std::vector<Persona> out;

    // Out most days, conversations pick up week over week.
    Persona a;
    a.participant_id = "A";
    a.home = base;
    a.outing_prob = 0.92;
    a.conv_rate_home_h = 0.08;
    a.conv_rate_away_h = 0.4;
    a.conv_growth_weekly = 0.12;
    a.answer_action_plan = 1.0;
    a.answer_contextual = 0.8;
    a.phone_off_day_prob = 0.05;
    a.burst_means = {{"pleasure", 4.5}, {"interest_past_hour", 4.0}, {"interest_later_today", 4.5},
                     {"defeatist_attitudes", 3.0}, {"home_minutes", 35}};
    a.messages = {{MessageCategory::DefeatistChallenge, "But it was fun when you played cards with Joe at the clubhouse"},
                  {MessageCategory::DefeatistChallenge, "Your neighbours were glad to see you at the barbecue"},
                  {MessageCategory::ThreatChallenge, "The bus ride to the library went smoothly last week"},
                  {MessageCategory::ThreatChallenge, "Nothing bad happened on your last walk to the park"}};
    a.goals = {{"Reconnect with family", "Call my daughter weekly", {"Find her number", "Call on Sunday", "Plan a visit"}}};
    out.push_back(a);

    // Answers action plans, mostly ignores contextual prompts, sometimes leaves the phone behind.
    Persona b;
    b.participant_id = "B";
    b.home = {34.097678, -118.464742};
    b.outing_prob = 0.6;
    b.outings_max = 1;
    b.conv_rate_home_h = 0.05;
    b.conv_rate_away_h = 0.4;
    b.phone_carry_prob = 0.9;
    b.answer_action_plan = 0.89;
    b.answer_contextual = 0.21;
    b.phone_off_day_prob = 0.05;
    b.goals = {{"Get out more", "Walk to the store", {"Walk around the block", "Walk to the corner"}}};
    out.push_back(b);

    Persona c;
    c.participant_id = "C";
    c.home = {34.046417, -118.416973};
    c.outing_prob = 0.5;
    c.conv_rate_home_h = 0.15;
    c.conv_rate_away_h = 0.6;
    c.tv_prob = 0.7;
    c.answer_contextual = 0.7;
    c.phone_off_day_prob = 0.05;
    out.push_back(c);

    Persona d;
    d.participant_id = "D";
    d.home = {34.079692, -118.400688};
    d.outing_prob = 0.75;
    d.outings_max = 3;
    d.outing_max = Seconds{3 * 3600};
    d.conv_rate_home_h = 0.1;
    d.conv_rate_away_h = 0.5;
    d.answer_contextual = 0.85;
    d.phone_off_day_prob = 0.05;
    out.push_back(d);

    Persona e;
    e.participant_id = "E";
    e.home = {34.032927, -118.47777};
    e.outing_prob = 0.4;
    e.conv_rate_home_h = 0.2;
    e.conv_rate_away_h = 0.5;
    e.tv_prob = 0.6;
    e.answer_contextual = 0.75;
    e.phone_off_day_prob = 0.05;
    out.push_back(e);

    for (auto& p : out) {
        validate(p);
        fill_sites(p);
    }
    return out;
}

bool GroundTruthDay::at_home(Timestamp t) const {
    const auto* s = stay_at(t);
    return s != nullptr && s->home;
}

const Stay* GroundTruthDay::stay_at(Timestamp t) const {
    for (const auto& s : stays) {
        if (s.from <= t && t < s.to) return &s;
    }
    return nullptr;
}

GroundTruthDay generate_ground_truth(const Persona& p, LocalDate date, int week, Rng& rng) {
    GroundTruthDay d;
    d.date = date;
    d.participant_id = p.participant_id;
    const auto day0 = local_midnight(date, p.offset);
    const auto day1 = day0 + kDay;
    const auto wake = day0 + p.wake;
    const auto bed = day0 + p.bed;

    std::vector<Stay> away;
    const double outing_p = std::clamp(p.outing_prob * (1.0 + p.outing_growth_weekly * week), 0.0, 1.0);
    if (p.outings_max > 0 && !p.sites.empty() && rng.bernoulli(outing_p)) {
        const auto k = rng.uniform_int(1, p.outings_max);
        const auto lo = wake + Seconds{1800};
        const auto hi = bed - Seconds{1800};
        const auto part = (hi - lo) / k;
        for (std::int64_t i = 0; i < k; ++i) {
            auto len = Seconds{rng.uniform_int(p.outing_min.count(), p.outing_max.count())};
            len = std::min(len, part - Seconds{600});
            const auto slack = part - len;
            const auto start = lo + i * part + Seconds{rng.uniform_int(0, std::max<std::int64_t>(0, slack.count()))};
            const auto& site = p.sites[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(p.sites.size()) - 1))];
            const bool carry = rng.bernoulli(p.phone_carry_prob);
            if (len > Seconds{0}) away.push_back({start, start + len, site, false, carry});
        }
    }
    auto t = day0;
    for (const auto& a : away) {
        if (a.from > t) d.stays.push_back({t, a.from, p.home, true, true});
        d.stays.push_back(a);
        t = a.to;
    }
    d.stays.push_back({t, day1, p.home, true, true});

    const double growth = std::max(0.0, 1.0 + p.conv_growth_weekly * week);
    std::vector<Interval> convs;
    for (const auto& s : d.stays) {
        const auto lo = std::max(s.from, wake);
        const auto hi = std::min(s.to, bed);
        if (lo >= hi) continue;
        const double rate = (s.home ? p.conv_rate_home_h : p.conv_rate_away_h) * growth / 3600.0;
        if (rate <= 0.0) continue;
        auto c = lo;
        for (;;) {
            c += Seconds{std::llround(rng.exponential(rate))};
            if (c >= hi) break;
            const auto end = std::min(c + Seconds{rng.uniform_int(p.conv_min.count(), p.conv_max.count())}, hi);
            convs.push_back({c, end});
            c = end;
        }
    }
    // Meals end shortly before the noon and evening prompts.
    for (const auto meal : {Seconds{11 * 3600 + 300}, Seconds{17 * 3600 + 300}}) {
        if (rng.bernoulli(p.meal_conv_prob)) {
            const auto from = day0 + meal + Seconds{rng.uniform_int(0, 1200)};
            convs.push_back({from, from + Seconds{rng.uniform_int(600, 1200)}});
        }
    }
    d.conversations = merge(std::move(convs));

    if (rng.bernoulli(p.tv_prob)) {
        const auto from = day0 + Seconds{19 * 3600} + Seconds{rng.uniform_int(0, 3600)};
        const auto to = from + Seconds{rng.uniform_int(3600, 7200)};
        for (const auto& s : d.stays) {
            if (!s.home) continue;
            const auto lo = std::max(s.from, from);
            const auto hi = std::min(s.to, to);
            if (lo < hi) d.tv.push_back({lo, hi});
        }
    }

    if (rng.bernoulli(p.phone_off_day_prob)) {
        d.phone_off_from = day0 + Seconds{12 * 3600} + Seconds{rng.uniform_int(0, 5 * 3600)};
    }
    return d;
}

SocialContext true_context(std::span<const GroundTruthDay> days, Timestamp from, Timestamp to, Seconds min_conv) {
    Seconds home{0};
    bool company = false;
    for (const auto& d : days) {
        for (const auto& s : d.stays) {
            if (s.home) home += overlap(s.from, s.to, from, to);
        }
        for (const auto& c : d.conversations) {
            const auto o = overlap(c.from, c.to, from, to);
            if (o > Seconds{0} && o >= min_conv) company = true;
        }
    }
    return {home * 2 >= to - from ? Location::Home : Location::Away,
            company ? Company::WithOthers : Company::Alone};
}

std::vector<SensorRecord> render_sensor_traces(const GroundTruthDay& day, const Persona& persona,
                                               const NoiseParams& noise, Rng& rng) {
    std::vector<SensorRecord> out;
    const auto day0 = local_midnight(day.date, persona.offset);
    const auto day1 = day0 + kDay;
    const auto off = day.phone_off_from.value_or(day1);
    const auto& pid = persona.participant_id;

    const auto interval = noise.location_interval;
    const auto idle = std::max(noise.idle_location_interval, interval);
    const auto phase = Seconds{static_cast<std::int64_t>(derive_seed(0, "phase/" + pid) %
                                                         static_cast<std::uint64_t>(interval.count()))};
    for (auto t = day0 + phase; t < day1 && t < off; t += interval) {
        const auto* stay = day.stay_at(t);
        LatLon where = stay->where;
        if (!stay->phone_with_participant) {
            if ((t - day0) % idle >= interval) continue;
            where = persona.home;
        }
        double north = rng.normal(0.0, noise.gps_sigma_m);
        double east = rng.normal(0.0, noise.gps_sigma_m);
        double accuracy = rng.uniform(5.0, 30.0);
        if (rng.bernoulli(noise.outlier_prob)) {
            north += rng.normal(0.0, 400.0);
            east += rng.normal(0.0, 400.0);
            accuracy = rng.uniform(250.0, 800.0);
        }
        const auto q = offset_m(where, north, east);
        out.push_back({pid, t, LocationSample{q.lat, q.lon, accuracy}});
    }

    const auto period = Seconds{noise.cycle.period_s};
    const auto active = noise.cycle.active_s;
    std::int64_t k = 0;
    for (auto ws = day0; ws < day1 && ws < off; ws += period, ++k) {
        const auto* stay = day.stay_at(ws);
        if (!stay->phone_with_participant) continue;
        const auto we = ws + Seconds{active};
        if (!overlaps(day.conversations, ws, we) && !overlaps(day.tv, ws, we)) {
            out.push_back({pid, ws, AudioFrame{k, 0.0, rng.normal(-55.0, 4.0), rng.uniform(0.0, 0.2)}});
            continue;
        }
        for (std::int64_t s = 0; s < active; ++s) {
            const auto t = ws + Seconds{s};
            double energy = 0.0;
            double voicing = 0.0;
            if (inside(day.conversations, t)) {
                if (rng.bernoulli(noise.speech_prob)) {
                    energy = rng.normal(-28.0, 4.0);
                    voicing = rng.uniform(0.6, 0.95);
                } else {
                    energy = rng.normal(-50.0, 4.0);
                    voicing = rng.uniform(0.0, 0.3);
                }
            } else if (inside(day.tv, t)) {
                energy = rng.normal(-22.0, 3.0);
                voicing = rng.uniform(0.05, 0.4);
            } else {
                energy = rng.normal(-55.0, 4.0);
                voicing = rng.uniform(0.0, 0.2);
            }
            out.push_back({pid, t, AudioFrame{k, static_cast<double>(s), energy, voicing}});
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SensorRecord& a, const SensorRecord& b) { return a.captured_at < b.captured_at; });
    return out;
}

std::optional<std::vector<std::pair<std::string, AnswerValue>>> simulate_responses(
    const Persona& persona, const EmaSession& session, const std::optional<SocialContext>& truth, Rng& rng) {
    const double p = session.kind() == ScriptKind::ActionPlan ? persona.answer_action_plan : persona.answer_contextual;
    if (!rng.bernoulli(p)) return std::nullopt;

    const auto company_yes = [&] {
        return truth ? truth->company == Company::WithOthers
                     : session.window && session.window->detected.company == Company::WithOthers;
    };

    std::vector<std::pair<std::string, AnswerValue>> out;
    const ScriptNode* node = &session.script.entry();
    while (node != nullptr) {
        AnswerValue value;
        const auto& spec = node->answer;
        if (node->role == node_role::kConfirm) {
            if (rng.bernoulli(persona.confirm_skip)) {
                value = std::string("Skip");
            } else {
                const bool match = !truth || !session.window || *truth == session.window->detected;
                const bool truthful = rng.bernoulli(persona.confirm_truthful);
                value = std::string(match == truthful ? "Yes" : "No");
            }
        } else if (node->role == node_role::kFallback || node->role == node_role::kDirectAsk) {
            value = std::string(company_yes() ? "Yes" : "No");
        } else {
            switch (spec.type) {
                case AnswerType::Choice:
                    value = node->role == node_role::kPlan
                                ? spec.options[static_cast<std::size_t>(
                                      rng.uniform_int(0, static_cast<std::int64_t>(spec.options.size()) - 1))]
                                : spec.options.front();
                    break;
                case AnswerType::Slider:
                case AnswerType::Minutes: {
                    double mean = spec.type == AnswerType::Minutes ? 40.0 : persona.appraisal_mean;
                    if (node->item_id) {
                        if (const auto it = persona.burst_means.find(*node->item_id); it != persona.burst_means.end()) {
                            mean = it->second;
                        }
                    }
                    const double sd = spec.type == AnswerType::Minutes ? 10.0 : 1.0;
                    value = std::clamp<std::int64_t>(std::llround(rng.normal(mean, sd)), spec.min, spec.max);
                    break;
                }
                case AnswerType::FreeText:
                    value = std::string("Call a friend");
                    break;
                case AnswerType::PhotoRef:
                case AnswerType::TextOrPhoto:
                    value = std::string("Talked over coffee");
                    break;
            }
        }
        out.emplace_back(node->node_id, value);
        const auto next = next_node(*node, value);
        node = next ? session.script.find(*next) : nullptr;
    }
    return out;
}

}  // namespace msite
