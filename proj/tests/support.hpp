#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msite/ema.hpp"
#include "msite/engine.hpp"
#include "msite/simulator.hpp"

namespace testing_support {

inline msite::Timestamp ts(const std::string& iso) { return *msite::parse_iso8601(iso); }
inline msite::LocalDate day(const std::string& d) { return *msite::parse_date(d); }

inline msite::SelectedMessage selected(msite::MessageCategory c, std::string id = "g1") {
    msite::SelectedMessage s;
    s.message.message_id = std::move(id);
    s.message.category = c;
    s.message.text = "message " + s.message.message_id;
    return s;
}

/// Contextual session as the engine would build it for `detected`.
inline msite::EmaSession contextual_session(msite::SocialContext detected, msite::Basis basis,
                                            const std::string& period = "afternoon",
                                            msite::Timestamp delivered = ts("2026-01-05T18:00:00Z")) {
    using namespace msite;
    SocialContextWindow w;
    w.from = delivered - Seconds{6 * 3600};
    w.to = delivered;
    w.detected = detected;
    w.basis = basis;
    const auto msg = selected(category_for_context(detected), "g1");
    std::optional<SelectedMessage> alt;
    if (detected.location == Location::Home) {
        alt = selected(detected.company == Company::Alone ? MessageCategory::DefeatistChallenge
                                                          : MessageCategory::ThreatChallenge,
                       "g2");
    }
    const auto savor = selected(MessageCategory::GoalActivityEncouragement, "g3");
    auto script = build_contextual_session(w, period, msg, alt, savor, default_item_bank(), "s");
    PendingPrompt p;
    p.participant_id = "P";
    p.date = local_date(delivered, {});
    p.slot = Slot::Evening;
    p.kind = ScriptKind::Contextual;
    p.fire_at = delivered;
    p.window = TimeWindow{w.from, w.to};
    p.period_phrase = period;
    auto s = deliver("P_s", p, std::move(script), delivered, Seconds{4 * 3600});
    s.window = w;
    s.drawn = {msg, savor};
    if (alt) s.drawn.push_back(*alt);
    return s;
}

inline msite::Persona persona(const nlohmann::json& overrides = {}) {
    nlohmann::json j = {{"participant_id", "T"}, {"home", {{"lat", 34.05}, {"lon", -118.25}}}};
    for (const auto& [k, v] : overrides.items()) j[k] = v;
    return msite::persona_from_json(j);
}

}  // namespace testing_support
