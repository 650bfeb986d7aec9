#include "msite/context.hpp"

#include "msite/error.hpp"

namespace msite {

std::string to_string(SocialContext c) {
    std::string out = c.location == Location::Home ? "Home/" : "Away/";
    out += to_string(c.company);
    return out;
}

std::optional<SocialContext> parse_social_context(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    const auto loc = text.substr(0, slash);
    const auto company = parse_company(text.substr(slash + 1));
    if (!company) return std::nullopt;
    if (loc == "Home") return SocialContext{Location::Home, *company};
    if (loc == "Away") return SocialContext{Location::Away, *company};
    return std::nullopt;
}

std::string_view to_string(Company c) noexcept { return c == Company::Alone ? "Alone" : "WithOthers"; }

std::optional<Company> parse_company(std::string_view text) {
    if (text == "Alone") return Company::Alone;
    if (text == "WithOthers") return Company::WithOthers;
    return std::nullopt;
}

std::string_view to_string(Basis b) noexcept { return b == Basis::Sensed ? "Sensed" : "Insufficient"; }

std::string_view to_string(Confirmation c) noexcept {
    switch (c) {
        case Confirmation::Yes: return "Yes";
        case Confirmation::No: return "No";
        case Confirmation::NoAnswer: return "NoAnswer";
    }
    return "NoAnswer";
}

SocialContextWindow classify_window(std::span<const HomeAwayInterval> timeline,
                                    std::span<const ConversationEpisode> episodes, Timestamp from, Timestamp to,
                                    const ContextConfig& config) {
    if (!(from < to)) throw Error(ErrorCode::InvalidWindow, "classify_window requires from < to");

    Seconds home{0}, away{0};
    for (const auto& iv : timeline) {
        const auto o = overlap(iv.from, iv.to, from, to);
        if (iv.state == PresenceState::Home) home += o;
        if (iv.state == PresenceState::Away) away += o;
    }
    const auto length = to - from;
    const auto unknown = length - home - away;

    SocialContextWindow w;
    w.from = from;
    w.to = to;
    const auto known = home + away;
    w.home_fraction = known.count() > 0 ? static_cast<double>(home.count()) / static_cast<double>(known.count()) : 0.0;
    w.detected.location = w.home_fraction >= config.home_threshold && known.count() > 0 ? Location::Home
                                                                                        : Location::Away;
    for (const auto& e : episodes) {
        if (e.duration_s >= config.min_conv_s && overlap(e.start, e.end(), from, to).count() > 0) ++w.episode_count;
    }
    w.detected.company = w.episode_count > 0 ? Company::WithOthers : Company::Alone;
    w.basis = static_cast<double>(unknown.count()) > config.max_unknown_fraction * static_cast<double>(length.count())
                  ? Basis::Insufficient
                  : Basis::Sensed;
    return w;
}

ContextResolution reconcile(SocialContext detected, Confirmation answer, std::optional<Company> corrected_company) {
    ContextResolution r;
    r.detected = detected;
    r.confirmed = answer;
    r.effective = detected;
    if (answer == Confirmation::No) {
        if (!corrected_company) throw Error(ErrorCode::MissingCorrection);
        r.corrected_company = corrected_company;
        r.effective.company = *corrected_company;
    } else if (corrected_company) {
        throw Error(ErrorCode::InvalidParams, "a corrected company accompanies only a No answer");
    }
    return r;
}

}  // namespace msite
