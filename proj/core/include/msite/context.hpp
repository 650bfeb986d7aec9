#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "msite/conversation.hpp"
#include "msite/place.hpp"
#include "msite/time.hpp"

namespace msite {

enum class Location { Home, Away };
enum class Company { Alone, WithOthers };

struct SocialContext {
    Location location = Location::Home;
    Company company = Company::Alone;

    friend bool operator==(const SocialContext&, const SocialContext&) = default;
};

/// "Home/Alone", "Away/WithOthers", ...
[[nodiscard]] std::string to_string(SocialContext c);
[[nodiscard]] std::optional<SocialContext> parse_social_context(std::string_view text);
[[nodiscard]] std::string_view to_string(Company c) noexcept;
[[nodiscard]] std::optional<Company> parse_company(std::string_view text);

enum class Basis { Sensed, Insufficient };
[[nodiscard]] std::string_view to_string(Basis b) noexcept;

struct SocialContextWindow {
    Timestamp from;
    Timestamp to;
    SocialContext detected;
    double home_fraction = 0.0;
    int episode_count = 0;
    Basis basis = Basis::Sensed;

    friend bool operator==(const SocialContextWindow&, const SocialContextWindow&) = default;
};

enum class Confirmation { Yes, No, NoAnswer };
[[nodiscard]] std::string_view to_string(Confirmation c) noexcept;

struct ContextResolution {
    SocialContext detected;
    Confirmation confirmed = Confirmation::NoAnswer;
    std::optional<Company> corrected_company;
    SocialContext effective;

    /// NoAnswer resolutions keep the detected context but do not count toward accuracy.
    [[nodiscard]] bool excluded_from_accuracy() const noexcept { return confirmed == Confirmation::NoAnswer; }
    friend bool operator==(const ContextResolution&, const ContextResolution&) = default;
};

struct ContextConfig {
    double home_threshold = 0.5;
    std::int64_t min_conv_s = 60;
    /// More Unknown than this share of the window makes the basis Insufficient.
    double max_unknown_fraction = 0.5;
};

/// Fuses presence intervals and episodes over [from, to).
///
/// home_fraction = Home time / (Home + Away time) inside the window, 0 when
/// neither is present. Company is WithOthers when an episode of at least
/// min_conv_s overlaps the window. Time not covered by any interval counts as
/// Unknown. Throws InvalidWindow unless from < to.
[[nodiscard]] SocialContextWindow classify_window(std::span<const HomeAwayInterval> timeline,
                                                  std::span<const ConversationEpisode> episodes, Timestamp from,
                                                  Timestamp to, const ContextConfig& config = {});

/// Applies the participant's answer to the confirm prompt. A "No" must carry
/// the corrected company; only company is correctable.
/// Throws MissingCorrection for No without a correction, InvalidParams for a
/// correction without No.
[[nodiscard]] ContextResolution reconcile(SocialContext detected, Confirmation answer,
                                          std::optional<Company> corrected_company);

}  // namespace msite
