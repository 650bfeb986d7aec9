#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace msite {

using Seconds = std::chrono::seconds;
using Timestamp = std::chrono::sys_seconds;
using LocalDate = std::chrono::year_month_day;

inline constexpr Seconds kMinute{60};
inline constexpr Seconds kHour{3600};
inline constexpr Seconds kDay{86400};

/// Fixed per-participant offset: local wall clock = UTC + value.
struct UtcOffset {
    Seconds value{0};
    friend bool operator==(const UtcOffset&, const UtcOffset&) = default;
};

/// Half-open interval [from, to).
struct TimeWindow {
    Timestamp from;
    Timestamp to;

    [[nodiscard]] bool contains(Timestamp t) const noexcept { return from <= t && t < to; }
    [[nodiscard]] Seconds length() const noexcept { return to - from; }
    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Seconds of overlap between [a_from, a_to) and [b_from, b_to).
[[nodiscard]] Seconds overlap(Timestamp a_from, Timestamp a_to, Timestamp b_from, Timestamp b_to) noexcept;

/// Renders `2024-03-05T12:00:00Z`.
[[nodiscard]] std::string format_iso8601(Timestamp t);
/// Accepts `YYYY-MM-DDTHH:MM:SSZ` (or `+00:00` suffix). Fractional seconds are rejected.
[[nodiscard]] std::optional<Timestamp> parse_iso8601(std::string_view text);

[[nodiscard]] std::string format_date(LocalDate d);
[[nodiscard]] std::optional<LocalDate> parse_date(std::string_view text);

[[nodiscard]] LocalDate local_date(Timestamp t, UtcOffset offset);
/// UTC instant of local midnight on `d`.
[[nodiscard]] Timestamp local_midnight(LocalDate d, UtcOffset offset);
[[nodiscard]] Timestamp at_local(LocalDate d, Seconds time_of_day, UtcOffset offset);
[[nodiscard]] Seconds local_time_of_day(Timestamp t, UtcOffset offset);
[[nodiscard]] LocalDate add_days(LocalDate d, int days);
[[nodiscard]] int days_between(LocalDate from, LocalDate to);

}  // namespace msite
