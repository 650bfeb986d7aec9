#include "msite/time.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

namespace msite {

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) return false;
    const char* first = text.data() + pos;
    const char* last = first + len;
    if (!std::all_of(first, last, [](char c) { return c >= '0' && c <= '9'; })) return false;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace

Seconds overlap(Timestamp a_from, Timestamp a_to, Timestamp b_from, Timestamp b_to) noexcept {
    const auto lo = std::max(a_from, b_from);
    const auto hi = std::min(a_to, b_to);
    return hi > lo ? hi - lo : Seconds{0};
}

std::string format_iso8601(Timestamp t) {
    const auto day = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day ymd{day};
    const std::chrono::hh_mm_ss hms{t - day};
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

std::optional<Timestamp> parse_iso8601(std::string_view text) {
    // 2024-03-05T12:00:00Z
    if (text.size() < 20 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':') {
        return std::nullopt;
    }
    const auto suffix = text.substr(19);
    if (suffix != "Z" && suffix != "+00:00") return std::nullopt;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d) ||
        !read_int(text, 11, 2, h) || !read_int(text, 14, 2, mi) || !read_int(text, 17, 2, s)) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
    return Timestamp{std::chrono::sys_days{ymd}} + std::chrono::hours{h} + std::chrono::minutes{mi} + Seconds{s};
}

std::string format_date(LocalDate d) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                       static_cast<unsigned>(d.day()));
}

std::optional<LocalDate> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, mo = 0, d = 0;
    if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d)) return std::nullopt;
    const LocalDate ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                        std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return ymd;
}

LocalDate local_date(Timestamp t, UtcOffset offset) {
    return LocalDate{std::chrono::floor<std::chrono::days>(t + offset.value)};
}

Timestamp local_midnight(LocalDate d, UtcOffset offset) {
    return Timestamp{std::chrono::sys_days{d}} - offset.value;
}

Timestamp at_local(LocalDate d, Seconds time_of_day, UtcOffset offset) {
    return local_midnight(d, offset) + time_of_day;
}

Seconds local_time_of_day(Timestamp t, UtcOffset offset) {
    const auto local = t + offset.value;
    return local - std::chrono::floor<std::chrono::days>(local);
}

LocalDate add_days(LocalDate d, int days) {
    return LocalDate{std::chrono::sys_days{d} + std::chrono::days{days}};
}

int days_between(LocalDate from, LocalDate to) {
    return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

}  // namespace msite
