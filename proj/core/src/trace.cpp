#include "msite/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "msite/error.hpp"

namespace msite {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

}  // namespace

bool parse_record_line(std::string_view line, SensorRecord& out, std::string& reason, bool& ignored) {
    ignored = false;
    line = trim(line);
    if (line.empty() || line.front() == '#') {
        ignored = true;
        return false;
    }
    const auto fields = split_fields(line);
    if (fields.size() < 3) {
        reason = "too few fields";
        return false;
    }
    if (fields[0].empty()) {
        reason = "empty participant_id";
        return false;
    }
    const auto ts = parse_iso8601(fields[1]);
    if (!ts) {
        reason = "unparseable timestamp";
        return false;
    }
    const auto kind = fields[2];
    if (kind == "OTHER") {
        ignored = true;
        return false;
    }
    out.participant_id = std::string(fields[0]);
    out.captured_at = *ts;
    if (kind == "LOC") {
        if (fields.size() != 6) {
            reason = "LOC expects 6 fields";
            return false;
        }
        LocationSample s;
        if (!parse_number(fields[3], s.lat) || !parse_number(fields[4], s.lon) ||
            !parse_number(fields[5], s.accuracy_m)) {
            reason = "non-numeric LOC field";
            return false;
        }
        if (!std::isfinite(s.lat) || s.lat < -90.0 || s.lat > 90.0) {
            reason = "out-of-range latitude";
            return false;
        }
        if (!std::isfinite(s.lon) || s.lon < -180.0 || s.lon > 180.0) {
            reason = "out-of-range longitude";
            return false;
        }
        if (!std::isfinite(s.accuracy_m) || s.accuracy_m < 0.0) {
            reason = "out-of-range accuracy";
            return false;
        }
        out.payload = s;
        return true;
    }
    if (kind == "AUD") {
        if (fields.size() != 7) {
            reason = "AUD expects 7 fields";
            return false;
        }
        AudioFrame f;
        if (!parse_number(fields[3], f.window_id) || !parse_number(fields[4], f.offset_s) ||
            !parse_number(fields[5], f.energy_db) || !parse_number(fields[6], f.voicing)) {
            reason = "non-numeric AUD field";
            return false;
        }
        if (f.window_id < 0) {
            reason = "negative window_id";
            return false;
        }
        if (!std::isfinite(f.offset_s) || f.offset_s < 0.0 || f.offset_s >= 60.0) {
            reason = "out-of-range offset_s";
            return false;
        }
        if (!std::isfinite(f.energy_db)) {
            reason = "non-finite energy_db";
            return false;
        }
        if (!std::isfinite(f.voicing) || f.voicing < 0.0 || f.voicing > 1.0) {
            reason = "out-of-range voicing";
            return false;
        }
        out.payload = f;
        return true;
    }
    reason = "unknown record kind";
    return false;
}

void sort_records(std::vector<SensorRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const SensorRecord& a, const SensorRecord& b) {
        if (a.participant_id != b.participant_id) return a.participant_id < b.participant_id;
        return a.captured_at < b.captured_at;
    });
}

TraceParse parse_trace_lenient(std::string_view text) {
    TraceParse result;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;

        SensorRecord record;
        std::string reason;
        bool ignored = false;
        if (parse_record_line(line, record, reason, ignored)) {
            result.records.push_back(std::move(record));
        } else if (ignored) {
            ++result.ignored;
        } else {
            result.errors.push_back({line_no, std::move(reason)});
        }
    }
    sort_records(result.records);
    return result;
}

TraceParse parse_trace(std::string_view text) {
    auto result = parse_trace_lenient(text);
    if (result.records.empty() && !result.errors.empty()) {
        throw Error(ErrorCode::NoValidRecords,
                    std::to_string(result.errors.size()) + " malformed line(s), first at line " +
                        std::to_string(result.errors.front().line_no) + ": " + result.errors.front().reason);
    }
    return result;
}

std::string format_record(const SensorRecord& record) {
    std::string line = record.participant_id;
    line += ',';
    line += format_iso8601(record.captured_at);
    if (const auto* loc = std::get_if<LocationSample>(&record.payload)) {
        line += ",LOC,";
        line += format_double(loc->lat);
        line += ',';
        line += format_double(loc->lon);
        line += ',';
        line += format_double(loc->accuracy_m);
    } else {
        const auto& f = std::get<AudioFrame>(record.payload);
        line += ",AUD,";
        line += std::to_string(f.window_id);
        line += ',';
        line += format_double(f.offset_s);
        line += ',';
        line += format_double(f.energy_db);
        line += ',';
        line += format_double(f.voicing);
    }
    return line;
}

std::string serialize_trace(std::span<const SensorRecord> records) {
    std::string out;
    for (const auto& r : records) {
        out += format_record(r);
        out += '\n';
    }
    return out;
}

std::vector<SensorRecord> slice(std::span<const SensorRecord> series, Timestamp from, Timestamp to) {
    if (from > to) throw Error(ErrorCode::InvalidWindow, "from > to");
    std::vector<SensorRecord> out;
    for (const auto& r : series) {
        if (r.captured_at >= from && r.captured_at < to) out.push_back(r);
    }
    return out;
}

}  // namespace msite
