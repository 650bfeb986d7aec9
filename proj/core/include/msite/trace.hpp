#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msite/records.hpp"

namespace msite {

struct MalformedLine {
    std::size_t line_no = 0;  // 1-based
    std::string reason;
};

struct TraceParse {
    std::vector<SensorRecord> records;  // sorted by (participant_id, captured_at)
    std::vector<MalformedLine> errors;
    std::size_t ignored = 0;  // comments, blank lines and OTHER records
};

/// Parses a trace without ever throwing; every rejected line is reported.
[[nodiscard]] TraceParse parse_trace_lenient(std::string_view text);

/// As parse_trace_lenient, but throws Error(NoValidRecords) when the input
/// had lines to parse and none of them were valid.
[[nodiscard]] TraceParse parse_trace(std::string_view text);

/// Parses one data line. Returns false and sets `reason` when the line is
/// malformed; comment/blank/OTHER lines are reported via `ignored`.
bool parse_record_line(std::string_view line, SensorRecord& out, std::string& reason, bool& ignored);

[[nodiscard]] std::string format_record(const SensorRecord& record);
[[nodiscard]] std::string serialize_trace(std::span<const SensorRecord> records);

/// Records with from <= captured_at < to, order preserved. Throws InvalidWindow if from > to.
[[nodiscard]] std::vector<SensorRecord> slice(std::span<const SensorRecord> series, Timestamp from, Timestamp to);

/// Sorts by (participant_id, captured_at), stable for ties.
void sort_records(std::vector<SensorRecord>& records);

}  // namespace msite
