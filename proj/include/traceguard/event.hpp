#pragma once

// Sensor event model and the line-oriented log format.
//
// One record per line:
//
//     timestamp,count,SID,value
//
// timestamp is UNIX epoch milliseconds. count disambiguates records sharing a
// timestamp (0,1,2,... in emission order), so (timestamp,count) is unique per
// stream. SID is the six-segment sensor identity
//
//     package.class.method.id.vid.vvid
//
// where package may itself contain dots; the SID is therefore parsed from the
// right. vid selects the value encoding: 0 = Numeric64 (IEEE double, e.g. a
// duration in ms), 1 = State32 (32-bit state code), 2 = Text (verbatim bytes,
// commas allowed). The record is split on the first three commas only, so Text
// payloads survive intact.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace traceguard {

struct MalformedRecord : std::runtime_error {
    explicit MalformedRecord(const std::string& what, std::size_t line = 0)
        : std::runtime_error(what), line_number(line) {}
    std::size_t line_number;  // 1-based, 0 when unknown
};

struct MalformedSid : MalformedRecord {
    using MalformedRecord::MalformedRecord;
};

struct ValueTypeMismatch : MalformedRecord {
    using MalformedRecord::MalformedRecord;
};

struct SensorId {
    std::string package;     // dotted, >= 1 segment
    std::string class_name;  // single segment
    std::string method;      // single segment
    std::uint32_t id = 0;    // overload discriminator
    std::uint32_t vid = 0;   // value-type discriminator
    std::uint32_t vvid = 0;  // sub-sensor discriminator

    bool operator==(const SensorId&) const = default;
};

// vid values with a defined payload encoding.
inline constexpr std::uint32_t kVidNumeric64 = 0;
inline constexpr std::uint32_t kVidState32 = 1;
inline constexpr std::uint32_t kVidText = 2;

std::string to_string(const SensorId& sid);
SensorId parse_sid(std::string_view text);

struct SensorValue {
    std::variant<double, std::int32_t, std::string> payload;

    static SensorValue numeric(double v) { return {v}; }
    static SensorValue state(std::int32_t v) { return {v}; }
    static SensorValue text(std::string v) { return {std::move(v)}; }

    bool is_numeric() const { return payload.index() == 0; }
    bool is_state() const { return payload.index() == 1; }
    bool is_text() const { return payload.index() == 2; }

    double as_numeric() const { return std::get<double>(payload); }
    std::int32_t as_state() const { return std::get<std::int32_t>(payload); }
    const std::string& as_text() const { return std::get<std::string>(payload); }

    bool operator==(const SensorValue&) const = default;
};

// Plain decimal rendering, no exponent; what filter sensors match against.
std::string render_decimal(const SensorValue& value);

struct SensorEvent {
    std::int64_t timestamp_ms = 0;
    std::uint32_t count = 0;
    SensorId sid;
    SensorValue value;

    bool operator==(const SensorEvent&) const = default;
};

// Parses one record (no trailing newline). Throws MalformedRecord,
// MalformedSid or ValueTypeMismatch.
SensorEvent parse_event(std::string_view line);

// Single-line rendering; parse_event(format_event(e)) == e for every valid
// event. Text payloads must not contain newlines.
std::string format_event(const SensorEvent& event);

struct ReadResult {
    std::vector<SensorEvent> events;
    // Non-fatal findings, e.g. timestamp regressions from interleaved emitters.
    std::vector<std::string> warnings;
};

// Reads newline-delimited records in file order and validates the
// (timestamp,count) ordering. Parse failures throw with the 1-based line
// number attached; ordering violations only produce warnings.
ReadResult read_log(std::istream& source);
ReadResult read_log_file(const std::string& path);

}  // namespace traceguard
