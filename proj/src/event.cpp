#include "traceguard/event.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace traceguard {

namespace {

template <typename T>
bool parse_full(std::string_view text, T& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool parse_full_double(std::string_view text, double& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

void append_double(std::string& out, double v, std::chars_format fmt) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, fmt);
    if (ec != std::errc{})
        throw std::invalid_argument("unrenderable numeric value");
    out.append(buf, ptr);
}

}  // namespace

std::string to_string(const SensorId& sid) {
    std::string out;
    out.reserve(sid.package.size() + sid.class_name.size() + sid.method.size() + 16);
    out += sid.package;
    out += '.';
    out += sid.class_name;
    out += '.';
    out += sid.method;
    out += '.';
    out += std::to_string(sid.id);
    out += '.';
    out += std::to_string(sid.vid);
    out += '.';
    out += std::to_string(sid.vvid);
    return out;
}

SensorId parse_sid(std::string_view text) {
    // package contains dots, so peel the five fixed segments off the right.
    std::string_view rest = text;
    std::string_view tail[5];
    for (int i = 4; i >= 0; --i) {
        auto dot = rest.rfind('.');
        if (dot == std::string_view::npos)
            throw MalformedSid("SID has fewer than 6 dot segments: " + std::string(text));
        tail[i] = rest.substr(dot + 1);
        rest = rest.substr(0, dot);
    }
    if (rest.empty())
        throw MalformedSid("SID has an empty package: " + std::string(text));

    SensorId sid;
    sid.package = std::string(rest);
    sid.class_name = std::string(tail[0]);
    sid.method = std::string(tail[1]);
    if (sid.class_name.empty() || sid.method.empty())
        throw MalformedSid("SID has an empty class or method segment: " + std::string(text));
    for (std::string_view seg = rest; !seg.empty();) {
        auto dot = seg.find('.');
        auto part = dot == std::string_view::npos ? seg : seg.substr(0, dot);
        if (part.empty())
            throw MalformedSid("SID has an empty package segment: " + std::string(text));
        if (dot == std::string_view::npos) break;
        seg = seg.substr(dot + 1);
        if (seg.empty())
            throw MalformedSid("SID has an empty package segment: " + std::string(text));
    }
    if (!parse_full(tail[2], sid.id) || !parse_full(tail[3], sid.vid) ||
        !parse_full(tail[4], sid.vvid))
        throw MalformedSid("SID id/vid/vvid is not a non-negative integer: " + std::string(text));
    return sid;
}

std::string render_decimal(const SensorValue& value) {
    if (value.is_text()) return value.as_text();
    if (value.is_state()) return std::to_string(value.as_state());
    std::string out;
    append_double(out, value.as_numeric(), std::chars_format::fixed);
    return out;
}

SensorEvent parse_event(std::string_view line) {
    if (line.empty()) throw MalformedRecord("empty record");

    // Split on the first three commas only; the value may contain commas.
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    std::size_t c3 = c2 == std::string_view::npos ? c2 : line.find(',', c2 + 1);
    if (c3 == std::string_view::npos)
        throw MalformedRecord("record has fewer than 3 commas: " + std::string(line));

    SensorEvent event;
    if (!parse_full(line.substr(0, c1), event.timestamp_ms) || event.timestamp_ms < 0)
        throw MalformedRecord("timestamp is not a non-negative integer: " + std::string(line.substr(0, c1)));
    if (!parse_full(line.substr(c1 + 1, c2 - c1 - 1), event.count))
        throw MalformedRecord("count is not a non-negative integer: " +
                              std::string(line.substr(c1 + 1, c2 - c1 - 1)));
    event.sid = parse_sid(line.substr(c2 + 1, c3 - c2 - 1));

    std::string_view raw = line.substr(c3 + 1);
    switch (event.sid.vid) {
        case kVidNumeric64: {
            double v = 0;
            if (!parse_full_double(raw, v))
                throw ValueTypeMismatch("value is not a Numeric64 payload: " + std::string(raw));
            event.value = SensorValue::numeric(v);
            break;
        }
        case kVidState32: {
            std::int32_t v = 0;
            if (!parse_full(raw, v))
                throw ValueTypeMismatch("value is not a State32 payload: " + std::string(raw));
            event.value = SensorValue::state(v);
            break;
        }
        case kVidText:
            event.value = SensorValue::text(std::string(raw));
            break;
        default:
            throw ValueTypeMismatch("SID vid " + std::to_string(event.sid.vid) +
                                    " has no defined value encoding");
    }
    return event;
}

std::string format_event(const SensorEvent& event) {
    std::string out;
    out += std::to_string(event.timestamp_ms);
    out += ',';
    out += std::to_string(event.count);
    out += ',';
    out += to_string(event.sid);
    out += ',';
    if (event.value.is_numeric()) {
        // Shortest form that parses back to the same bits.
        append_double(out, event.value.as_numeric(), std::chars_format::general);
    } else if (event.value.is_state()) {
        out += std::to_string(event.value.as_state());
    } else {
        const std::string& text = event.value.as_text();
        if (text.find('\n') != std::string::npos)
            throw std::invalid_argument("Text payload contains a newline");
        out += text;
    }
    return out;
}

ReadResult read_log(std::istream& source) {
    ReadResult result;
    std::string line;
    std::size_t line_number = 0;
    bool have_prev = false;
    std::int64_t prev_ts = 0;
    std::uint32_t prev_count = 0;

    while (std::getline(source, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        SensorEvent event;
        try {
            event = parse_event(line);
        } catch (MalformedRecord& err) {
            err.line_number = line_number;
            throw;
        }
        if (have_prev) {
            if (event.timestamp_ms < prev_ts) {
                result.warnings.push_back("line " + std::to_string(line_number) +
                                          ": timestamp regression (" + std::to_string(event.timestamp_ms) +
                                          " after " + std::to_string(prev_ts) + ")");
            } else if (event.timestamp_ms == prev_ts && event.count <= prev_count) {
                result.warnings.push_back("line " + std::to_string(line_number) +
                                          ": count does not advance within timestamp " +
                                          std::to_string(event.timestamp_ms));
            }
        }
        prev_ts = event.timestamp_ms;
        prev_count = event.count;
        have_prev = true;
        result.events.push_back(std::move(event));
    }
    return result;
}

ReadResult read_log_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open log file: " + path);
    return read_log(in);
}

}  // namespace traceguard
