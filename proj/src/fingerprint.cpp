#include "traceguard/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace traceguard {

namespace {

bool is_marker(const SensorEvent& event, const TaggedGrouping& policy) {
    return event.sid.package == policy.marker_package &&
           event.sid.class_name == policy.marker_class;
}

GroupingResult group_by_tag(std::span<const SensorEvent> events, const TaggedGrouping& policy) {
    GroupingResult result;
    bool any_marker = false;
    std::uint64_t next_id = 0;
    for (const SensorEvent& event : events) {
        if (is_marker(event, policy)) {
            any_marker = true;
            result.traces.emplace_back();
            // The marker value carries the request ordinal when it is a
            // state code; otherwise fall back to a running index.
            result.traces.back().request_id =
                event.value.is_state() ? static_cast<std::uint64_t>(static_cast<std::uint32_t>(
                                             event.value.as_state()))
                                       : next_id;
            ++next_id;
        } else if (!any_marker) {
            // Events before the first marker form their own trace.
            if (result.traces.empty()) {
                result.traces.emplace_back();
                result.traces.back().request_id = next_id++;
            }
            ++result.orphan_events;
        }
        result.traces.back().events.push_back(event);
    }
    return result;
}

GroupingResult group_by_gap(std::span<const SensorEvent> events, const GapGrouping& policy) {
    if (policy.gap_ms < 0) throw std::invalid_argument("gap must be non-negative");
    GroupingResult result;
    std::int64_t prev_ts = 0;
    for (const SensorEvent& event : events) {
        const bool fresh = result.traces.empty() || event.timestamp_ms - prev_ts > policy.gap_ms;
        if (fresh) {
            result.traces.emplace_back();
            result.traces.back().request_id = result.traces.size() - 1;
        }
        result.traces.back().events.push_back(event);
        prev_ts = event.timestamp_ms;
    }
    return result;
}

struct ChainBuild {
    std::vector<ChainLink> links;
    std::vector<double> raw;  // unquantized duration per link
};

ChainBuild build_chain(const RequestTrace& trace, const FingerprintOptions& options) {
    if (options.bucket_ms <= 0) throw std::invalid_argument("bucket must be positive");
    ChainBuild out;
    for (const SensorEvent& event : trace.events) {
        if (event.value.is_numeric()) {
            const double v = event.value.as_numeric();
            const auto bucket = static_cast<std::int64_t>(
                std::floor(v / static_cast<double>(options.bucket_ms)));
            out.links.push_back(ChainLink{event.sid, bucket * options.bucket_ms});
            out.raw.push_back(v);
        } else if (options.include_non_duration_events) {
            out.links.push_back(ChainLink{event.sid, 0});
            out.raw.push_back(0.0);
        }
    }
    return out;
}

}  // namespace

GroupingResult group_requests(std::span<const SensorEvent> events, const GroupingPolicy& policy) {
    if (const auto* tagged = std::get_if<TaggedGrouping>(&policy)) {
        return group_by_tag(events, *tagged);
    }
    return group_by_gap(events, std::get<GapGrouping>(policy));
}

std::uint64_t chain_hash(std::span<const ChainLink> chain) {
    // FNV-1a, 64-bit. The hashed text is the canonical chain rendering, so
    // equal chains — and only equal chains, collisions aside — share a key.
    std::uint64_t h = 14695981039346656037ull;
    auto feed = [&h](const std::string& text) {
        for (unsigned char c : text) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const ChainLink& link : chain) {
        feed(to_string(link.sid));
        feed("@");
        feed(std::to_string(link.quantized_ms));
        feed(";");
    }
    return h;
}

Fingerprint extract_fingerprint(const RequestTrace& trace, const FingerprintOptions& options) {
    if (trace.events.empty()) throw EmptyTrace("trace has no events");
    ChainBuild build = build_chain(trace, options);
    if (build.links.empty()) {
        throw EmptyTrace("trace has no chain-eligible events");
    }
    Fingerprint fp;
    fp.chain = std::move(build.links);
    fp.class_key = chain_hash(fp.chain);
    fp.first_timestamp_ms = trace.events.front().timestamp_ms;
    return fp;
}

std::string format_class_key(std::uint64_t key) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(key));
    return buf;
}

std::map<PeriodClass, std::int64_t> fingerprint_class_counts(std::span<const Fingerprint> prints,
                                                             std::int64_t period_ms,
                                                             std::int64_t origin_ms) {
    if (period_ms <= 0) throw std::invalid_argument("period must be positive");
    std::map<PeriodClass, std::int64_t> counts;
    for (const Fingerprint& fp : prints) {
        const std::int64_t offset = fp.first_timestamp_ms - origin_ms;
        if (offset < 0) throw std::invalid_argument("fingerprint precedes the period origin");
        counts[PeriodClass{offset / period_ms, fp.class_key}] += 1;
    }
    return counts;
}

std::vector<ClassSummary> summarize_classes(std::span<const RequestTrace> traces,
                                            const FingerprintOptions& options) {
    std::map<std::uint64_t, ClassSummary> classes;
    std::map<std::uint64_t, std::vector<double>> sums;
    for (const RequestTrace& trace : traces) {
        ChainBuild build = build_chain(trace, options);
        if (build.links.empty()) continue;  // nothing measurable in this trace
        const std::uint64_t key = chain_hash(build.links);
        auto [it, fresh] = classes.try_emplace(key);
        ClassSummary& summary = it->second;
        if (fresh) {
            summary.class_key = key;
            summary.example_chain = build.links;
            sums[key].assign(build.raw.size(), 0.0);
        }
        summary.count += 1;
        std::vector<double>& acc = sums[key];
        for (std::size_t i = 0; i < build.raw.size(); ++i) acc[i] += build.raw[i];
    }
    std::vector<ClassSummary> out;
    out.reserve(classes.size());
    for (auto& [key, summary] : classes) {
        const std::vector<double>& acc = sums[key];
        summary.position_mean_ms.resize(acc.size());
        for (std::size_t i = 0; i < acc.size(); ++i) {
            summary.position_mean_ms[i] = acc[i] / static_cast<double>(summary.count);
        }
        out.push_back(std::move(summary));
    }
    std::sort(out.begin(), out.end(), [](const ClassSummary& a, const ClassSummary& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.class_key < b.class_key;
    });
    return out;
}

std::string format_chain(std::span<const ChainLink> chain) {
    std::string out;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (i) out += ';';
        out += to_string(chain[i].sid);
        out += '@';
        out += std::to_string(chain[i].quantized_ms);
    }
    return out;
}

}  // namespace traceguard
