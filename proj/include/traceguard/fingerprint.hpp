#pragma once

// Request grouping and fingerprint extraction. A fingerprint is the ordered
// chain of (SID, quantized duration) pairs of one request; its class key is a
// stable 64-bit hash, so two requests land in the same class exactly when
// their chains agree link by link.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "traceguard/event.hpp"

namespace traceguard {

struct EmptyTrace : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Marker events the built-in tracer emits at the head of each request block.
inline constexpr const char* kRequestMarkerPackage = "tracer.request";
inline constexpr const char* kRequestMarkerClass = "Boundary";

struct RequestTrace {
    std::uint64_t request_id = 0;
    std::vector<SensorEvent> events;  // marker first when grouped by tag
};

// Group on marker events (package + class match); the marker opens a request
// and everything up to the next marker belongs to it.
struct TaggedGrouping {
    std::string marker_package = kRequestMarkerPackage;
    std::string marker_class = kRequestMarkerClass;
};

// Group by idle gaps: a new request starts when the timestamp advances by
// more than gap_ms since the previous event.
struct GapGrouping {
    std::int64_t gap_ms = 0;
};

using GroupingPolicy = std::variant<TaggedGrouping, GapGrouping>;

// Events before the first marker under tagged grouping are orphans: they
// form one trace of their own, and their number is reported so callers can
// surface it.
struct GroupingResult {
    std::vector<RequestTrace> traces;
    std::size_t orphan_events = 0;
};

GroupingResult group_requests(std::span<const SensorEvent> events, const GroupingPolicy& policy);

struct ChainLink {
    SensorId sid;
    std::int64_t quantized_ms = 0;

    bool operator==(const ChainLink&) const = default;
};

struct Fingerprint {
    std::vector<ChainLink> chain;
    std::uint64_t class_key = 0;
    std::int64_t first_timestamp_ms = 0;  // of the whole trace, markers included
};

struct FingerprintOptions {
    std::int64_t bucket_ms = 3;
    // When set, State32/Text events join the chain with quantized_ms = 0.
    bool include_non_duration_events = false;
};

// Throws EmptyTrace when no event qualifies for the chain.
Fingerprint extract_fingerprint(const RequestTrace& trace, const FingerprintOptions& options = {});

std::uint64_t chain_hash(std::span<const ChainLink> chain);

// 16 lowercase hex digits, zero padded — the printable form of a class key.
std::string format_class_key(std::uint64_t key);

struct PeriodClass {
    std::int64_t period_index = 0;
    std::uint64_t class_key = 0;

    auto operator<=>(const PeriodClass&) const = default;
};

// Count fingerprints per (period, class); the period index comes from the
// trace's first timestamp relative to origin_ms.
std::map<PeriodClass, std::int64_t> fingerprint_class_counts(std::span<const Fingerprint> prints,
                                                             std::int64_t period_ms,
                                                             std::int64_t origin_ms);

// Per-class aggregate over a set of traces: membership count, the exemplar
// chain, and the mean raw duration per chain position (plot-ready data).
struct ClassSummary {
    std::uint64_t class_key = 0;
    std::int64_t count = 0;
    std::vector<ChainLink> example_chain;
    std::vector<double> position_mean_ms;
};

std::vector<ClassSummary> summarize_classes(std::span<const RequestTrace> traces,
                                            const FingerprintOptions& options = {});

// Compact, log-friendly rendering of a chain: sid@bucket;sid@bucket;...
std::string format_chain(std::span<const ChainLink> chain);

}  // namespace traceguard
