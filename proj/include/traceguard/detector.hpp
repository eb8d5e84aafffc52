#pragma once

// History-quantile anomaly detector over per-period fingerprint-class counts.
// A class's normal model is the ring of its last n non-attack period counts;
// the decision rule is: attack iff count >= sensitivity * alpha, where alpha
// is the configured quantile of that history (ties flag as attack).

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "traceguard/event.hpp"
#include "traceguard/fingerprint.hpp"

namespace traceguard {

struct DetectorConfig {
    std::int64_t period_ms = 10'000;
    int history_periods = 30;    // ring capacity n
    double sensitivity = 1.5;    // p
    double quantile_q = 0.95;    // q, strictly inside (0, 1)
    int warmup_periods = 30;     // >= 1 and <= history_periods

    void validate() const;  // throws std::invalid_argument
};

// Nearest-rank quantile of a count history (rank = ceil(q*n), 1-indexed over
// the ascending sort). Throws EmptyHistory when the history is empty.
std::int64_t alpha(std::span<const std::int64_t> history, double q);

// The bare decision rule; equality counts as an attack.
bool classify(std::int64_t count, std::int64_t alpha_value, double sensitivity);

class CountRing {
  public:
    void append(std::int64_t count, std::size_t capacity);
    bool empty() const { return values_.empty(); }
    std::vector<std::int64_t> snapshot() const;  // oldest first

  private:
    std::deque<std::int64_t> values_;
};

struct NormalModel {
    std::map<std::uint64_t, CountRing> per_class;
    CountRing global;  // per-period totals; fallback baseline for new classes
    std::int64_t completed_periods = 0;
};

struct Verdict {
    std::int64_t period_index = 0;
    std::uint64_t class_key = 0;
    bool global_row = false;  // aggregate row in whole-stream mode
    std::int64_t count = 0;
    // alpha/threshold are set only when the decision rule was in force:
    // after warmup, with a baseline whose quantile is positive. Whenever
    // alpha is set, attack == (count >= threshold) exactly.
    std::optional<std::int64_t> alpha;
    std::optional<double> threshold;  // sensitivity * alpha
    bool attack = false;
};

// Fold one period of per-class counts into the model. The period index is
// model.completed_periods on entry; every class in the union of model keys
// and observed keys gets a verdict (absent observations count as zero).
// Periods flagged as attack are discarded from history, never appended.
std::vector<Verdict> step(NormalModel& model, const std::map<std::uint64_t, std::int64_t>& counts,
                          const DetectorConfig& config);

struct DetectOptions {
    DetectorConfig config;
    GroupingPolicy grouping = TaggedGrouping{};
    FingerprintOptions fingerprint;
    bool global_model = false;  // one model over the per-period total
};

struct DetectResult {
    std::vector<Verdict> verdicts;   // period asc, then class key asc
    std::int64_t origin_ms = 0;      // timestamp of the first event
    std::int64_t periods = 0;        // periods evaluated (>= 1 iff any trace)
    std::size_t traces = 0;
    std::size_t orphan_events = 0;
};

// End-to-end: group, fingerprint, count per period, run the detector over
// every period from the first event to the last.
DetectResult detect_stream(std::span<const SensorEvent> events, const DetectOptions& options);

// One line per verdict:
// period<TAB>class_key<TAB>count<TAB>alpha<TAB>threshold<TAB>ATTACK|OK
std::string render_verdicts(std::span<const Verdict> verdicts);

}  // namespace traceguard
