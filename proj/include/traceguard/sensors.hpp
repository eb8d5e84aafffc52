#pragma once

// Derived-sensor stages: alert bounds, regex filters and the two aggregation
// flavors. Every stage is a pure transformer over ordered events, so a
// pipeline built from them is deterministic in the input order alone.

#include <optional>
#include <regex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "traceguard/event.hpp"

namespace traceguard {

struct TypeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AlertSensorConfig {
    SensorId target_sid;
    std::optional<double> lower;
    std::optional<double> upper;

    // At least one bound. lower == upper is legal and pins one value.
    void validate() const;
};

enum class BoundKind { lower, upper };

struct Alert {
    SensorId sid;
    std::int64_t timestamp_ms = 0;
    BoundKind violated_bound = BoundKind::lower;
    double observed = 0;
};

// Bounds are inclusive-pass: an alert fires only on a strict violation.
std::optional<Alert> evaluate_alert(const AlertSensorConfig& cfg, const SensorEvent& event);

class FilterSensorConfig {
  public:
    // Throws std::regex_error if the pattern does not compile and
    // std::invalid_argument if output and target coincide.
    FilterSensorConfig(SensorId target_sid, std::string pattern, SensorId output_sid);

    const SensorId& target_sid() const { return target_sid_; }
    const SensorId& output_sid() const { return output_sid_; }
    const std::string& pattern() const { return pattern_; }
    const std::regex& compiled() const { return compiled_; }

  private:
    SensorId target_sid_;
    std::string pattern_;
    SensorId output_sid_;
    std::regex compiled_;
};

// Re-labels the event with output_sid when its decimal rendering matches the
// pattern (search semantics); timestamp, count and value pass through.
std::optional<SensorEvent> apply_filter(const FilterSensorConfig& cfg, const SensorEvent& event);

enum class OnceOp { sum, product, log_scale };

struct OneTimeAggConfig {
    std::vector<SensorId> input_sids;
    OnceOp op = OnceOp::sum;
    SensorId output_sid;

    void validate() const;  // distinct inputs; >=2, or exactly 1 for log_scale
};

// Combines one event per input SID, all sharing one alignment timestamp, into
// a single Numeric64 output event at that timestamp.
SensorEvent aggregate_once(const OneTimeAggConfig& cfg, std::span<const SensorEvent> inputs);

enum class WindowOp { mean, quantile };

struct ContinuousAggConfig {
    SensorId input_sid;
    std::int64_t window_ms = 0;
    WindowOp op = WindowOp::mean;
    double quantile_q = 0.5;  // used when op == quantile
    SensorId output_sid;

    void validate() const;
};

// Tumbling windows of window_ms anchored at the first matching event; each
// non-empty window emits one output event timestamped at the window end.
std::vector<SensorEvent> aggregate_window(const ContinuousAggConfig& cfg,
                                          std::span<const SensorEvent> stream);

}  // namespace traceguard
