#pragma once

// Run summary: what the detector flagged, measured against ground truth when
// one is available. Rendered as '#' comment lines so it can trail a verdict
// table in the same output without breaking tab-separated consumers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "traceguard/detector.hpp"
#include "traceguard/simulator.hpp"

namespace traceguard {

struct RunReport {
    std::string scenario;  // kind of the first truth interval, else "normal"
    DetectorConfig config;
    std::int64_t periods_evaluated = 0;
    std::vector<std::int64_t> attack_periods;  // distinct, ascending
    bool has_truth = false;
    // Periods from the first truth interval's onset to the first attack
    // verdict at or after it; unset without truth or without detection.
    std::optional<std::int64_t> latency_periods;
    // Attack periods outside every truth interval; meaningful only with
    // truth (0 otherwise).
    std::int64_t false_positive_periods = 0;
};

RunReport build_run_report(const DetectResult& result, const DetectorConfig& config,
                           const GroundTruth* truth);

std::string render_run_report(const RunReport& report);

}  // namespace traceguard
