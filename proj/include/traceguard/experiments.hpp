#pragma once

// Experiment harness: the canned end-to-end runs (fingerprint stability,
// probe detection, timing detection, throughput) with programmatic pass
// thresholds, shared by the bench-harness CLI and the acceptance tests.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace traceguard {

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool pass = false;
    std::optional<std::int64_t> latency_periods;
    std::int64_t false_positives = 0;
    // Named measurements backing the verdict (gap_ms, login_classes, ...).
    std::map<std::string, double> metrics;
    std::string detail;
};

struct ExperimentResult {
    std::string name;
    std::vector<SeedOutcome> outcomes;
    bool pass = false;  // true only if every seed passed
};

inline constexpr const char* kExperimentFingerprintStability = "fingerprint-stability";
inline constexpr const char* kExperimentProbeDetection = "probe-detection";
inline constexpr const char* kExperimentTimingDetection = "timing-detection";
inline constexpr const char* kExperimentOverhead = "overhead";

// Throws std::invalid_argument for an unknown name.
ExperimentResult run_experiment(const std::string& name,
                                const std::vector<std::uint64_t>& seeds);

std::string render_experiment(const ExperimentResult& result);

// Seed set notation: "7", "1,2,5", or an inclusive range "1..10".
std::vector<std::uint64_t> parse_seed_set(const std::string& text);

// One in-process throughput run: simulate `requests` background requests,
// serialize, parse back, detect with defaults.
struct BenchRun {
    std::uint64_t seed = 0;
    std::int64_t requests = 0;
    std::size_t generated_events = 0;
    std::size_t parsed_events = 0;  // conservation: must equal generated
    std::size_t traces = 0;
    std::size_t verdict_rows = 0;
    std::size_t attack_verdicts = 0;
    double simulate_seconds = 0;
    double roundtrip_seconds = 0;  // serialize + parse
    double detect_seconds = 0;
    double total_seconds = 0;
    double events_per_second = 0;
};

BenchRun run_bench(std::uint64_t seed, std::int64_t requests);

std::string render_bench(const BenchRun& run);

}  // namespace traceguard
