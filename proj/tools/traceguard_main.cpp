// traceguard: workload simulation, request fingerprinting, and detection
// over sensor logs, from one binary.
//
// Exit codes: 0 success (detect: no attack flagged), 1 operational or usage
// error, 2 (detect only) at least one attack verdict.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "traceguard/detector.hpp"
#include "traceguard/event.hpp"
#include "traceguard/experiments.hpp"
#include "traceguard/fingerprint.hpp"
#include "traceguard/report.hpp"
#include "traceguard/simulator.hpp"

namespace {

using namespace traceguard;

ScenarioKind parse_kind(const std::string& text) {
    if (text == "normal") return ScenarioKind::normal;
    if (text == "probe") return ScenarioKind::probe;
    if (text == "timing") return ScenarioKind::timing;
    throw std::invalid_argument("unknown scenario '" + text + "'");
}

GroupingPolicy parse_grouping(const std::string& text) {
    if (text == "tagged") return TaggedGrouping{};
    if (text.rfind("gap:", 0) == 0) {
        const std::string ms_text = text.substr(4);
        std::size_t used = 0;
        std::int64_t gap_ms = 0;
        try {
            gap_ms = std::stoll(ms_text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != ms_text.size() || ms_text.empty() || gap_ms <= 0)
            throw std::invalid_argument("grouping gap must be a positive millisecond count");
        return GapGrouping{gap_ms};
    }
    throw std::invalid_argument("grouping must be 'tagged' or 'gap:<ms>', got '" + text + "'");
}

struct SimulateArgs {
    std::string scenario = "normal";
    std::string out;
    std::string page;
    std::optional<std::int64_t> requests;
    std::optional<std::int64_t> duration_ms;
    ScenarioSpec spec;
};

int run_simulate(const SimulateArgs& args) {
    ScenarioSpec spec = args.spec;
    spec.kind = parse_kind(args.scenario);
    if (!args.page.empty()) spec.page = args.page;
    if (args.requests) spec.request_budget = *args.requests;
    if (args.duration_ms) spec.duration_ms = *args.duration_ms;
    spec.validate();

    const SimulationResult result = simulate(spec);
    write_simulation(result, args.out);
    std::cerr << "wrote " << result.events.size() << " events to " << args.out << " and "
              << result.truth.intervals.size() << " truth interval(s) to " << args.out
              << ".truth\n";
    return 0;
}

struct DetectArgs {
    std::string in;
    std::string truth;
    std::string grouping = "tagged";
    DetectorConfig config;
    std::int64_t warmup = -1;  // default: same as history
    FingerprintOptions fingerprint;
    bool global_model = false;
};

int run_detect(const DetectArgs& args) {
    DetectOptions options;
    options.config = args.config;
    options.config.warmup_periods = args.warmup >= 0 ? args.warmup : options.config.history_periods;
    options.config.validate();
    options.grouping = parse_grouping(args.grouping);
    options.fingerprint = args.fingerprint;
    options.global_model = args.global_model;

    const ReadResult log = read_log_file(args.in);
    for (const auto& warning : log.warnings) std::cerr << "warning: " << warning << "\n";

    const DetectResult result = detect_stream(log.events, options);
    std::cout << render_verdicts(result.verdicts);

    if (!args.truth.empty()) {
        const GroundTruth truth = read_truth_file(args.truth);
        const RunReport report = build_run_report(result, options.config, &truth);
        std::cout << render_run_report(report);
    }

    for (const auto& verdict : result.verdicts) {
        if (verdict.attack) return 2;
    }
    return 0;
}

struct FingerprintArgs {
    std::string in;
    std::string grouping = "tagged";
    std::string plot_out;
    FingerprintOptions options;
};

int run_fingerprint(const FingerprintArgs& args) {
    const ReadResult log = read_log_file(args.in);
    for (const auto& warning : log.warnings) std::cerr << "warning: " << warning << "\n";

    const GroupingResult grouped = group_requests(log.events, parse_grouping(args.grouping));
    const std::vector<ClassSummary> classes = summarize_classes(grouped.traces, args.options);

    for (const auto& entry : classes) {
        std::cout << format_class_key(entry.class_key) << "\t" << entry.count << "\t"
                  << format_chain(entry.example_chain) << "\n";
    }
    // Per-class profile points (chain position vs mean duration), '#'-prefixed
    // so the class listing above stays a clean three-column table.
    for (const auto& entry : classes) {
        for (std::size_t i = 0; i < entry.position_mean_ms.size(); ++i) {
            std::cout << "# plot\t" << format_class_key(entry.class_key) << "\t" << i << "\t"
                      << render_decimal(SensorValue::numeric(entry.position_mean_ms[i])) << "\t"
                      << to_string(entry.example_chain[i].sid) << "\n";
        }
    }
    if (!args.plot_out.empty()) {
        for (const auto& entry : classes) {
            const std::string path = args.plot_out + format_class_key(entry.class_key) + ".tsv";
            std::ofstream out(path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write plot file: " + path);
            out << "position\tmean_ms\tsid\n";
            for (std::size_t i = 0; i < entry.position_mean_ms.size(); ++i) {
                out << i << "\t" << render_decimal(SensorValue::numeric(entry.position_mean_ms[i]))
                    << "\t" << to_string(entry.example_chain[i].sid) << "\n";
            }
        }
    }
    return 0;
}

struct BenchArgs {
    std::int64_t requests = 10'000;
    int runs = 1;
    std::uint64_t seed = 1;
};

int run_bench_cmd(const BenchArgs& args) {
    bool conserved = true;
    for (int i = 0; i < args.runs; ++i) {
        const BenchRun run = run_bench(args.seed + static_cast<std::uint64_t>(i), args.requests);
        std::cout << render_bench(run);
        conserved = conserved && run.parsed_events == run.generated_events;
    }
    if (!conserved) {
        std::cerr << "error: parsed event count diverged from generated count\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensor-log workload simulation, fingerprinting, and anomaly detection"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "Generate a deterministic workload log");
    sim->add_option("--scenario", sim_args.scenario, "normal, probe, or timing")
        ->check(CLI::IsMember({"normal", "probe", "timing"}));
    sim->add_option("--seed", sim_args.spec.seed, "RNG seed (default 1)");
    sim->add_option("--out", sim_args.out, "Log file to write (truth goes to <out>.truth)")
        ->required();
    CLI::Option* req_opt =
        sim->add_option("--requests", sim_args.requests, "Stop after this many background requests");
    CLI::Option* dur_opt =
        sim->add_option("--duration-ms", sim_args.duration_ms, "Scenario length (default 360000)");
    req_opt->excludes(dur_opt);
    sim->add_option("--page", sim_args.page, "Replay one page with a single visitor");
    sim->add_option("--users", sim_args.spec.users, "Concurrent visitors (default 20)");
    sim->add_option("--think-ms", sim_args.spec.think_ms, "Mean think time (default 1000)");
    sim->add_option("--jitter-ms", sim_args.spec.jitter_ms, "Think-time jitter (default 100)");
    sim->add_option("--onset-ms", sim_args.spec.attack_onset_ms,
                    "Attack start for probe/timing (default 320000)");
    sim->add_option("--rate", sim_args.spec.attack_rate_per_s,
                    "Attack requests per second (default 50)");
    sim->add_option("--dictionary", sim_args.spec.dictionary_size,
                    "Attack dictionary size (default 1000)");
    sim->add_option("--agents", sim_args.spec.attack_user_agents,
                    "Distinct attack user agents (default 50)");
    sim->add_option("--ips", sim_args.spec.attack_ips, "Distinct attack source IPs (default 20)");

    DetectArgs det_args;
    CLI::App* det = app.add_subcommand("detect", "Run the detector over a log");
    det->add_option("--in", det_args.in, "Log file to analyse")->required();
    det->add_option("--truth", det_args.truth, "Ground-truth sidecar; appends a run summary");
    det->add_option("--period-ms", det_args.config.period_ms, "Period length (default 10000)");
    det->add_option("--history", det_args.config.history_periods,
                    "Baseline window in periods (default 30)");
    det->add_option("--sensitivity", det_args.config.sensitivity, "Threshold factor p (default 1.5)");
    det->add_option("--quantile", det_args.config.quantile_q, "Baseline quantile q (default 0.95)");
    det->add_option("--warmup", det_args.warmup, "Silent start-up periods (default: history)");
    det->add_option("--grouping", det_args.grouping, "'tagged' or 'gap:<ms>' (default tagged)");
    det->add_option("--bucket-ms", det_args.fingerprint.bucket_ms,
                    "Duration quantization bucket (default 3)");
    det->add_flag("--include-non-durations", det_args.fingerprint.include_non_duration_events,
                  "Let state/text events join the fingerprint chain");
    det->add_flag("--global-model", det_args.global_model,
                  "Model the whole stream instead of per-class");

    FingerprintArgs fp_args;
    CLI::App* fp = app.add_subcommand("fingerprint", "List request classes in a log");
    fp->add_option("--in", fp_args.in, "Log file to analyse")->required();
    fp->add_option("--bucket-ms", fp_args.options.bucket_ms,
                   "Duration quantization bucket (default 3)");
    fp->add_flag("--include-non-durations", fp_args.options.include_non_duration_events,
                 "Let state/text events join the fingerprint chain");
    fp->add_option("--grouping", fp_args.grouping, "'tagged' or 'gap:<ms>' (default tagged)");
    fp->add_option("--plot-out", fp_args.plot_out,
                   "Path prefix for per-class profile TSV files");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "Measure end-to-end throughput");
    bench->add_option("--requests", bench_args.requests, "Requests per run (default 10000)");
    bench->add_option("--runs", bench_args.runs, "Consecutive runs (default 1)")
        ->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_args.seed, "Seed of the first run (default 1)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return run_simulate(sim_args);
        if (*det) return run_detect(det_args);
        if (*fp) return run_fingerprint(fp_args);
        if (*bench) return run_bench_cmd(bench_args);
    } catch (const MalformedRecord& err) {
        std::cerr << "error: line " << err.line_number << ": " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 1;
}
