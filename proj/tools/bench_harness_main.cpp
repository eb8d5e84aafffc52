// bench-harness: canned end-to-end experiments with pass/fail thresholds.
//
//     bench-harness run <name> [--seeds 1..10]
//
// Names: fingerprint-stability, probe-detection, timing-detection, overhead.
// Exit codes: 0 all seeds passed, 1 at least one seed failed, 2 operational
// or usage error.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "traceguard/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"End-to-end experiment runner"};
    app.require_subcommand(1);

    std::string name;
    std::string seeds_text = "1..10";
    CLI::App* run = app.add_subcommand("run", "Run one named experiment");
    run->add_option("name", name, "Experiment name")
        ->required()
        ->check(CLI::IsMember({traceguard::kExperimentFingerprintStability,
                               traceguard::kExperimentProbeDetection,
                               traceguard::kExperimentTimingDetection,
                               traceguard::kExperimentOverhead}));
    run->add_option("--seeds", seeds_text, "Seed set: '7', '1,2,5', or '1..10' (default 1..10)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const std::vector<std::uint64_t> seeds = traceguard::parse_seed_set(seeds_text);
        const traceguard::ExperimentResult result = traceguard::run_experiment(name, seeds);
        std::cout << traceguard::render_experiment(result);
        return result.pass ? 0 : 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}
