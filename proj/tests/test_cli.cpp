// Process-level checks of the two command-line tools. Binary locations come
// from TRACEGUARD_BIN and BENCH_HARNESS_BIN (set by the test harness).

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

std::string required_env(const char* name) {
    const char* value = std::getenv(name);
    REQUIRE_MESSAGE(value != nullptr, name << " must point at the built binary");
    return value;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Scratch space shared by the whole suite; recreated on first use.
const fs::path& scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "traceguard-cli-tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run(const std::string& command) {
    static int sequence = 0;
    const fs::path out_path = scratch_dir() / ("stdout." + std::to_string(sequence));
    const fs::path err_path = scratch_dir() / ("stderr." + std::to_string(sequence));
    ++sequence;

    const std::string full =
        command + " > \"" + out_path.string() + "\" 2> \"" + err_path.string() + "\"";
    const int raw = std::system(full.c_str());

    RunResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

std::string shquote(const fs::path& path) { return "\"" + path.string() + "\""; }

// A short probe log reused across detection tests.
const fs::path& probe_log() {
    static const fs::path path = [] {
        const fs::path log = scratch_dir() / "probe.log";
        const RunResult r = run(required_env("TRACEGUARD_BIN") +
                                std::string(" simulate --scenario probe --seed 3 "
                                            "--duration-ms 60000 --onset-ms 30000 --out ") +
                                shquote(log));
        REQUIRE_MESSAGE(r.exit_code == 0, r.err);
        return log;
    }();
    return path;
}

std::size_t count_lines_not_starting_with(const std::string& text, char prefix) {
    std::size_t lines = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != prefix) ++lines;
    return lines;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("simulate is byte-deterministic and writes the truth sidecar") {
        const std::string bin = required_env("TRACEGUARD_BIN");
        const fs::path first = scratch_dir() / "det-a.log";
        const fs::path second = scratch_dir() / "det-b.log";
        const std::string flags =
            " simulate --scenario probe --seed 7 --duration-ms 60000 --onset-ms 30000 --out ";

        CHECK(run(bin + flags + shquote(first)).exit_code == 0);
        CHECK(run(bin + flags + shquote(second)).exit_code == 0);

        const std::string log_a = slurp(first);
        CHECK(!log_a.empty());
        CHECK(log_a == slurp(second));
        CHECK(fs::exists(first.string() + ".truth"));
        CHECK(slurp(first.string() + ".truth") == slurp(second.string() + ".truth"));
        CHECK(slurp(first.string() + ".truth").find("probe") != std::string::npos);
    }

    TEST_CASE("simulate rejects missing --out and unknown scenarios") {
        const std::string bin = required_env("TRACEGUARD_BIN");
        CHECK(run(bin + " simulate --scenario normal").exit_code != 0);
        CHECK(run(bin + " simulate --scenario nonsense --out " +
                  shquote(scratch_dir() / "x.log"))
                  .exit_code != 0);
        CHECK(run(bin + " simulate").exit_code != 0);
    }

    TEST_CASE("default flags: a normal log stays clean, a probe log trips") {
        const std::string bin = required_env("TRACEGUARD_BIN");
        const fs::path normal_log = scratch_dir() / "normal-full.log";
        REQUIRE(run(bin + " simulate --scenario normal --seed 1 --out " + shquote(normal_log))
                    .exit_code == 0);
        const RunResult clean = run(bin + " detect --in " + shquote(normal_log));
        CHECK(clean.exit_code == 0);
        CHECK(clean.out.find("ATTACK") == std::string::npos);

        const fs::path full_probe = scratch_dir() / "probe-full.log";
        REQUIRE(run(bin + " simulate --scenario probe --seed 1 --out " + shquote(full_probe))
                    .exit_code == 0);
        CHECK(run(bin + " detect --in " + shquote(full_probe)).exit_code == 2);
    }

    TEST_CASE("detect exits 2 on a flagged probe and reports against truth") {
        const std::string bin = required_env("TRACEGUARD_BIN");
        const fs::path log = probe_log();
        const RunResult r =
            run(bin + " detect --in " + shquote(log) + " --truth " + shquote(log.string() + ".truth") +
                " --period-ms 1000 --history 10 --warmup 10");
        CHECK(r.exit_code == 2);
        CHECK(r.out.find("ATTACK") != std::string::npos);
        CHECK(r.out.find("# scenario probe") != std::string::npos);
        CHECK(r.out.find("# latency_periods ") != std::string::npos);
    }

    TEST_CASE("detect exits 0 when nothing clears the threshold") {
        const std::string bin = required_env("TRACEGUARD_BIN");
        const RunResult r = run(bin + " detect --in " + shquote(probe_log()) +
                                " --period-ms 1000 --history 10 --warmup 10 "
                                "--sensitivity 1000000000");
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("ATTACK") == std::string::npos);
        CHECK(r.out.find("OK") != std::string::npos);
    }

    TEST_CASE("detect exits 1 on operational errors") {
        const std::string bin = required_env("TRACEGUARD_BIN");
        CHECK(run(bin + " detect --in " + shquote(scratch_dir() / "missing.log")).exit_code == 1);

        const fs::path garbled = scratch_dir() / "garbled.log";
        std::ofstream(garbled) << "this is not a record\n";
        const RunResult r = run(bin + " detect --in " + shquote(garbled));
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("line 1") != std::string::npos);

        CHECK(run(bin + " detect --in " + shquote(probe_log()) + " --grouping bogus").exit_code ==
              1);
        CHECK(run(bin + " detect --in " + shquote(probe_log()) + " --quantile 1.5").exit_code == 1);
    }

    TEST_CASE("fingerprint lists one class for a single-page replay") {
        const std::string bin = required_env("TRACEGUARD_BIN");
        const fs::path log = scratch_dir() / "single.log";
        REQUIRE(run(bin + " simulate --page start_anon --requests 50 --seed 2 --out " +
                    shquote(log))
                    .exit_code == 0);

        const RunResult r = run(bin + " fingerprint --in " + shquote(log));
        CHECK(r.exit_code == 0);
        CHECK(count_lines_not_starting_with(r.out, '#') == 1);
        CHECK(r.out.find("\t50\t") != std::string::npos);
        CHECK(r.out.find("# plot\t") != std::string::npos);

        const fs::path prefix = scratch_dir() / "plot-";
        const RunResult with_files =
            run(bin + " fingerprint --in " + shquote(log) + " --plot-out " + shquote(prefix));
        CHECK(with_files.exit_code == 0);
        bool wrote_plot = false;
        for (const auto& entry : fs::directory_iterator(scratch_dir()))
            if (entry.path().filename().string().rfind("plot-", 0) == 0) wrote_plot = true;
        CHECK(wrote_plot);
    }

    TEST_CASE("fingerprint of an empty log succeeds with empty output") {
        const std::string bin = required_env("TRACEGUARD_BIN");
        const fs::path log = scratch_dir() / "empty.log";
        std::ofstream(log).flush();
        const RunResult r = run(bin + " fingerprint --in " + shquote(log));
        CHECK(r.exit_code == 0);
        CHECK(r.out.empty());
    }

    TEST_CASE("bench prints one measurement row per run") {
        const std::string bin = required_env("TRACEGUARD_BIN");
        const RunResult r = run(bin + " bench --requests 300 --runs 2 --seed 5");
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("events_per_s") != std::string::npos);
        CHECK(count_lines_not_starting_with(r.out, '#') == 4);  // 2 x (header + row)
    }

    TEST_CASE("bench is deterministic in everything but the timings") {
        const std::string bin = required_env("TRACEGUARD_BIN");
        const auto counts_columns = [&] {
            const RunResult r = run(bin + " bench --requests 300 --seed 5");
            REQUIRE(r.exit_code == 0);
            std::istringstream in(r.out);
            std::string header, row;
            REQUIRE(std::getline(in, header));
            REQUIRE(std::getline(in, row));
            // seed, requests, events, traces, verdicts, attacks: the first
            // six columns; the timing columns after them vary run to run.
            std::string prefix;
            std::istringstream fields(row);
            std::string field;
            for (int i = 0; i < 6 && std::getline(fields, field, '\t'); ++i)
                prefix += field + "\t";
            return prefix;
        };
        CHECK(counts_columns() == counts_columns());
    }

    TEST_CASE("bench-harness runs a named experiment and reports per seed") {
        const std::string harness = required_env("BENCH_HARNESS_BIN");
        const RunResult r = run(harness + " run fingerprint-stability --seeds 1..3");
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("# experiment fingerprint-stability") != std::string::npos);
        CHECK(r.out.find("# result PASS") != std::string::npos);
        CHECK(count_lines_not_starting_with(r.out, '#') == 4);  // header + 3 seed rows
    }

    TEST_CASE("bench-harness rejects unknown names and bad seed sets") {
        const std::string harness = required_env("BENCH_HARNESS_BIN");
        CHECK(run(harness + " run no-such-experiment").exit_code == 2);
        CHECK(run(harness + " run overhead --seeds 9..1").exit_code == 2);
        CHECK(run(harness).exit_code == 2);
    }
}
