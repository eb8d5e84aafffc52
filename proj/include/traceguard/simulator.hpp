#pragma once

// Deterministic workload generator: an instrumented demo web shop under
// normal browsing, under a login-probing burst, and under a timing-attack
// sweep. Identical specs produce byte-identical logs; attack runs carry
// machine-readable ground truth.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "traceguard/event.hpp"
#include "traceguard/fingerprint.hpp"
#include "traceguard/random.hpp"

namespace traceguard {

struct MethodTemplate {
    SensorId sid;
    double base_duration_ms = 1.0;
    double noise_ms = 0.0;  // uniform half-width
};

struct PageTemplate {
    std::string name;
    SensorId marker_sid;  // State32 boundary sensor; value = request ordinal
    std::vector<MethodTemplate> chain;
};

struct SiteModel {
    std::vector<PageTemplate> pages;

    const PageTemplate* find(std::string_view name) const;
    void validate() const;
};

// The built-in demo site. Page names below are stable identifiers.
namespace pages {
inline constexpr const char* kStartAnon = "start_anon";
inline constexpr const char* kStartAuth = "start_auth";
inline constexpr const char* kLoginOk = "login_ok";
inline constexpr const char* kLoginWrongPassword = "login_wrongpw";
inline constexpr const char* kLoginUnknownUser = "login_unknown";
inline constexpr const char* kDashboard = "dashboard";
inline constexpr const char* kProducts = "products";
inline constexpr const char* kProductDetail = "product_detail";
inline constexpr const char* kSearch = "search";
inline constexpr const char* kAbout = "about";
}  // namespace pages

SiteModel default_site();

enum class ScenarioKind { normal, probe, timing };

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::normal;
    std::uint64_t seed = 1;
    std::int64_t duration_ms = 360'000;
    // When set, generation stops after this many background requests instead
    // of at duration_ms.
    std::optional<std::int64_t> request_budget;
    // When set, a single sequential visitor replays exactly this page.
    std::optional<std::string> page;
    int users = 20;
    std::int64_t think_ms = 1'000;
    std::int64_t jitter_ms = 100;

    // Attack knobs (probe/timing kinds).
    std::int64_t attack_onset_ms = 320'000;
    double attack_rate_per_s = 50.0;
    int dictionary_size = 1'000;
    int attack_user_agents = 50;
    int attack_ips = 20;

    void validate() const;  // throws std::invalid_argument
};

struct AttackInterval {
    std::int64_t onset_ms = 0;
    std::int64_t end_ms = 0;
    std::string kind;
};

struct GroundTruth {
    std::vector<AttackInterval> intervals;  // empty for normal runs
};

struct SimulationResult {
    std::vector<SensorEvent> events;  // ordered by (timestamp, count)
    GroundTruth truth;
};

SimulationResult simulate(const ScenarioSpec& spec);
SimulationResult simulate(const ScenarioSpec& spec, const SiteModel& site);

// One realized duration per chain position: base + uniform(-noise, +noise),
// rounded to whole milliseconds. Values below 1 ms are kept here and
// suppressed at emission, mirroring sensors that fall under the timestamp
// resolution.
std::vector<std::int64_t> realize_durations(const PageTemplate& page, DeterministicRandom& rng);

// The page a tagged trace belongs to (its marker's method segment).
std::optional<std::string> trace_page(const RequestTrace& trace);

// Sidecar format: one interval per line, `onset_ms<TAB>end_ms<TAB>kind`.
std::string format_truth(const GroundTruth& truth);
GroundTruth parse_truth(std::istream& in);
GroundTruth read_truth_file(const std::filesystem::path& path);

// Writes the log to `log_path` and the ground truth to `log_path + ".truth"`.
void write_simulation(const SimulationResult& result, const std::filesystem::path& log_path);

}  // namespace traceguard
