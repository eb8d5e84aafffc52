#include "traceguard/report.hpp"

#include <algorithm>
#include <set>

namespace traceguard {

namespace {

std::int64_t floor_div(std::int64_t value, std::int64_t divisor) {
    std::int64_t q = value / divisor;
    if ((value % divisor != 0) && ((value < 0) != (divisor < 0))) --q;
    return q;
}

}  // namespace

RunReport build_run_report(const DetectResult& result, const DetectorConfig& config,
                           const GroundTruth* truth) {
    RunReport report;
    report.config = config;
    report.periods_evaluated = result.periods;
    report.scenario = "normal";
    report.has_truth = truth != nullptr;

    std::set<std::int64_t> flagged;
    for (const Verdict& v : result.verdicts) {
        if (v.attack) flagged.insert(v.period_index);
    }
    report.attack_periods.assign(flagged.begin(), flagged.end());

    if (!truth) return report;
    if (!truth->intervals.empty()) report.scenario = truth->intervals.front().kind;

    // Periods covered by some truth interval, measured on the same clock the
    // detector used (periods counted from the first event).
    std::set<std::int64_t> covered;
    for (const AttackInterval& interval : truth->intervals) {
        const std::int64_t lo = floor_div(interval.onset_ms - result.origin_ms, config.period_ms);
        const std::int64_t hi = floor_div(interval.end_ms - result.origin_ms, config.period_ms);
        for (std::int64_t p = lo; p <= hi; ++p) covered.insert(p);
    }
    for (std::int64_t period : report.attack_periods) {
        if (!covered.count(period)) ++report.false_positive_periods;
    }

    if (!truth->intervals.empty()) {
        const std::int64_t onset_period =
            floor_div(truth->intervals.front().onset_ms - result.origin_ms, config.period_ms);
        for (std::int64_t period : report.attack_periods) {
            if (period >= onset_period) {
                report.latency_periods = period - onset_period;
                break;
            }
        }
    }
    return report;
}

std::string render_run_report(const RunReport& report) {
    std::string out;
    out += "# scenario " + report.scenario + "\n";
    out += "# periods " + std::to_string(report.periods_evaluated) + "\n";
    out += "# attack_periods ";
    if (report.attack_periods.empty()) {
        out += "-";
    } else {
        for (std::size_t i = 0; i < report.attack_periods.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(report.attack_periods[i]);
        }
    }
    out += "\n# latency_periods ";
    out += report.latency_periods ? std::to_string(*report.latency_periods) : "-";
    out += "\n# false_positive_periods ";
    out += report.has_truth ? std::to_string(report.false_positive_periods) : "-";
    out += "\n# config period_ms=" + std::to_string(report.config.period_ms) +
           " history=" + std::to_string(report.config.history_periods) +
           " sensitivity=" + render_decimal(SensorValue::numeric(report.config.sensitivity)) +
           " quantile=" + render_decimal(SensorValue::numeric(report.config.quantile_q)) +
           " warmup=" + std::to_string(report.config.warmup_periods) + "\n";
    return out;
}

}  // namespace traceguard
