#include "traceguard/detector.hpp"

#include <set>

#include "traceguard/quantile.hpp"

namespace traceguard {

void DetectorConfig::validate() const {
    if (period_ms <= 0) throw std::invalid_argument("period must be positive");
    if (history_periods < 1) throw std::invalid_argument("history needs at least one period");
    if (!(sensitivity > 0.0)) throw std::invalid_argument("sensitivity must be positive");
    if (!(quantile_q > 0.0 && quantile_q < 1.0)) {
        throw std::invalid_argument("quantile must lie strictly between 0 and 1");
    }
    if (warmup_periods < 1) throw std::invalid_argument("warmup needs at least one period");
    if (warmup_periods > history_periods) {
        throw std::invalid_argument("warmup cannot exceed the history length");
    }
}

std::int64_t alpha(std::span<const std::int64_t> history, double q) {
    return nearest_rank_quantile(std::vector<std::int64_t>(history.begin(), history.end()), q);
}

bool classify(std::int64_t count, std::int64_t alpha_value, double sensitivity) {
    return static_cast<double>(count) >= sensitivity * static_cast<double>(alpha_value);
}

void CountRing::append(std::int64_t count, std::size_t capacity) {
    if (capacity == 0) throw std::invalid_argument("ring capacity must be positive");
    values_.push_back(count);
    while (values_.size() > capacity) values_.pop_front();
}

std::vector<std::int64_t> CountRing::snapshot() const {
    return std::vector<std::int64_t>(values_.begin(), values_.end());
}

namespace {

struct Decision {
    std::optional<std::int64_t> alpha_value;
    std::optional<double> threshold;
    bool attack = false;
};

// One class-period decision against a baseline history. A verdict carries
// alpha/threshold only when the rule is actually in force — outside warmup
// and with a positive baseline quantile — so attack always equals
// count >= threshold whenever alpha is present. A zero quantile means the
// baseline is dormancy; scaling it yields threshold 0, which would alarm on
// any count forever, so it is treated like having no baseline at all.
Decision decide(std::span<const std::int64_t> history, std::int64_t count,
                const DetectorConfig& config, bool in_warmup) {
    Decision d;
    if (in_warmup || history.empty()) return d;
    const std::int64_t a = alpha(history, config.quantile_q);
    if (a == 0) return d;
    d.alpha_value = a;
    d.threshold = config.sensitivity * static_cast<double>(a);
    d.attack = classify(count, a, config.sensitivity);
    return d;
}

}  // namespace

std::vector<Verdict> step(NormalModel& model, const std::map<std::uint64_t, std::int64_t>& counts,
                          const DetectorConfig& config) {
    config.validate();
    const std::int64_t period = model.completed_periods;
    const bool in_warmup = period < config.warmup_periods;
    const auto capacity = static_cast<std::size_t>(config.history_periods);

    std::set<std::uint64_t> keys;
    for (const auto& [key, ring] : model.per_class) keys.insert(key);
    std::int64_t total = 0;
    for (const auto& [key, count] : counts) {
        keys.insert(key);
        total += count;
    }

    std::vector<Verdict> verdicts;
    verdicts.reserve(keys.size());
    bool any_attack = false;
    const std::vector<std::int64_t> global_history = model.global.snapshot();

    for (std::uint64_t key : keys) {
        const auto hit = counts.find(key);
        const std::int64_t count = hit == counts.end() ? 0 : hit->second;

        std::vector<std::int64_t> own;
        if (auto it = model.per_class.find(key); it != model.per_class.end()) {
            own = it->second.snapshot();
        }
        // New classes have no history of their own; the per-period total
        // buffer stands in, so a first-seen burst is still comparable.
        const std::span<const std::int64_t> baseline =
            own.empty() ? std::span<const std::int64_t>(global_history)
                        : std::span<const std::int64_t>(own);
        const Decision d = decide(baseline, count, config, in_warmup);

        Verdict v;
        v.period_index = period;
        v.class_key = key;
        v.count = count;
        v.alpha = d.alpha_value;
        v.threshold = d.threshold;
        v.attack = d.attack;
        verdicts.push_back(v);

        if (d.attack) {
            any_attack = true;
        } else {
            model.per_class[key].append(count, capacity);
        }
    }

    // The total enters the fallback baseline only for clean periods, so an
    // attack cannot teach the fallback that bursts are normal.
    if (!any_attack) model.global.append(total, capacity);
    model.completed_periods = period + 1;
    return verdicts;
}

DetectResult detect_stream(std::span<const SensorEvent> events, const DetectOptions& options) {
    options.config.validate();
    DetectResult result;
    if (events.empty()) return result;
    result.origin_ms = events.front().timestamp_ms;

    GroupingResult grouped = group_requests(events, options.grouping);
    result.traces = grouped.traces.size();
    result.orphan_events = grouped.orphan_events;

    std::vector<Fingerprint> prints;
    prints.reserve(grouped.traces.size());
    for (const RequestTrace& trace : grouped.traces) {
        try {
            prints.push_back(extract_fingerprint(trace, options.fingerprint));
        } catch (const EmptyTrace&) {
            // A marker with no measurable work underneath carries no chain;
            // it simply contributes nothing to any class.
        }
    }
    if (prints.empty()) return result;

    const auto counts =
        fingerprint_class_counts(prints, options.config.period_ms, result.origin_ms);
    std::int64_t last_period = 0;
    for (const auto& [pc, count] : counts) last_period = std::max(last_period, pc.period_index);
    result.periods = last_period + 1;

    if (options.global_model) {
        // One series: the per-period fingerprint total, judged against its
        // own history. No per-class fallback is involved.
        CountRing history;
        const auto capacity = static_cast<std::size_t>(options.config.history_periods);
        for (std::int64_t period = 0; period <= last_period; ++period) {
            std::int64_t total = 0;
            for (const auto& [pc, count] : counts) {
                if (pc.period_index == period) total += count;
            }
            const Decision d = decide(history.snapshot(), total, options.config,
                                      period < options.config.warmup_periods);
            Verdict v;
            v.period_index = period;
            v.global_row = true;
            v.count = total;
            v.alpha = d.alpha_value;
            v.threshold = d.threshold;
            v.attack = d.attack;
            if (!v.attack) history.append(total, capacity);
            result.verdicts.push_back(v);
        }
        return result;
    }

    NormalModel model;
    for (std::int64_t period = 0; period <= last_period; ++period) {
        std::map<std::uint64_t, std::int64_t> period_counts;
        for (const auto& [pc, count] : counts) {
            if (pc.period_index == period) period_counts[pc.class_key] = count;
        }
        std::vector<Verdict> verdicts = step(model, period_counts, options.config);
        result.verdicts.insert(result.verdicts.end(), verdicts.begin(), verdicts.end());
    }
    return result;
}

std::string render_verdicts(std::span<const Verdict> verdicts) {
    std::string out;
    for (const Verdict& v : verdicts) {
        out += std::to_string(v.period_index);
        out += '\t';
        out += v.global_row ? "global" : format_class_key(v.class_key);
        out += '\t';
        out += std::to_string(v.count);
        out += '\t';
        out += v.alpha ? std::to_string(*v.alpha) : "-";
        out += '\t';
        out += v.threshold ? render_decimal(SensorValue::numeric(*v.threshold)) : "-";
        out += '\t';
        out += v.attack ? "ATTACK" : "OK";
        out += '\n';
    }
    return out;
}

}  // namespace traceguard
