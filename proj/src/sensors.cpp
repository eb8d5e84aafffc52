#include "traceguard/sensors.hpp"

#include <algorithm>
#include <cmath>

#include "traceguard/quantile.hpp"

namespace traceguard {

namespace {

double numeric_payload(const SensorEvent& event, const char* stage) {
    if (event.value.is_numeric()) return event.value.as_numeric();
    if (event.value.is_state()) return static_cast<double>(event.value.as_state());
    throw TypeMismatch(std::string(stage) + ": text value for " + to_string(event.sid) +
                       " has no numeric interpretation");
}

}  // namespace

void AlertSensorConfig::validate() const {
    if (!lower && !upper) {
        throw std::invalid_argument("alert sensor needs at least one bound");
    }
    if (lower && upper && *lower > *upper) {
        throw std::invalid_argument("alert sensor bounds are inverted");
    }
}

std::optional<Alert> evaluate_alert(const AlertSensorConfig& cfg, const SensorEvent& event) {
    if (!(event.sid == cfg.target_sid)) return std::nullopt;
    const double observed = numeric_payload(event, "alert");
    if (cfg.lower && observed < *cfg.lower) {
        return Alert{event.sid, event.timestamp_ms, BoundKind::lower, observed};
    }
    if (cfg.upper && observed > *cfg.upper) {
        return Alert{event.sid, event.timestamp_ms, BoundKind::upper, observed};
    }
    return std::nullopt;
}

FilterSensorConfig::FilterSensorConfig(SensorId target_sid, std::string pattern,
                                       SensorId output_sid)
    : target_sid_(std::move(target_sid)),
      pattern_(std::move(pattern)),
      output_sid_(std::move(output_sid)),
      compiled_(pattern_, std::regex::ECMAScript) {
    if (target_sid_ == output_sid_) {
        throw std::invalid_argument("filter sensor must not overwrite its input SID");
    }
}

std::optional<SensorEvent> apply_filter(const FilterSensorConfig& cfg, const SensorEvent& event) {
    if (!(event.sid == cfg.target_sid())) return std::nullopt;
    const std::string rendered = render_decimal(event.value);
    if (!std::regex_search(rendered, cfg.compiled())) return std::nullopt;
    SensorEvent out = event;
    out.sid = cfg.output_sid();
    return out;
}

void OneTimeAggConfig::validate() const {
    if (op == OnceOp::log_scale) {
        if (input_sids.size() != 1) {
            throw std::invalid_argument("log-scale aggregation takes exactly one input");
        }
    } else if (input_sids.size() < 2) {
        throw std::invalid_argument("one-time aggregation needs at least two inputs");
    }
    for (std::size_t i = 0; i < input_sids.size(); ++i) {
        for (std::size_t j = i + 1; j < input_sids.size(); ++j) {
            if (input_sids[i] == input_sids[j]) {
                throw std::invalid_argument("one-time aggregation inputs must be distinct");
            }
        }
    }
}

SensorEvent aggregate_once(const OneTimeAggConfig& cfg, std::span<const SensorEvent> inputs) {
    cfg.validate();
    if (inputs.empty()) throw MissingInput("one-time aggregation got an empty instant");
    const std::int64_t instant = inputs.front().timestamp_ms;
    for (const SensorEvent& event : inputs) {
        if (event.timestamp_ms != instant) {
            throw std::invalid_argument("one-time aggregation inputs span several timestamps");
        }
    }
    double acc = cfg.op == OnceOp::product ? 1.0 : 0.0;
    for (const SensorId& sid : cfg.input_sids) {
        const SensorEvent* match = nullptr;
        for (const SensorEvent& event : inputs) {
            if (event.sid == sid) {
                if (match) throw std::invalid_argument("duplicate input at one instant");
                match = &event;
            }
        }
        if (!match) {
            throw MissingInput("no event for " + to_string(sid) + " at the alignment instant");
        }
        const double v = numeric_payload(*match, "one-time aggregation");
        switch (cfg.op) {
            case OnceOp::sum: acc += v; break;
            case OnceOp::product: acc *= v; break;
            case OnceOp::log_scale:
                if (v <= 0) {
                    throw std::invalid_argument("log-scale input must be positive");
                }
                acc = std::log(v);
                break;
        }
    }
    return SensorEvent{instant, 0, cfg.output_sid, SensorValue::numeric(acc)};
}

void ContinuousAggConfig::validate() const {
    if (window_ms <= 0) throw std::invalid_argument("window length must be positive");
    if (op == WindowOp::quantile && !(quantile_q > 0.0 && quantile_q <= 1.0)) {
        throw std::invalid_argument("window quantile must lie in (0, 1]");
    }
    if (input_sid == output_sid) {
        throw std::invalid_argument("window aggregation must not overwrite its input SID");
    }
}

std::vector<SensorEvent> aggregate_window(const ContinuousAggConfig& cfg,
                                          std::span<const SensorEvent> stream) {
    cfg.validate();
    std::vector<SensorEvent> out;
    std::vector<double> bucket;
    bool anchored = false;
    std::int64_t window_start = 0;

    auto flush = [&]() {
        if (bucket.empty()) return;
        double result = 0;
        if (cfg.op == WindowOp::mean) {
            double sum = 0;
            for (double v : bucket) sum += v;
            result = sum / static_cast<double>(bucket.size());
        } else {
            result = nearest_rank_quantile(bucket, cfg.quantile_q);
        }
        out.push_back(SensorEvent{window_start + cfg.window_ms, 0, cfg.output_sid,
                                  SensorValue::numeric(result)});
        bucket.clear();
    };

    for (const SensorEvent& event : stream) {
        if (!(event.sid == cfg.input_sid)) continue;
        if (!anchored) {
            anchored = true;
            window_start = event.timestamp_ms;
        }
        while (event.timestamp_ms >= window_start + cfg.window_ms) {
            flush();
            window_start += cfg.window_ms;
        }
        bucket.push_back(numeric_payload(event, "window aggregation"));
    }
    flush();
    return out;
}

}  // namespace traceguard
