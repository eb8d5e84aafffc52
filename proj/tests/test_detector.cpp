#include <algorithm>
#include <vector>

#include "doctest.h"
#include "traceguard/detector.hpp"
#include "traceguard/quantile.hpp"
#include "traceguard/random.hpp"

using namespace traceguard;

namespace {

std::map<std::uint64_t, std::int64_t> period_counts(
    std::initializer_list<std::pair<std::uint64_t, std::int64_t>> items) {
    std::map<std::uint64_t, std::int64_t> m;
    for (const auto& [k, v] : items) m[k] = v;
    return m;
}

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("alpha is the nearest-rank quantile") {
    std::vector<std::int64_t> h = {4, 2, 6, 3, 5};  // unsorted on purpose
    CHECK(alpha(h, 0.95) == 6);                     // rank ceil(4.75) = 5
    CHECK(alpha(h, 0.5) == 4);                      // rank ceil(2.5) = 3
    CHECK(alpha(h, 1.0) == 6);
    CHECK(alpha(h, 0.01) == 2);

    std::vector<std::int64_t> one = {7};
    CHECK(alpha(one, 0.95) == 7);
    CHECK(alpha(one, 0.05) == 7);

    std::vector<std::int64_t> flat = {5, 5, 5, 5};
    CHECK(alpha(flat, 0.5) == 5);

    std::vector<std::int64_t> none;
    CHECK_THROWS_AS((void)alpha(none, 0.95), EmptyHistory);
}

TEST_CASE("alpha matches a sort-and-index oracle on random histories") {
    DeterministicRandom rng(4242, 1);
    for (int round = 0; round < 1000; ++round) {
        const int n = rng.next_int(1, 200);
        std::vector<std::int64_t> history;
        history.reserve(n);
        for (int i = 0; i < n; ++i) history.push_back(rng.next_int(0, 5000));
        const double q = 0.001 * static_cast<double>(rng.next_int(1, 1000));

        std::vector<std::int64_t> sorted = history;
        std::sort(sorted.begin(), sorted.end());
        auto rank = static_cast<std::size_t>(
            std::ceil(q * static_cast<double>(n)));
        rank = std::max<std::size_t>(1, std::min<std::size_t>(rank, sorted.size()));
        const std::int64_t expect = sorted[rank - 1];

        CHECK(alpha(history, q) == expect);
    }
}

TEST_CASE("classify flags at or above the scaled quantile") {
    CHECK(classify(10, 4, 2.0));        // 10 >= 8
    CHECK_FALSE(classify(7, 4, 2.0));   // 7 < 8
    CHECK(classify(8, 4, 2.0));         // tie counts as attack
    CHECK(classify(6, 4, 1.5));
    CHECK_FALSE(classify(5, 4, 1.5));
    CHECK(classify(0, 0, 1.5));         // the bare rule is literal about ties
}

TEST_CASE("classify agrees with the inequality on random triples") {
    DeterministicRandom rng(777, 2);
    int ties = 0;
    for (int i = 0; i < 10000; ++i) {
        std::int64_t count = rng.next_int(0, 2000);
        const std::int64_t a = rng.next_int(0, 400);
        const double p = 0.25 * static_cast<double>(rng.next_int(1, 24));
        if (i % 5 == 0) {
            // Force exact ties: count = p * a with p chosen so the product
            // is integral.
            count = static_cast<std::int64_t>(p * static_cast<double>(a) + 0.5);
            if (static_cast<double>(count) != p * static_cast<double>(a)) continue;
            ++ties;
        }
        const bool expect = static_cast<double>(count) >= p * static_cast<double>(a);
        CHECK(classify(count, a, p) == expect);
        if (static_cast<double>(count) == p * static_cast<double>(a)) {
            CHECK(classify(count, a, p));
        }
    }
    CHECK(ties > 500);  // the tie branch really ran
}

TEST_CASE("count ring keeps the last n values in order") {
    CountRing ring;
    for (std::int64_t v : {1, 2, 3, 4, 5}) ring.append(v, 3);
    CHECK(ring.snapshot() == std::vector<std::int64_t>{3, 4, 5});
    CHECK_FALSE(ring.empty());
    CHECK_THROWS_AS(ring.append(6, 0), std::invalid_argument);
}

TEST_CASE("config validation") {
    DetectorConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.period_ms = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = DetectorConfig{};
    cfg.quantile_q = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = DetectorConfig{};
    cfg.sensitivity = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = DetectorConfig{};
    cfg.history_periods = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = DetectorConfig{};
    cfg.quantile_q = 1.0;  // the open interval excludes the maximum
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = DetectorConfig{};
    cfg.warmup_periods = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = DetectorConfig{};
    cfg.warmup_periods = cfg.history_periods + 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("step walks warmup, flags bursts, and falls back for new classes") {
    DetectorConfig cfg;
    cfg.history_periods = 5;
    cfg.warmup_periods = 2;
    cfg.sensitivity = 1.5;
    cfg.quantile_q = 0.95;
    NormalModel model;
    constexpr std::uint64_t A = 11, B = 22;

    // Period 0: first sight of A — no baseline anywhere, silent.
    auto v0 = step(model, period_counts({{A, 10}}), cfg);
    REQUIRE(v0.size() == 1);
    CHECK(v0[0].period_index == 0);
    CHECK_FALSE(v0[0].alpha.has_value());
    CHECK_FALSE(v0[0].attack);

    // Period 1: warmup still suppresses even a wild count, and a suppressed
    // row carries no alpha, so the printed rule is never contradicted.
    auto v1 = step(model, period_counts({{A, 1000}}), cfg);
    REQUIRE(v1.size() == 1);
    CHECK_FALSE(v1[0].alpha.has_value());
    CHECK_FALSE(v1[0].attack);

    // Period 2: history [10, 1000] -> alpha 1000; 16 stays under 1500.
    auto v2 = step(model, period_counts({{A, 16}}), cfg);
    CHECK(v2[0].alpha == 1000);
    CHECK_FALSE(v2[0].attack);

    // Period 3: B is new; its baseline is the per-period total history
    // [10, 1000, 16], alpha 1000 -> a count of 12 is unremarkable.
    auto v3 = step(model, period_counts({{A, 10}, {B, 12}}), cfg);
    REQUIRE(v3.size() == 2);
    CHECK(v3[0].class_key == A);
    CHECK(v3[1].class_key == B);
    CHECK(v3[1].alpha == 1000);
    CHECK_FALSE(v3[1].attack);

    // Period 4: B's own ring is now [12]; 40 >= 1.5 * 12 flags.
    auto v4 = step(model, period_counts({{A, 10}, {B, 40}}), cfg);
    CHECK(v4[1].class_key == B);
    CHECK(v4[1].alpha == 12);
    CHECK(v4[1].threshold == doctest::Approx(18.0));
    CHECK(v4[1].attack);
    CHECK_FALSE(v4[0].attack);

    // The flagged count was discarded: B's ring still holds only 12, so the
    // same burst flags again next period instead of becoming the new normal.
    CHECK(model.per_class.at(B).snapshot() == std::vector<std::int64_t>{12});
    auto v5 = step(model, period_counts({{A, 10}, {B, 40}}), cfg);
    CHECK(v5[1].attack);
    CHECK(v5[1].alpha == 12);
}

TEST_CASE("a vanished class keeps reporting zero counts without alarming") {
    DetectorConfig cfg;
    cfg.history_periods = 4;
    cfg.warmup_periods = 1;
    NormalModel model;
    constexpr std::uint64_t A = 5;

    (void)step(model, period_counts({{A, 8}}), cfg);
    for (int i = 0; i < 4; ++i) {
        auto v = step(model, period_counts({}), cfg);
        REQUIRE(v.size() == 1);
        CHECK(v[0].class_key == A);
        CHECK(v[0].count == 0);
        CHECK(v[0].alpha == 8);  // the live period is still inside the ring
        CHECK_FALSE(v[0].attack);
    }
    // The ring is now all zeros: the 0.95-rank quantile is 0, threshold
    // scaling is meaningless, and the detector reports "no baseline" rather
    // than alarming forever on 0 >= 0.
    for (int i = 0; i < 2; ++i) {
        auto v = step(model, period_counts({}), cfg);
        CHECK_FALSE(v[0].alpha.has_value());
        CHECK_FALSE(v[0].attack);
    }
    // Even a comeback stays silent until real history rebuilds.
    auto v = step(model, period_counts({{A, 1}}), cfg);
    CHECK_FALSE(v[0].alpha.has_value());
    CHECK_FALSE(v[0].attack);
}

TEST_CASE("global totals only learn from clean periods") {
    DetectorConfig cfg;
    cfg.history_periods = 10;
    cfg.warmup_periods = 1;
    NormalModel model;
    constexpr std::uint64_t A = 1, FRESH = 9;

    (void)step(model, period_counts({{A, 10}}), cfg);   // warmup, global [10]
    (void)step(model, period_counts({{A, 10}}), cfg);   // clean, global [10,10]
    auto burst = step(model, period_counts({{A, 100}}), cfg);
    CHECK(burst[0].attack);
    CHECK(model.global.snapshot() == std::vector<std::int64_t>{10, 10});

    // The fallback baseline therefore still reads ~10, and a fresh class
    // bursting right after the attack is caught, not normalized.
    auto after = step(model, period_counts({{A, 10}, {FRESH, 60}}), cfg);
    REQUIRE(after.size() == 2);
    CHECK(after[1].class_key == FRESH);
    CHECK(after[1].alpha == 10);
    CHECK(after[1].attack);
}

TEST_CASE("step is deterministic and ordered by class key") {
    DetectorConfig cfg;
    cfg.warmup_periods = 1;
    auto run = [&] {
        NormalModel model;
        std::vector<Verdict> all;
        for (int period = 0; period < 8; ++period) {
            auto counts = period_counts({{42, 5}, {7, 9}, {1000, 2}});
            auto v = step(model, counts, cfg);
            all.insert(all.end(), v.begin(), v.end());
        }
        return all;
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].class_key == b[i].class_key);
        CHECK(a[i].count == b[i].count);
        CHECK(a[i].attack == b[i].attack);
        CHECK(a[i].alpha == b[i].alpha);
    }
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        if (a[i].period_index == a[i + 1].period_index) {
            CHECK(a[i].class_key < a[i + 1].class_key);
        }
    }
}

TEST_CASE("raising sensitivity never creates new attacks") {
    DeterministicRandom rng(31337, 4);
    for (int round = 0; round < 200; ++round) {
        const std::int64_t count = rng.next_int(0, 100);
        const std::int64_t a = rng.next_int(0, 50);
        const double p = 0.1 * static_cast<double>(rng.next_int(1, 60));
        if (classify(count, a, 2.0 * p)) CHECK(classify(count, a, p));
        if (!classify(count, a, p)) CHECK_FALSE(classify(count, a, 2.0 * p));
    }
}

TEST_CASE("detect_stream runs periods end to end") {
    // Hand-built stream, period 1000ms, two classes; class B bursts in
    // period 3.
    const SensorId work{"com.acme.webshop", "Svc", "run", 1, 0, 0};
    const SensorId work2{"com.acme.webshop", "Svc", "other", 2, 0, 0};
    std::vector<SensorEvent> events;
    std::uint32_t ordinal = 0;
    auto add_request = [&](std::int64_t ts, const SensorId& sid, double dur) {
        events.push_back(SensorEvent{
            ts, 0, SensorId{kRequestMarkerPackage, kRequestMarkerClass, "page", 0, 1, 0},
            SensorValue::state(static_cast<std::int32_t>(ordinal++))});
        events.push_back(SensorEvent{ts, 1, sid, SensorValue::numeric(dur)});
    };
    for (std::int64_t period = 0; period < 3; ++period) {
        for (int i = 0; i < 4; ++i) add_request(period * 1000 + i * 200, work, 30.0);
        add_request(period * 1000 + 900, work2, 60.0);
    }
    for (int i = 0; i < 20; ++i) add_request(3000 + i * 45, work2, 60.0);

    DetectOptions options;
    options.config.period_ms = 1000;
    options.config.history_periods = 10;
    options.config.warmup_periods = 2;
    DetectResult result = detect_stream(events, options);
    CHECK(result.origin_ms == 0);
    CHECK(result.periods == 4);
    CHECK(result.traces == 35);

    int attacks = 0;
    for (const Verdict& v : result.verdicts) {
        if (v.attack) {
            ++attacks;
            CHECK(v.period_index == 3);
            CHECK(v.count == 20);
        }
        if (v.period_index < 2) CHECK_FALSE(v.attack);
    }
    CHECK(attacks == 1);
}

TEST_CASE("detect_stream with an empty input is empty, not an error") {
    DetectOptions options;
    DetectResult result = detect_stream({}, options);
    CHECK(result.verdicts.empty());
    CHECK(result.periods == 0);
}

TEST_CASE("whole-stream mode watches the per-period total") {
    const SensorId work{"com.acme.webshop", "Svc", "run", 1, 0, 0};
    std::vector<SensorEvent> events;
    std::uint32_t ordinal = 0;
    auto add_request = [&](std::int64_t ts, double dur) {
        events.push_back(SensorEvent{
            ts, 0, SensorId{kRequestMarkerPackage, kRequestMarkerClass, "page", 0, 1, 0},
            SensorValue::state(static_cast<std::int32_t>(ordinal++))});
        events.push_back(SensorEvent{ts, 1, work, SensorValue::numeric(dur + (ordinal % 7))});
    };
    for (std::int64_t period = 0; period < 4; ++period) {
        for (int i = 0; i < 5; ++i) add_request(period * 1000 + i * 150, 20.0);
    }
    for (int i = 0; i < 40; ++i) add_request(4000 + i * 20, 20.0);

    DetectOptions options;
    options.config.period_ms = 1000;
    options.config.warmup_periods = 2;
    options.global_model = true;
    DetectResult result = detect_stream(events, options);
    REQUIRE(result.periods == 5);
    REQUIRE(result.verdicts.size() == 5);  // exactly one row per period
    for (const Verdict& v : result.verdicts) CHECK(v.global_row);
    CHECK(result.verdicts[4].count == 40);
    CHECK(result.verdicts[4].attack);
    CHECK_FALSE(result.verdicts[3].attack);
}

TEST_CASE("verdict rendering is one tab-separated line each") {
    std::vector<Verdict> verdicts;
    Verdict a;
    a.period_index = 31;
    a.class_key = 0x00ffaa0012345678ull;
    a.count = 512;
    a.alpha = 21;
    a.threshold = 31.5;
    a.attack = true;
    verdicts.push_back(a);
    Verdict b;
    b.period_index = 31;
    b.class_key = 0xffffffffffffffffull;
    b.count = 3;
    verdicts.push_back(b);
    Verdict g;
    g.period_index = 32;
    g.global_row = true;
    g.count = 200;
    g.alpha = 190;
    g.threshold = 285.0;
    verdicts.push_back(g);

    CHECK(render_verdicts(verdicts) ==
          "31\t00ffaa0012345678\t512\t21\t31.5\tATTACK\n"
          "31\tffffffffffffffff\t3\t-\t-\tOK\n"
          "32\tglobal\t200\t190\t285\tOK\n");
}

}  // TEST_SUITE
