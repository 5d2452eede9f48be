#include "runent/entropy.hpp"

#include "runent/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace runent;

namespace {

// frozen with independent arithmetic from the worked-example duration table
constexpr double kTableHA = 1.854273363834273;
constexpr double kTableHB = 1.5849625007211561;  // log2(3)

}  // namespace

TEST_CASE("execution-time entropy of the worked-example durations") {
    const DurationTable d{{"Main", 132}, {"FuncA", 80}, {"FuncB", 250}, {"FuncC", 100}};
    CHECK(execution_time_entropy(d) == doctest::Approx(kTableHA).epsilon(1e-12));
}

TEST_CASE("uniform durations reach the log2(n) maximum exactly") {
    const DurationTable d{{"a", 100}, {"b", 100}, {"c", 100}, {"d", 100}};
    CHECK(execution_time_entropy(d) == 2.0);
}

TEST_CASE("a single function has zero execution-time entropy") {
    CHECK(execution_time_entropy({{"f", 12345}}) == 0.0);
}

TEST_CASE("zero-duration functions contribute nothing") {
    const DurationTable d{{"a", 100}, {"b", 100}, {"zero", 0}};
    CHECK(execution_time_entropy(d) == 1.0);
}

TEST_CASE("all-zero durations are degenerate") {
    CHECK_THROWS_AS(execution_time_entropy({{"f", 0}, {"g", 0}}), DegenerateTrace);
    CHECK_THROWS_AS(execution_time_entropy({}), DegenerateTrace);
}

TEST_CASE("call entropy of three equal-weight edges is log2(3)") {
    const CallCountTable c{{{"Main", "FuncA"}, 1}, {{"Main", "FuncB"}, 1}, {{"FuncB", "FuncC"}, 1}};
    CHECK(call_entropy(c) == doctest::Approx(kTableHB).epsilon(1e-12));
}

TEST_CASE("call entropy edge cases") {
    CHECK(call_entropy({}) == 0.0);
    CHECK(call_entropy({{{"a", "b"}, 17}}) == 0.0);
    CHECK(call_entropy({{{"a", "b"}, 2}, {{"a", "c"}, 2}}) == 1.0);
}

TEST_CASE("runtime entropy is the arithmetic mean") {
    CHECK(runtime_entropy(2.0, 0.0) == 1.0);
    CHECK(runtime_entropy(0.0, 0.0) == 0.0);
    CHECK(runtime_entropy(kTableHA, kTableHB) ==
          doctest::Approx(1.7196179322777145).epsilon(1e-12));
}

TEST_CASE("featurize composes the pipeline on the worked example") {
    const EntropyFeatures f = featurize(parse_trace(testsupport::kTableTrace));
    CHECK(f.h_a == doctest::Approx(kTableHA).epsilon(1e-12));
    CHECK(f.h_b == doctest::Approx(kTableHB).epsilon(1e-12));
    CHECK(f.h == (f.h_a + f.h_b) / 2.0);
}

TEST_CASE("a lone frame with no calls yields the zero triple") {
    const EntropyFeatures f = featurize(parse_trace("1 IN f 0\n2 OUT f 7\n"));
    CHECK(f.h_a == 0.0);
    CHECK(f.h_b == 0.0);
    CHECK(f.h == 0.0);
}

TEST_CASE("features are invariant under timestamp scaling") {
    auto rng = make_rng(21);
    for (int i = 0; i < 40; ++i) {
        Trace t = testsupport::random_trace(rng);
        std::int64_t total = 0;
        for (const auto& [fn, ticks] : compute_durations(t)) total += ticks;
        if (total == 0) continue;
        const EntropyFeatures base = featurize(t);
        for (std::int64_t scale : {2, 1000}) {
            Trace scaled = t;
            for (auto& ev : scaled.events) ev.timestamp *= scale;
            const EntropyFeatures f = featurize(scaled);
            CHECK(std::abs(f.h_a - base.h_a) <= 1e-9);
            CHECK(std::abs(f.h_b - base.h_b) <= 1e-9);
            CHECK(std::abs(f.h - base.h) <= 1e-9);
        }
    }
}

TEST_CASE("call entropy depends only on the multiset of counts") {
    const CallCountTable a{{{"x", "y"}, 3}, {{"x", "z"}, 5}, {{"q", "r"}, 2}};
    const CallCountTable b{{{"m", "n"}, 5}, {{"n", "m"}, 2}, {{"a", "a"}, 3}};
    CHECK(call_entropy(a) == doctest::Approx(call_entropy(b)).epsilon(1e-15));
}

TEST_CASE("entropy never exceeds log2 of the support size") {
    auto rng = make_rng(22);
    for (int i = 0; i < 100; ++i) {
        const Trace t = testsupport::random_trace(rng);
        const DurationTable d = compute_durations(t);
        std::size_t nonzero = 0;
        std::int64_t total = 0;
        for (const auto& [fn, ticks] : d) {
            if (ticks > 0) ++nonzero;
            total += ticks;
        }
        if (total == 0) continue;
        CHECK(execution_time_entropy(d) <=
              std::log2(static_cast<double>(nonzero)) + 1e-12);
    }
}

TEST_CASE("normalized weights sum to one") {
    auto rng = make_rng(23);
    for (int i = 0; i < 50; ++i) {
        const Trace t = testsupport::random_trace(rng);
        const DurationTable d = compute_durations(t);
        std::int64_t total = 0;
        for (const auto& [fn, ticks] : d) total += ticks;
        if (total == 0) continue;
        double alpha_sum = 0.0;
        for (const auto& [fn, ticks] : d) {
            alpha_sum += static_cast<double>(ticks) / static_cast<double>(total);
        }
        CHECK(std::abs(alpha_sum - 1.0) <= 1e-12);

        const CallCountTable c = compute_call_counts(t);
        std::int64_t call_total = 0;
        for (const auto& [edge, n] : c) call_total += n;
        if (call_total == 0) continue;
        double beta_sum = 0.0;
        for (const auto& [edge, n] : c) {
            beta_sum += static_cast<double>(n) / static_cast<double>(call_total);
        }
        CHECK(std::abs(beta_sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("featurize matches naive brute-force recomputation") {
    auto rng = make_rng(24);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        const Trace t = testsupport::random_trace(rng);
        std::int64_t total = 0;
        for (const auto& [fn, ticks] : testsupport::oracle_durations(t)) total += ticks;
        if (total == 0) continue;
        const EntropyFeatures f = featurize(t);
        const double oracle_ha = testsupport::oracle_entropy(testsupport::oracle_durations(t));
        const double oracle_hb = testsupport::oracle_entropy(testsupport::oracle_call_counts(t));
        CHECK(std::abs(f.h_a - oracle_ha) <= 1e-9);
        CHECK(std::abs(f.h_b - oracle_hb) <= 1e-9);
        CHECK(std::abs(f.h - (oracle_ha + oracle_hb) / 2.0) <= 1e-9);
        ++checked;
    }
    CHECK(checked > 50);  // the generator rarely produces all-zero totals
}
