#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "attndrift/estimators.hpp"
#include "attndrift/synthmarket.hpp"
#include "oracles.hpp"

using namespace attndrift;

namespace {

GroundTruth small_market(std::uint64_t seed, double churn) {
    SynthMarketSpec spec;
    spec.catalog_size = 1000;
    spec.churn = churn;
    spec.n_bins = 2;
    spec.loans_per_bin = 200;
    spec.seed = seed;
    return generate_truth(spec);
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("plug-in values") {
    auto a = oracle::counts({{0, 3}, {1, 1}});
    auto b = oracle::counts({{0, 4}});
    const double ref = static_cast<double>(oracle::jsd_bits({0.75L, 0.25L}, {1.0L, 0.0L}));
    CHECK(ref == doctest::Approx(0.137925).epsilon(1e-6));
    CHECK(plugin_jsd(a, b).value == doctest::Approx(ref).epsilon(1e-14));
    CHECK(plugin_jsd(a, a).value == 0.0);
    CHECK(plugin_jsd(a, oracle::counts({{7, 2}})).value == 1.0);
    CHECK(plugin_estimate(a, b, Measure::jaccard()).value == 0.5);
    CHECK_THROWS(plugin_jsd(a, PopularityDistribution{}));
}

TEST_CASE("bootstrap is a pure function of counts, resamples and seed") {
    std::mt19937_64 rng(4);
    auto a = oracle::random_counts(rng, 500, 300);
    auto b = oracle::random_counts(rng, 500, 300, 1);
    auto r1 = bootstrap_jsd(a, b, 60, 42, 1);
    auto r2 = bootstrap_jsd(a, b, 60, 42, 3);
    CHECK(r1.corrected_value == r2.corrected_value);
    CHECK(r1.std_error == r2.std_error);
    CHECK(r1.resample_mean == r2.resample_mean);
    auto r3 = bootstrap_jsd(a, b, 60, 43, 1);
    CHECK(r3.resample_mean != r1.resample_mean);
    CHECK(r1.plugin_value == plugin_jsd(a, b).value);
    CHECK(r1.corrected_value == std::clamp(2 * r1.plugin_value - r1.resample_mean, 0.0, 1.0));
    CHECK(r1.std_error >= 0.0);
    CHECK(r1.n_resamples == 60);
    CHECK(r1.seed == 42);
    CHECK_THROWS(bootstrap_jsd(a, b, 1, 0));
}

TEST_CASE("null case with large totals corrects to about zero") {
    std::vector<ItemCount> c;
    for (ItemId i = 0; i < 100; ++i) c.push_back({i, 10000});
    PopularityDistribution a(bin_from_index(0, Granularity::month), "all", c);
    auto est = bootstrap_jsd(a, a, 20, 7);
    CHECK(est.plugin_value == 0.0);
    CHECK(est.corrected_value <= 3 * est.std_error);
    CHECK(est.resample_mean > 0.0);
}

TEST_CASE("standard error shrinks as totals grow") {
    auto truth = small_market(3, 0.3);
    double previous = 1.0;
    for (std::uint64_t n : {100u, 1000u, 10000u}) {
        auto a = sample_counts(truth, 0, n, 0);
        auto b = sample_counts(truth, 1, n, 0);
        const double se = bootstrap_jsd(a, b, 100, 1).std_error;
        CHECK(se < previous);
        previous = se;
    }
}

TEST_CASE("bias correction reduces error against the true JSD") {
    auto truth = small_market(12, 0.2);
    const double truth_value = true_jsd(truth, 0, 1);
    double plugin_err = 0, corrected_err = 0;
    int over = 0;
    for (std::uint64_t t = 0; t < 20; ++t) {
        auto a = sample_counts(truth, 0, 200, t);
        auto b = sample_counts(truth, 1, 200, t);
        auto est = bootstrap_jsd(a, b, 100, t);
        plugin_err += std::abs(est.plugin_value - truth_value);
        corrected_err += std::abs(est.corrected_value - truth_value);
        // Null pair: two samples of the same bin.
        over += plugin_jsd(sample_counts(truth, 0, 200, 100 + t), a).value > 0.0;
    }
    CHECK(corrected_err < plugin_err);
    CHECK(over == 20);
}

TEST_CASE("bootstrap of other measures") {
    std::mt19937_64 rng(6);
    auto a = oracle::random_counts(rng, 300, 100);
    auto b = oracle::random_counts(rng, 300, 100, 1);
    for (auto m : {Measure::jaccard(), Measure::jsd_alpha(2.0)}) {
        auto est = bootstrap_estimate(a, b, m, 20, 5);
        CHECK(est.measure == m);
        CHECK(est.plugin_value == plugin_estimate(a, b, m).value);
        CHECK(est.corrected_value >= 0.0);
        CHECK(est.corrected_value <= 1.0);
    }
}

}
