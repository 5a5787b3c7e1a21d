#include <doctest.h>

#include <cmath>
#include <random>

#include "attndrift/divergence.hpp"
#include "oracles.hpp"

using namespace attndrift;
using oracle::relative;

namespace {

RelativeDistribution random_relative(std::mt19937_64& rng, std::size_t n_items, std::size_t support) {
    return normalize(oracle::random_counts(rng, n_items, support));
}

// Distribution over ids [0, n) that puts the shared probability vector `shape`
// on a random permutation of the ids.
RelativeDistribution permuted(const std::vector<double>& shape, std::mt19937_64& rng) {
    std::vector<ItemId> ids(shape.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<ItemId>(i);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<ItemProb> w;
    for (std::size_t i = 0; i < ids.size(); ++i) w.push_back({ids[i], shape[i]});
    return RelativeDistribution::from_weights(w);
}

}  // namespace

TEST_SUITE("divergence") {

TEST_CASE("Shannon entropy") {
    CHECK(shannon_entropy(relative({{0, 1.0}})) == 0.0);
    CHECK(shannon_entropy(relative({{0, 0.5}, {1, 0.5}})) == doctest::Approx(1.0).epsilon(1e-15));
    std::map<ItemId, double> u8;
    for (ItemId i = 0; i < 8; ++i) u8[i] = 0.125;
    CHECK(shannon_entropy(relative(u8)) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("JSD basic values") {
    auto p = relative({{0, 1.0}});
    auto q = relative({{0, 0.5}, {1, 0.5}});
    // H(0.75, 0.25) - (0 + 1) / 2
    const double expected = -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25)) - 0.5;
    CHECK(jsd(p, q).value == doctest::Approx(expected).epsilon(1e-14));
    CHECK(jsd(p, q).value == doctest::Approx(0.311278).epsilon(1e-6));
    CHECK(jsd(p, p).value == 0.0);
    CHECK(jsd(q, q).value == 0.0);
    CHECK(std::abs(jsd(relative({{0, 0.3}, {1, 0.7}}), relative({{2, 0.5}, {3, 0.5}})).value - 1.0) <= 1e-12);
    CHECK_THROWS(jsd(RelativeDistribution{}, p));
}

TEST_CASE("partial JSD values") {
    auto p = relative({{0, 1.0}});
    auto q = relative({{0, 0.5}, {1, 0.5}});
    auto [value, parts] = jsd_with_contributions(p, q);
    REQUIRE(parts.items.size() == 2);
    const double a = 0.5 * (std::log2(4.0 / 3.0) + 0.5 * std::log2(2.0 / 3.0));
    CHECK(a == doctest::Approx(0.061278).epsilon(1e-5));
    CHECK(parts.items[0].partial_bits == doctest::Approx(a).epsilon(1e-14));
    CHECK(parts.items[1].partial_bits == 0.25);
    CHECK(parts.total_bits == doctest::Approx(value.value).epsilon(1e-14));

    auto [v2, unchanged] = jsd_with_contributions(relative({{0, 0.5}, {1, 0.5}}), relative({{0, 0.5}, {1, 0.25}, {2, 0.25}}));
    CHECK(unchanged.items[0].partial_bits == 0.0);
    CHECK(unchanged.items[1].partial_bits > 0.0);
}

TEST_CASE("decomposition, bounds and symmetry against the dense oracle") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng() % 3000;
        auto p = random_relative(rng, n, 1 + rng() % n);
        auto q = random_relative(rng, n, 1 + rng() % n);
        auto [value, parts] = jsd_with_contributions(p, q);
        const long double ref = oracle::jsd_bits(oracle::dense(p, n), oracle::dense(q, n));
        REQUIRE(std::abs(value.value - static_cast<double>(ref)) < 1e-12);
        REQUIRE(std::abs(parts.total_bits - value.value) < 1e-12);
        REQUIRE(value.value >= 0.0);
        REQUIRE(value.value <= 1.0);
        for (const auto& c : parts.items) REQUIRE(c.partial_bits >= 0.0);
        REQUIRE(jsd(q, p).value == value.value);
        REQUIRE(jaccard_distance(q, p).value == jaccard_distance(p, q).value);
        REQUIRE(jsd_alpha_normalized(q, p, 0.5).value == jsd_alpha_normalized(p, q, 0.5).value);
    }
}

TEST_CASE("Tsallis entropy") {
    auto u2 = relative({{0, 0.5}, {1, 0.5}});
    CHECK(tsallis_entropy(u2, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tsallis_entropy(relative({{0, 0.2}, {1, 0.3}, {2, 0.5}}), 0.0) == doctest::Approx(2.0));
    CHECK(tsallis_entropy(relative({{0, 1.0}}), 2.0) == 0.0);
    CHECK_THROWS(tsallis_entropy(u2, 1.0));
    CHECK_THROWS(tsallis_entropy(u2, -0.5));
}

TEST_CASE("normalized alpha-JSD special cases") {
    auto a = relative({{0, 1.0}});
    auto b = relative({{1, 1.0}});
    CHECK(jsd_alpha_normalized(a, b, 2.0).value == 1.0);

    auto p = relative({{0, 0.2}, {1, 0.3}, {2, 0.5}});
    auto q = relative({{1, 0.6}, {2, 0.3}, {3, 0.1}});
    CHECK(jsd_alpha_normalized(p, q, 0.0).value == doctest::Approx(1.0 - 2.0 / 3.0).epsilon(1e-15));
    CHECK(jsd_alpha_normalized(p, q, 1.0).value == jsd(p, q).value);
    CHECK(jsd_alpha_normalized(p, p, 1.7).value == 0.0);

    Diagnostics diag;
    jsd_alpha_normalized(p, q, 2.5, &diag);
    CHECK(diag.warnings.size() == 1);
    jsd_alpha_normalized(p, q, 2.0, &diag);
    CHECK(diag.warnings.size() == 1);
    CHECK_THROWS(jsd_alpha_normalized(p, q, -1.0));
}

TEST_CASE("normalized alpha-JSD matches its definition and its limits") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng() % 500;
        auto p = random_relative(rng, n, 1 + rng() % n);
        auto q = random_relative(rng, n, 1 + rng() % n);
        const auto dp = oracle::dense(p, n), dq = oracle::dense(q, n);
        for (double alpha : {0.25, 0.5, 1.5, 2.0, 3.0}) {
            const double ours = jsd_alpha_normalized(p, q, alpha).value;
            const double ref = static_cast<double>(oracle::jsd_alpha_norm(dp, dq, alpha));
            REQUIRE(ours == doctest::Approx(ref).epsilon(1e-9));
            REQUIRE(ours >= 0.0);
            REQUIRE(ours <= 1.0);
        }
        const double bits = jsd(p, q).value;
        REQUIRE(std::abs(jsd_alpha_normalized(p, q, 1.0 + 1e-4).value - bits) < 1e-3);
        REQUIRE(std::abs(jsd_alpha_normalized(p, q, 1.0 - 1e-4).value - bits) < 1e-3);
    }
}

TEST_CASE("Jaccard distance") {
    auto p = relative({{0, 0.2}, {1, 0.3}, {2, 0.5}});
    CHECK(jaccard_distance(p, relative({{0, 0.9}, {1, 0.05}, {2, 0.05}})).value == 0.0);
    CHECK(jaccard_distance(p, relative({{5, 1.0}})).value == 1.0);
    CHECK(jaccard_distance(p, relative({{1, 0.6}, {2, 0.3}, {3, 0.1}})).value == 0.5);
}

TEST_CASE("triangle inequality of the square-root measures") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 2 + rng() % 200;
        auto p = random_relative(rng, n, 1 + rng() % n);
        auto q = random_relative(rng, n, 1 + rng() % n);
        auto r = random_relative(rng, n, 1 + rng() % n);
        auto d = [](const auto& x, const auto& y) { return std::sqrt(jsd(x, y).value); };
        REQUIRE(d(p, q) + d(q, r) - d(p, r) >= -1e-12);
        auto j = [](const auto& x, const auto& y) { return jaccard_distance(x, y).value; };
        REQUIRE(j(p, q) + j(q, r) - j(p, r) >= -1e-12);
    }
    // Alpha variants only under one shared rank-frequency shape.
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 2 + rng() % 100;
        std::vector<double> shape(n);
        for (std::size_t i = 0; i < n; ++i) shape[i] = 1.0 / static_cast<double>(i + 1);
        auto p = permuted(shape, rng), q = permuted(shape, rng), r = permuted(shape, rng);
        for (double alpha : {0.5, 1.0, 2.0}) {
            auto d = [alpha](const auto& x, const auto& y) { return std::sqrt(jsd_alpha_normalized(x, y, alpha).value); };
            REQUIRE(d(p, q) + d(q, r) - d(p, r) >= -1e-12);
        }
    }
}

TEST_CASE("dispatcher and descriptors") {
    auto p = relative({{0, 0.5}, {1, 0.5}});
    auto q = relative({{1, 0.5}, {2, 0.5}});
    CHECK(divergence(p, q, Measure::jsd()).value == jsd(p, q).value);
    CHECK(divergence(p, q, Measure::jaccard()).value == jaccard_distance(p, q).value);
    CHECK(divergence(p, q, Measure::jsd_alpha(2)).value == jsd_alpha_normalized(p, q, 2).value);
    CHECK(Measure::jsd().describe() == "jsd_bits");
    CHECK(Measure::jsd_alpha(2).describe() == "jsd_alpha_norm(2)");
    CHECK(Measure::jaccard().describe() == "jaccard");
}

}
