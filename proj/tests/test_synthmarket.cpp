#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "attndrift/canonicalizer.hpp"
#include "attndrift/divergence.hpp"
#include "attndrift/synthmarket.hpp"
#include "oracles.hpp"

using namespace attndrift;

namespace {

SynthMarketSpec small_spec() {
    SynthMarketSpec s;
    s.catalog_size = 5000;
    s.loans_per_bin = 2000;
    s.n_bins = 14;
    s.n_loaners = 500;
    s.seed = 17;
    return s;
}

bool same(const RelativeDistribution& a, const RelativeDistribution& b) {
    return std::equal(a.probs().begin(), a.probs().end(), b.probs().begin(), b.probs().end(),
                      [](const ItemProb& x, const ItemProb& y) { return x.item == y.item && x.p == y.p; });
}

bool in_season(const GroundTruth& t, std::size_t b) { return t.spec.active_months.count(t.bins[b].start.month()) > 0; }

}  // namespace

TEST_SUITE("synthmarket") {

TEST_CASE("a static market has no drift") {
    auto spec = small_spec();
    spec.churn = 0.0;
    spec.seasonal_multiplier = 1.0;
    auto t = generate_truth(spec);
    REQUIRE(t.dists.size() == spec.n_bins);
    for (std::size_t b = 1; b < t.dists.size(); ++b) CHECK(true_jsd(t, b - 1, b) == 0.0);
    CHECK(t.items->size() == spec.catalog_size);
}

TEST_CASE("generation is deterministic in the seed") {
    auto spec = small_spec();
    spec.catalog_size = 2;
    spec.seasonal_fraction = 0.5;
    spec.seasonal_multiplier = 2.0;
    auto a = generate_truth(spec), b = generate_truth(spec);
    for (std::size_t i = 0; i < a.dists.size(); ++i) CHECK(same(a.dists[i], b.dists[i]));
    CHECK(a.seasonal_positions == b.seasonal_positions);
    CHECK(sample_counts(a, 3, 100, 2) == sample_counts(b, 3, 100, 2));

    auto big = small_spec();
    auto x = generate_truth(big);
    big.seed = 18;
    auto y = generate_truth(big);
    CHECK_FALSE(same(x.dists.back(), y.dists.back()));
}

TEST_CASE("every off-season step moves about the same mass") {
    auto spec = small_spec();
    spec.seasonal_multiplier = 4.0;
    auto t = generate_truth(spec);

    // Churn alone replaces support, so the JSD of a step equals the replaced mass.
    const std::size_t K = spec.catalog_size;
    std::set<std::size_t> seasonal(t.seasonal_positions.begin(), t.seasonal_positions.end());
    long double total = 0, eligible = 0;
    for (std::size_t r = 0; r < K; ++r) {
        const long double w = std::pow(static_cast<long double>(r + 1), -spec.zipf_exponent);
        total += w;
        if (!seasonal.count(r)) eligible += w;
    }
    const double m = std::round(spec.churn * K);
    const double expected = static_cast<double>(eligible * m / (K - seasonal.size()) / total);
    int checked = 0;
    for (std::size_t b = 1; b < t.bins.size(); ++b) {
        if (in_season(t, b) || in_season(t, b - 1)) continue;
        const double v = true_jsd(t, b - 1, b);
        CHECK(v == doctest::Approx(expected).epsilon(0.05 + 1e-9));
        ++checked;
    }
    CHECK(checked >= 9);
}

TEST_CASE("three-item market matches a hand computation") {
    SynthMarketSpec spec;
    spec.catalog_size = 3;
    spec.churn = 0.0;
    spec.seasonal_fraction = 1.0 / 3.0;
    spec.seasonal_multiplier = 2.0;
    spec.active_months = {2};
    spec.n_bins = 3;
    spec.loans_per_bin = 10;
    spec.n_loaners = 5;
    auto t = generate_truth(spec);
    REQUIRE(t.seasonal_positions.size() == 1);
    const std::size_t s = t.seasonal_positions[0];

    std::vector<long double> jan{1.0L, 0.5L, 1.0L / 3.0L}, feb = jan;
    feb[s] *= 2;
    auto norm = [](std::vector<long double> v) {
        long double z = 0;
        for (auto x : v) z += x;
        for (auto& x : v) x /= z;
        return v;
    };
    jan = norm(jan);
    feb = norm(feb);
    for (ItemId i = 0; i < 3; ++i) {
        CHECK(t.dists[0].prob_of(i) == doctest::Approx(static_cast<double>(jan[i])).epsilon(1e-15));
        CHECK(t.dists[1].prob_of(i) == doctest::Approx(static_cast<double>(feb[i])).epsilon(1e-15));
    }
    CHECK(true_jsd(t, 0, 1) == doctest::Approx(static_cast<double>(oracle::jsd_bits(jan, feb))).epsilon(1e-12));
    CHECK(true_jsd(t, 1, 2) == doctest::Approx(true_jsd(t, 0, 1)).epsilon(1e-12));
    CHECK(true_jsd(t, 0, 2) == 0.0);
}

TEST_CASE("seasonal items show up only at season edges") {
    auto spec = small_spec();
    spec.churn = 0.0;
    spec.seasonal_multiplier = 3.0;
    auto t = generate_truth(spec);
    for (std::size_t b = 1; b < t.bins.size(); ++b) {
        const bool edge = in_season(t, b) != in_season(t, b - 1);
        if (edge) {
            CHECK(true_jsd(t, b - 1, b) > 1e-4);
        } else {
            CHECK(true_jsd(t, b - 1, b) == 0.0);
        }
    }
}

TEST_CASE("samples follow the truth") {
    auto spec = small_spec();
    auto t = generate_truth(spec);
    auto s = sample_counts(t, 2, 400000, 0);
    CHECK(s.total() == 400000);
    CHECK(s.bin() == t.bins[2]);
    CHECK(sample_counts(t, 2) == sample_counts(t, 2, spec.loans_per_bin, 0));
    CHECK_FALSE(sample_counts(t, 2, 1000, 1) == sample_counts(t, 2, 1000, 2));
    CHECK(jsd(normalize(s), t.dists[2]).value < 0.01);
    for (const auto& c : s.counts()) REQUIRE(t.dists[2].prob_of(c.item) > 0.0);
}

TEST_CASE("event log and ebook variants") {
    auto spec = small_spec();
    spec.n_bins = 3;
    auto t = generate_truth(spec);
    std::ostringstream out;
    auto report = write_events(t, out);
    CHECK(report.events == spec.n_bins * spec.loans_per_bin);

    std::istringstream in(out.str());
    std::vector<LoanEvent> events;
    auto ingest_report = ingest_stream(in, {}, [&](const LoanEvent& e) { events.push_back(e); });
    CHECK(ingest_report.accepted == report.events);
    CHECK(ingest_report.malformed == 0);
    for (std::size_t i = 1; i < events.size(); ++i) REQUIRE(events[i - 1].date <= events[i].date);

    std::map<std::string, ItemRecord> records;
    std::size_t ebooks = 0;
    for (const auto& e : events) {
        records.emplace(e.item_key, ItemRecord{e.item_key, e.title, e.creator});
        ebooks += e.medium == Medium::ebook;
    }
    CHECK(records.size() == report.raw_items);
    CHECK(ebooks > 0);
    std::vector<ItemRecord> list;
    for (auto& [k, r] : records) list.push_back(r);
    auto catalog = canonicalize(list);
    for (const auto& [key, r] : records) {
        const std::string physical = key.back() == 'e' ? key.substr(0, key.size() - 1) : key;
        if (records.count(physical)) REQUIRE(*catalog.find(key) == physical);
        else REQUIRE(*catalog.find(key) == key);
    }

    std::ostringstream again;
    write_events(generate_truth(spec), again);
    CHECK(again.str() == out.str());
}

TEST_CASE("names, titles and validation") {
    auto t = generate_truth(small_spec());
    CHECK(t.items->name(42) == "b0000042");
    CHECK(synthetic_title(1) != synthetic_title(2));
    CHECK(edit_distance(synthetic_title(1), synthetic_title(2)) > 1);
    CHECK(synthetic_title(7) == synthetic_title(7));

    std::ostringstream truth_csv;
    write_truth_csv(t, truth_csv);
    CHECK(truth_csv.str().rfind("bin_start,canonical_id,probability\n2022-01-01,b0000000,", 0) == 0);

    auto bad = small_spec();
    bad.churn = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_spec();
    bad.active_months = {13};
    CHECK_THROWS_AS(generate_truth(bad), std::invalid_argument);
}

}
