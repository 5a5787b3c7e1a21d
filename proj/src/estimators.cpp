#include "attndrift/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "attndrift/parallel.hpp"
#include "attndrift/random.hpp"

namespace attndrift {

namespace {

void require_counts(const PopularityDistribution& a, const PopularityDistribution& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("estimator input has no loans");
}

// Resampling state for one side: the plug-in distribution as an alias table.
class Resampler {
public:
    explicit Resampler(const PopularityDistribution& dist) : dist_(dist) {
        std::vector<double> weights;
        weights.reserve(dist.support_size());
        for (const auto& c : dist.counts()) weights.push_back(static_cast<double>(c.count));
        table_ = AliasTable(weights);
    }

    RelativeDistribution draw(Rng& rng) const {
        auto tally = multinomial_tally(table_, dist_.total(), rng);
        std::vector<ItemProb> probs;
        probs.reserve(tally.size());
        const auto total = static_cast<double>(dist_.total());
        auto counts = dist_.counts();
        for (std::size_t i = 0; i < tally.size(); ++i) {
            if (tally[i] > 0) probs.push_back({counts[i].item, static_cast<double>(tally[i]) / total});
        }
        return RelativeDistribution::from_sorted_probs(std::move(probs));
    }

private:
    const PopularityDistribution& dist_;
    AliasTable table_;
};

}  // namespace

DriftValue plugin_estimate(const PopularityDistribution& a, const PopularityDistribution& b, const Measure& measure) {
    require_counts(a, b);
    DriftValue v = divergence(normalize(a), normalize(b), measure);
    v.n_left = a.total();
    v.n_right = b.total();
    return v;
}

DriftValue plugin_jsd(const PopularityDistribution& a, const PopularityDistribution& b) {
    return plugin_estimate(a, b, Measure::jsd());
}

BootstrapEstimate bootstrap_estimate(const PopularityDistribution& a, const PopularityDistribution& b,
                                     const Measure& measure, int n_resamples, std::uint64_t seed,
                                     unsigned threads) {
    require_counts(a, b);
    if (n_resamples < 2) throw std::invalid_argument("bootstrap needs at least 2 resamples");

    BootstrapEstimate est;
    est.measure = measure;
    est.n_resamples = n_resamples;
    est.seed = seed;
    est.plugin_value = plugin_estimate(a, b, measure).value;

    const Resampler left(a);
    const Resampler right(b);
    std::vector<double> values(static_cast<std::size_t>(n_resamples));
    parallel_for(values.size(), threads, [&](std::size_t r) {
        Rng rng(derive_seed(seed, {r}));
        auto ra = left.draw(rng);
        auto rb = right.draw(rng);
        values[r] = divergence(ra, rb, measure).value;
    });

    long double sum = 0;
    for (double v : values) sum += v;
    const double mean = static_cast<double>(sum / values.size());
    long double ss = 0;
    for (double v : values) ss += static_cast<long double>(v - mean) * (v - mean);
    est.resample_mean = mean;
    est.std_error = std::sqrt(static_cast<double>(ss / (values.size() - 1)));
    est.corrected_value = std::clamp(2.0 * est.plugin_value - mean, 0.0, 1.0);
    return est;
}

BootstrapEstimate bootstrap_jsd(const PopularityDistribution& a, const PopularityDistribution& b, int n_resamples,
                                std::uint64_t seed, unsigned threads) {
    return bootstrap_estimate(a, b, Measure::jsd(), n_resamples, seed, threads);
}

}  // namespace attndrift
