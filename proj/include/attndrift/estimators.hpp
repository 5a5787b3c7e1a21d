#pragma once

#include <cstdint>

#include "attndrift/divergence.hpp"
#include "attndrift/popularity.hpp"

namespace attndrift {

struct BootstrapEstimate {
    Measure measure;
    double plugin_value = 0.0;
    double corrected_value = 0.0;  // 2 * plugin - mean(resamples), clamped to [0,1]
    double resample_mean = 0.0;
    double std_error = 0.0;        // sample standard deviation of the resampled values
    int n_resamples = 500;
    std::uint64_t seed = 0;
};

// Maximum-likelihood estimate: the divergence of the normalized counts.
DriftValue plugin_estimate(const PopularityDistribution& a, const PopularityDistribution& b,
                           const Measure& measure = Measure::jsd());
DriftValue plugin_jsd(const PopularityDistribution& a, const PopularityDistribution& b);

// Bootstrap bias correction. Each resample draws total(a) loans from
// normalize(a) and total(b) loans from normalize(b) with replacement; resample
// r uses the stream derive_seed(seed, {r}), so results depend only on
// (counts, n_resamples, seed) and not on `threads`.
BootstrapEstimate bootstrap_estimate(const PopularityDistribution& a, const PopularityDistribution& b,
                                     const Measure& measure, int n_resamples = 500, std::uint64_t seed = 0,
                                     unsigned threads = 1);
BootstrapEstimate bootstrap_jsd(const PopularityDistribution& a, const PopularityDistribution& b,
                                int n_resamples = 500, std::uint64_t seed = 0, unsigned threads = 1);

}  // namespace attndrift
