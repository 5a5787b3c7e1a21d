#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "attndrift/diagnostics.hpp"
#include "attndrift/popularity.hpp"

namespace attndrift {

// Which divergence a DriftValue holds.
struct Measure {
    enum class Kind { jsd_bits, jsd_alpha_norm, jaccard };

    Kind kind = Kind::jsd_bits;
    double alpha = 1.0;  // only meaningful for jsd_alpha_norm

    static Measure jsd() { return {Kind::jsd_bits, 1.0}; }
    static Measure jsd_alpha(double alpha) { return {Kind::jsd_alpha_norm, alpha}; }
    static Measure jaccard() { return {Kind::jaccard, 1.0}; }

    // "jsd_bits", "jsd_alpha_norm(2)", "jaccard"
    std::string describe() const;
    friend bool operator==(const Measure&, const Measure&) = default;
};

struct DriftValue {
    double value = 0.0;
    Measure measure;
    std::uint64_t n_left = 0;
    std::uint64_t n_right = 0;
};

struct ItemContribution {
    ItemId item;
    double partial_bits;
};

// Per-item additive terms of the JSD, sorted by item, covering the union support.
struct ContributionBreakdown {
    std::vector<ItemContribution> items;
    double total_bits = 0.0;  // compensated sum of the partials
};

// Shannon entropy in bits.
double shannon_entropy(const RelativeDistribution& p);

// JSD(P,Q) = H(M) - (H(P) + H(Q)) / 2 with M = (P + Q) / 2, in bits.
DriftValue jsd(const RelativeDistribution& p, const RelativeDistribution& q);

// The JSD (entropy form, as jsd()) together with its per-item decomposition
//   partial_i = 1/2 [p_i log2(2 p_i / (p_i + q_i)) + q_i log2(2 q_i / (p_i + q_i))].
// The 1/2 makes the partials sum to the entropy form and keeps the total
// within one bit.
std::pair<DriftValue, ContributionBreakdown> jsd_with_contributions(const RelativeDistribution& p,
                                                                    const RelativeDistribution& q);

// Tsallis entropy H_a(P) = (sum p_i^a - 1) / (1 - a). Throws for a == 1 (use
// the Shannon entropy) and a < 0.
double tsallis_entropy(const RelativeDistribution& p, double alpha);

// Generalized JSD_a from Tsallis entropies divided by its maximum
//   JSD_a^max = (2^(1-a) - 1) / 2 * (H_a(P) + H_a(Q) + 2 / (1 - a)),
// so the result lies in [0,1]. a == 1 returns the JSD in bits (the analytic
// limit); a == 0 uses the support-count closed form
//   1 - |Supp P ∩ Supp Q| / ((|Supp P| + |Supp Q|) / 2).
// Alphas above 2 are computed but reported through `diag`.
DriftValue jsd_alpha_normalized(const RelativeDistribution& p, const RelativeDistribution& q, double alpha,
                                Diagnostics* diag = nullptr);

// 1 - |Supp P ∩ Supp Q| / |Supp P ∪ Supp Q|
DriftValue jaccard_distance(const RelativeDistribution& p, const RelativeDistribution& q);

DriftValue divergence(const RelativeDistribution& p, const RelativeDistribution& q, const Measure& m,
                      Diagnostics* diag = nullptr);

}  // namespace attndrift
