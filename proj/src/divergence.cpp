#include "attndrift/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace attndrift {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

// Visits the union support of two sorted sparse distributions in item order,
// passing (item, p, q) with 0 for an absent side.
template <typename Fn>
void merge_supports(const RelativeDistribution& p, const RelativeDistribution& q, Fn&& fn) {
    auto a = p.probs();
    auto b = q.probs();
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].item < b[j].item)) {
            fn(a[i].item, a[i].p, 0.0);
            ++i;
        } else if (i == a.size() || b[j].item < a[i].item) {
            fn(b[j].item, 0.0, b[j].p);
            ++j;
        } else {
            fn(a[i].item, a[i].p, b[j].p);
            ++i;
            ++j;
        }
    }
}

double neg_xlog2x(double x) { return x > 0.0 ? -x * std::log2(x) : 0.0; }

// Partial JSD of one item in bits. Written via log1p of the relative
// difference so nearly unchanged items do not lose precision.
double partial_jsd(double p, double q) {
    if (p == q) return 0.0;
    if (p == 0.0 || q == 0.0) return 0.5 * (p + q);
    const double d = (p - q) / (p + q);
    const double v = 0.5 * (p * std::log1p(d) + q * std::log1p(-d)) / std::numbers::ln2;
    return std::max(v, 0.0);
}

struct SupportCounts {
    std::size_t left = 0, right = 0, both = 0;
};

SupportCounts count_supports(const RelativeDistribution& p, const RelativeDistribution& q) {
    SupportCounts c;
    merge_supports(p, q, [&](ItemId, double a, double b) {
        if (a > 0) ++c.left;
        if (b > 0) ++c.right;
        if (a > 0 && b > 0) ++c.both;
    });
    return c;
}

void require_nonempty(const RelativeDistribution& p, const RelativeDistribution& q) {
    if (p.empty() || q.empty()) throw std::invalid_argument("divergence of an empty distribution");
}

}  // namespace

std::string Measure::describe() const {
    switch (kind) {
        case Kind::jsd_bits: return "jsd_bits";
        case Kind::jaccard: return "jaccard";
        case Kind::jsd_alpha_norm: {
            std::ostringstream os;
            os << "jsd_alpha_norm(" << alpha << ")";
            return os.str();
        }
    }
    return "jsd_bits";
}

double shannon_entropy(const RelativeDistribution& p) {
    CompensatedSum h;
    for (const auto& e : p.probs()) h.add(neg_xlog2x(e.p));
    return std::max(h.value(), 0.0);
}

DriftValue jsd(const RelativeDistribution& p, const RelativeDistribution& q) {
    require_nonempty(p, q);
    CompensatedSum hm, hp, hq;
    merge_supports(p, q, [&](ItemId, double a, double b) {
        hm.add(neg_xlog2x(0.5 * (a + b)));
        hp.add(neg_xlog2x(a));
        hq.add(neg_xlog2x(b));
    });
    const double value = hm.value() - 0.5 * (hp.value() + hq.value());
    return {clamp_unit(value), Measure::jsd()};
}

std::pair<DriftValue, ContributionBreakdown> jsd_with_contributions(const RelativeDistribution& p,
                                                                    const RelativeDistribution& q) {
    require_nonempty(p, q);
    ContributionBreakdown breakdown;
    breakdown.items.reserve(std::max(p.support_size(), q.support_size()));
    CompensatedSum total;
    merge_supports(p, q, [&](ItemId item, double a, double b) {
        const double part = partial_jsd(a, b);
        breakdown.items.push_back({item, part});
        total.add(part);
    });
    breakdown.total_bits = total.value();
    return {jsd(p, q), std::move(breakdown)};
}

double tsallis_entropy(const RelativeDistribution& p, double alpha) {
    if (alpha == 1.0) {
        throw std::invalid_argument("Tsallis entropy of order 1 is the Shannon entropy; use shannon_entropy");
    }
    if (alpha < 0.0) throw std::invalid_argument("Tsallis entropy needs alpha >= 0");
    CompensatedSum s;
    for (const auto& e : p.probs()) s.add(std::pow(e.p, alpha));
    return (s.value() - 1.0) / (1.0 - alpha);
}

DriftValue jsd_alpha_normalized(const RelativeDistribution& p, const RelativeDistribution& q, double alpha,
                                Diagnostics* diag) {
    require_nonempty(p, q);
    if (!(alpha >= 0.0)) throw std::invalid_argument("normalized alpha-JSD needs alpha >= 0");
    if (alpha > 2.0) {
        warn(diag, "alpha " + std::to_string(alpha) + " lies outside [0,2], where the square root is not a metric");
    }
    const Measure measure = Measure::jsd_alpha(alpha);
    if (alpha == 1.0) return {jsd(p, q).value, measure};
    if (alpha == 0.0) {
        const auto c = count_supports(p, q);
        const double mean_support = 0.5 * static_cast<double>(c.left + c.right);
        return {clamp_unit(1.0 - static_cast<double>(c.both) / mean_support), measure};
    }

    // With S_X = sum x_i^a the (1 - a) factors cancel:
    //   JSD_a     = (S_M - (S_P + S_Q) / 2) / (1 - a)
    //   JSD_a^max = (2^(1-a) - 1) / 2 * (S_P + S_Q) / (1 - a)
    CompensatedSum numerator, sp, sq;
    bool overlap = false;
    merge_supports(p, q, [&](ItemId, double a, double b) {
        overlap = overlap || (a > 0 && b > 0);
        const double pa = a > 0 ? std::pow(a, alpha) : 0.0;
        const double qa = b > 0 ? std::pow(b, alpha) : 0.0;
        const double ma = a == b ? pa : std::pow(0.5 * (a + b), alpha);
        numerator.add(ma - 0.5 * (pa + qa));
        sp.add(pa);
        sq.add(qa);
    });
    // Disjoint supports attain the maximum exactly.
    if (!overlap) return {1.0, measure};
    const double scale = 0.5 * std::expm1((1.0 - alpha) * std::numbers::ln2);
    const double denominator = scale * (sp.value() + sq.value());
    if (denominator == 0.0) return {0.0, measure};
    return {clamp_unit(numerator.value() / denominator), measure};
}

DriftValue jaccard_distance(const RelativeDistribution& p, const RelativeDistribution& q) {
    require_nonempty(p, q);
    const auto c = count_supports(p, q);
    const std::size_t uni = c.left + c.right - c.both;
    return {clamp_unit(1.0 - static_cast<double>(c.both) / static_cast<double>(uni)), Measure::jaccard()};
}

DriftValue divergence(const RelativeDistribution& p, const RelativeDistribution& q, const Measure& m,
                      Diagnostics* diag) {
    switch (m.kind) {
        case Measure::Kind::jsd_bits: return jsd(p, q);
        case Measure::Kind::jsd_alpha_norm: return jsd_alpha_normalized(p, q, m.alpha, diag);
        case Measure::Kind::jaccard: return jaccard_distance(p, q);
    }
    return jsd(p, q);
}

}  // namespace attndrift
