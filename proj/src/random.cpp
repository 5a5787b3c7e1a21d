#include "attndrift/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace attndrift {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = splitmix64(root);
    for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ull));
    return h;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

AliasTable::AliasTable(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("alias table needs at least one weight");
    long double total = 0;
    for (double w : weights) {
        if (!(w >= 0)) throw std::invalid_argument("alias table weights must be nonnegative");
        total += w;
    }
    if (total <= 0) throw std::invalid_argument("alias table weights sum to zero");

    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = static_cast<double>(weights[i] * static_cast<long double>(n) / total);
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        auto s = small.back();
        small.pop_back();
        auto l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (auto l : large) {
        prob_[l] = 1.0;
        alias_[l] = l;
    }
    for (auto s : small) {
        prob_[s] = 1.0;
        alias_[s] = s;
    }
}

std::size_t AliasTable::sample(Rng& rng) const {
    const double u = rng.uniform() * static_cast<double>(prob_.size());
    auto column = static_cast<std::size_t>(u);
    if (column >= prob_.size()) column = prob_.size() - 1;
    const double frac = u - static_cast<double>(column);
    return frac < prob_[column] ? column : alias_[column];
}

std::vector<std::uint64_t> multinomial_tally(const AliasTable& table, std::uint64_t n, Rng& rng) {
    std::vector<std::uint64_t> tally(table.size(), 0);
    for (std::uint64_t i = 0; i < n; ++i) ++tally[table.sample(rng)];
    return tally;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n) throw std::invalid_argument("cannot draw more distinct indices than available");
    // Partial Fisher-Yates over a sparse permutation.
    std::unordered_map<std::size_t, std::size_t> swapped;
    std::vector<std::size_t> out;
    out.reserve(k);
    auto at = [&](std::size_t i) {
        auto it = swapped.find(i);
        return it == swapped.end() ? i : it->second;
    };
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::size_t vi = at(i), vj = at(j);
        out.push_back(vj);
        swapped[j] = vi;
        swapped[i] = vj;
    }
    return out;
}

std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights, std::size_t k,
                                                             Rng& rng) {
    std::vector<std::pair<double, std::size_t>> keys;
    keys.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0) continue;
        // log(u) / w orders identically to u^(1/w) without underflow.
        double u = rng.uniform();
        while (u == 0.0) u = rng.uniform();
        keys.emplace_back(std::log(u) / weights[i], i);
    }
    if (k > keys.size()) throw std::invalid_argument("not enough positive weights for the requested sample");
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(keys[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace attndrift
