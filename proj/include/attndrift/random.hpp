#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace attndrift {

std::uint64_t splitmix64(std::uint64_t x);

// Seed for an independent stream identified by `keys`, a pure function of
// (root, keys). Used so that parallel jobs draw the same numbers regardless
// of scheduling.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys);

// mt19937_64 plus distribution code of our own, so streams are identical
// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    // Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

// Walker/Vose alias table for O(1) draws from a discrete distribution.
class AliasTable {
public:
    AliasTable() = default;
    explicit AliasTable(std::span<const double> weights);

    std::size_t size() const { return prob_.size(); }
    std::size_t sample(Rng& rng) const;

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

// Multinomial draw of n outcomes; returns per-category tallies.
std::vector<std::uint64_t> multinomial_tally(const AliasTable& table, std::uint64_t n, Rng& rng);

// k distinct indices drawn uniformly from [0, n), in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

// k distinct indices drawn with probability proportional to weight
// (Efraimidis-Spirakis keys), sorted ascending.
std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights, std::size_t k,
                                                             Rng& rng);

}  // namespace attndrift
