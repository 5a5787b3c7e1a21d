#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "attndrift/calendar.hpp"
#include "attndrift/diagnostics.hpp"
#include "attndrift/event_ledger.hpp"

namespace attndrift {

class CanonicalCatalog;

// Dense index of a canonical item. Within one ItemDictionary ids are assigned
// in lexicographic order of the canonical id strings, so comparing ids is the
// same as comparing canonical ids.
using ItemId = std::uint32_t;

struct ItemDictionary {
    std::vector<std::string> names;  // sorted, id = position

    std::optional<ItemId> find(std::string_view name) const;
    const std::string& name(ItemId id) const { return names.at(id); }
    std::size_t size() const { return names.size(); }
};

struct ItemCount {
    ItemId item;
    std::uint64_t count;
    friend bool operator==(const ItemCount&, const ItemCount&) = default;
};

// Loan counts of canonical items within one (time bin, cohort) cell.
// Counts are sorted by item and strictly positive; total is their sum.
class PopularityDistribution {
public:
    PopularityDistribution() = default;
    // Sorts, merges duplicate items and drops zero counts.
    PopularityDistribution(TimeBin bin, std::string cohort, std::vector<ItemCount> counts);

    const TimeBin& bin() const { return bin_; }
    const std::string& cohort() const { return cohort_; }
    std::span<const ItemCount> counts() const { return counts_; }
    std::uint64_t total() const { return total_; }
    std::size_t support_size() const { return counts_.size(); }
    bool empty() const { return total_ == 0; }
    std::uint64_t count_of(ItemId item) const;
    std::vector<ItemId> support() const;

    friend bool operator==(const PopularityDistribution&, const PopularityDistribution&) = default;

private:
    TimeBin bin_;
    std::string cohort_;
    std::vector<ItemCount> counts_;
    std::uint64_t total_ = 0;
};

struct ItemProb {
    ItemId item;
    double p;
};

// Sparse probability vector sorted by item; every stored probability > 0.
class RelativeDistribution {
public:
    RelativeDistribution() = default;
    // Normalizes nonnegative weights (zero weights dropped). Throws when all are zero.
    static RelativeDistribution from_weights(std::vector<ItemProb> weights);
    // Takes probabilities as given; they must be sorted by item, unique and
    // positive. The caller is responsible for their summing to one.
    static RelativeDistribution from_sorted_probs(std::vector<ItemProb> probs);

    std::span<const ItemProb> probs() const { return probs_; }
    std::size_t support_size() const { return probs_.size(); }
    bool empty() const { return probs_.empty(); }
    double prob_of(ItemId item) const;

private:
    std::vector<ItemProb> probs_;
};

// probs[i] = counts[i] / total. Throws std::invalid_argument when empty.
RelativeDistribution normalize(const PopularityDistribution& dist);

// Compensated (Neumaier) sum of the probabilities.
double probability_mass(const RelativeDistribution& dist);

struct AggregateReport {
    std::uint64_t events_seen = 0;
    std::uint64_t events_matched = 0;
    std::uint64_t unmapped_loans = 0;     // loans whose raw key is not in the catalog
    std::uint64_t unmapped_keys = 0;      // distinct such keys
    CohortSkipTally skips;
};

struct BinnedCounts {
    std::shared_ptr<const ItemDictionary> items;
    std::vector<PopularityDistribution> bins;  // ascending, non-empty bins only
    AggregateReport report;
};

// Streaming aggregation: feed events one at a time, then finish(). Only
// per-bin sparse counts are held, never the events. Keys missing from the
// catalog pass through as their own canonical id.
class Aggregator {
public:
    Aggregator(Granularity granularity, CohortFilter cohort, const CanonicalCatalog* catalog = nullptr);

    // Returns true when the event matched the cohort and was counted.
    bool add(const LoanEvent& event);
    // Adds counts of another aggregator (same granularity) keyed by canonical id.
    void merge(const Aggregator& other);
    BinnedCounts finish(Diagnostics* diag = nullptr) const;

private:
    std::uint32_t intern_canonical(const std::string& canonical);

    Granularity granularity_;
    CohortFilter cohort_;
    const CanonicalCatalog* catalog_;
    std::vector<std::string> local_names_;
    std::unordered_map<std::string, std::uint32_t> canonical_to_local_;
    struct RawEntry {
        std::uint32_t local;
        bool unmapped;
    };
    std::unordered_map<std::string, RawEntry> raw_to_local_;
    std::map<std::int64_t, std::unordered_map<std::uint32_t, std::uint64_t>> counts_;
    std::int64_t last_bin_ = 0;
    std::unordered_map<std::uint32_t, std::uint64_t>* last_counts_ = nullptr;
    AggregateReport report_;
};

BinnedCounts aggregate(std::span<const LoanEvent> events, Granularity granularity, const CohortFilter& cohort,
                       const CanonicalCatalog* catalog = nullptr, Diagnostics* diag = nullptr);

// Re-keys counts aggregated by raw key onto the catalog's canonical ids,
// summing the counts of merged variants. Keys absent from the catalog stay.
BinnedCounts apply_catalog(const BinnedCounts& counts, const CanonicalCatalog& catalog);

struct TopKResult {
    std::vector<PopularityDistribution> bins;
    std::vector<ItemId> kept;  // sorted by id
};

// Keeps the k items with the largest total count across all bins (ties by
// canonical id) and filters every bin to that one set.
TopKResult restrict_top_k(std::span<const PopularityDistribution> dists, std::size_t k,
                          Diagnostics* diag = nullptr);

struct RankFrequencyPoint {
    std::size_t rank;
    std::uint64_t count;
    double ccdf;  // fraction of items with count >= this count
};

std::vector<RankFrequencyPoint> rank_frequency(const PopularityDistribution& dist);

// bin_start,canonical_id,count
void write_distribution_dump(std::ostream& out, std::span<const PopularityDistribution> dists,
                             const ItemDictionary& items);

}  // namespace attndrift
