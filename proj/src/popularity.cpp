#include "attndrift/popularity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "attndrift/canonicalizer.hpp"
#include "attndrift/csv.hpp"

namespace attndrift {

std::optional<ItemId> ItemDictionary::find(std::string_view name) const {
    auto it = std::lower_bound(names.begin(), names.end(), name,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == names.end() || *it != name) return std::nullopt;
    return static_cast<ItemId>(it - names.begin());
}

PopularityDistribution::PopularityDistribution(TimeBin bin, std::string cohort, std::vector<ItemCount> counts)
    : bin_(bin), cohort_(std::move(cohort)) {
    std::sort(counts.begin(), counts.end(), [](const ItemCount& a, const ItemCount& b) { return a.item < b.item; });
    for (const auto& c : counts) {
        if (c.count == 0) continue;
        if (!counts_.empty() && counts_.back().item == c.item) {
            counts_.back().count += c.count;
        } else {
            counts_.push_back(c);
        }
        total_ += c.count;
    }
}

std::uint64_t PopularityDistribution::count_of(ItemId item) const {
    auto it = std::lower_bound(counts_.begin(), counts_.end(), item,
                               [](const ItemCount& c, ItemId id) { return c.item < id; });
    return it != counts_.end() && it->item == item ? it->count : 0;
}

std::vector<ItemId> PopularityDistribution::support() const {
    std::vector<ItemId> ids;
    ids.reserve(counts_.size());
    for (const auto& c : counts_) ids.push_back(c.item);
    return ids;
}

RelativeDistribution RelativeDistribution::from_weights(std::vector<ItemProb> weights) {
    std::sort(weights.begin(), weights.end(), [](const ItemProb& a, const ItemProb& b) { return a.item < b.item; });
    RelativeDistribution d;
    long double total = 0;
    for (const auto& w : weights) {
        if (w.p < 0) throw std::invalid_argument("negative weight");
        if (w.p == 0) continue;
        if (!d.probs_.empty() && d.probs_.back().item == w.item) {
            d.probs_.back().p += w.p;
        } else {
            d.probs_.push_back(w);
        }
        total += w.p;
    }
    if (d.probs_.empty()) throw std::invalid_argument("distribution has no positive weight");
    for (auto& p : d.probs_) p.p = static_cast<double>(p.p / total);
    return d;
}

RelativeDistribution RelativeDistribution::from_sorted_probs(std::vector<ItemProb> probs) {
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i].p > 0)) throw std::invalid_argument("probabilities must be positive");
        if (i > 0 && probs[i - 1].item >= probs[i].item) throw std::invalid_argument("probabilities must be sorted by item");
    }
    RelativeDistribution d;
    d.probs_ = std::move(probs);
    return d;
}

double RelativeDistribution::prob_of(ItemId item) const {
    auto it = std::lower_bound(probs_.begin(), probs_.end(), item,
                               [](const ItemProb& c, ItemId id) { return c.item < id; });
    return it != probs_.end() && it->item == item ? it->p : 0.0;
}

RelativeDistribution normalize(const PopularityDistribution& dist) {
    if (dist.empty()) {
        throw std::invalid_argument("cannot normalize the empty distribution of bin " +
                                    dist.bin().start.to_string());
    }
    std::vector<ItemProb> probs;
    probs.reserve(dist.support_size());
    const auto total = static_cast<double>(dist.total());
    for (const auto& c : dist.counts()) probs.push_back({c.item, static_cast<double>(c.count) / total});
    return RelativeDistribution::from_sorted_probs(std::move(probs));
}

double probability_mass(const RelativeDistribution& dist) {
    double sum = 0.0;
    double comp = 0.0;
    for (const auto& p : dist.probs()) {
        double t = sum + p.p;
        if (std::abs(sum) >= std::abs(p.p)) {
            comp += (sum - t) + p.p;
        } else {
            comp += (p.p - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

Aggregator::Aggregator(Granularity granularity, CohortFilter cohort, const CanonicalCatalog* catalog)
    : granularity_(granularity), cohort_(std::move(cohort)), catalog_(catalog) {}

std::uint32_t Aggregator::intern_canonical(const std::string& canonical) {
    auto [it, inserted] = canonical_to_local_.emplace(canonical, static_cast<std::uint32_t>(local_names_.size()));
    if (inserted) local_names_.push_back(canonical);
    return it->second;
}

bool Aggregator::add(const LoanEvent& event) {
    ++report_.events_seen;
    if (!matches(event, cohort_, &report_.skips)) return false;
    ++report_.events_matched;

    std::uint32_t local = 0;
    if (auto it = raw_to_local_.find(event.item_key); it != raw_to_local_.end()) {
        local = it->second.local;
        if (it->second.unmapped) ++report_.unmapped_loans;
    } else {
        const std::string* canonical = catalog_ ? catalog_->find(event.item_key) : nullptr;
        if (catalog_ && !canonical) {
            ++report_.unmapped_loans;
            ++report_.unmapped_keys;
        }
        local = intern_canonical(canonical ? *canonical : event.item_key);
        raw_to_local_.emplace(event.item_key, RawEntry{local, catalog_ != nullptr && canonical == nullptr});
    }

    const std::int64_t bin = assign_bin(event.date, granularity_).index;
    if (!last_counts_ || bin != last_bin_) {
        last_counts_ = &counts_[bin];
        last_bin_ = bin;
    }
    ++(*last_counts_)[local];
    return true;
}

void Aggregator::merge(const Aggregator& other) {
    if (other.granularity_ != granularity_) throw std::invalid_argument("cannot merge aggregators of different granularity");
    std::vector<std::uint32_t> remap(other.local_names_.size());
    for (std::size_t i = 0; i < remap.size(); ++i) remap[i] = intern_canonical(other.local_names_[i]);
    for (const auto& [bin, counts] : other.counts_) {
        auto& mine = counts_[bin];
        for (const auto& [local, n] : counts) mine[remap[local]] += n;
    }
    last_counts_ = nullptr;
    report_.events_seen += other.report_.events_seen;
    report_.events_matched += other.report_.events_matched;
    report_.unmapped_loans += other.report_.unmapped_loans;
    report_.unmapped_keys += other.report_.unmapped_keys;
    report_.skips.missing_birthdate += other.report_.skips.missing_birthdate;
}

BinnedCounts Aggregator::finish(Diagnostics* diag) const {
    BinnedCounts out;
    out.report = report_;

    std::vector<std::uint32_t> order(local_names_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return local_names_[a] < local_names_[b]; });
    auto dict = std::make_shared<ItemDictionary>();
    dict->names.reserve(order.size());
    std::vector<ItemId> to_global(local_names_.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        to_global[order[rank]] = static_cast<ItemId>(rank);
        dict->names.push_back(local_names_[order[rank]]);
    }
    out.items = std::move(dict);

    const std::string label = cohort_.describe();
    for (const auto& [bin, counts] : counts_) {
        if (counts.empty()) continue;
        std::vector<ItemCount> cells;
        cells.reserve(counts.size());
        for (const auto& [local, n] : counts) cells.push_back({to_global[local], n});
        out.bins.emplace_back(bin_from_index(bin, granularity_), label, std::move(cells));
    }
    if (out.bins.empty()) warn(diag, "no events matched cohort '" + label + "'");
    if (report_.unmapped_keys > 0) {
        warn(diag, std::to_string(report_.unmapped_keys) + " item keys absent from the catalog were kept as their own items");
    }
    return out;
}

BinnedCounts aggregate(std::span<const LoanEvent> events, Granularity granularity, const CohortFilter& cohort,
                       const CanonicalCatalog* catalog, Diagnostics* diag) {
    Aggregator agg(granularity, cohort, catalog);
    for (const auto& e : events) agg.add(e);
    return agg.finish(diag);
}

BinnedCounts apply_catalog(const BinnedCounts& counts, const CanonicalCatalog& catalog) {
    const auto& names = counts.items->names;
    std::vector<const std::string*> canonical(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) canonical[i] = &catalog.canonical_or_self(names[i]);

    auto dict = std::make_shared<ItemDictionary>();
    for (const auto* c : canonical) dict->names.push_back(*c);
    std::sort(dict->names.begin(), dict->names.end());
    dict->names.erase(std::unique(dict->names.begin(), dict->names.end()), dict->names.end());
    std::vector<ItemId> remap(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) remap[i] = *dict->find(*canonical[i]);

    BinnedCounts out;
    out.report = counts.report;
    out.items = std::move(dict);
    out.bins.reserve(counts.bins.size());
    for (const auto& d : counts.bins) {
        std::vector<ItemCount> cells;
        cells.reserve(d.support_size());
        for (const auto& c : d.counts()) cells.push_back({remap[c.item], c.count});
        out.bins.emplace_back(d.bin(), d.cohort(), std::move(cells));
    }
    return out;
}

TopKResult restrict_top_k(std::span<const PopularityDistribution> dists, std::size_t k, Diagnostics* diag) {
    if (k == 0) throw std::invalid_argument("top-k restriction needs k >= 1");
    std::unordered_map<ItemId, std::uint64_t> totals;
    for (const auto& d : dists) {
        for (const auto& c : d.counts()) totals[c.item] += c.count;
    }
    std::vector<std::pair<ItemId, std::uint64_t>> ranked(totals.begin(), totals.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (ranked.size() < k) {
        warn(diag, "only " + std::to_string(ranked.size()) + " distinct items available; keeping all instead of top " +
                       std::to_string(k));
    } else {
        ranked.resize(k);
    }
    TopKResult out;
    out.kept.reserve(ranked.size());
    for (const auto& r : ranked) out.kept.push_back(r.first);
    std::sort(out.kept.begin(), out.kept.end());

    out.bins.reserve(dists.size());
    for (const auto& d : dists) {
        std::vector<ItemCount> kept;
        kept.reserve(std::min(d.support_size(), out.kept.size()));
        // Sorted merge of the bin's counts with the kept set.
        auto it = out.kept.begin();
        for (const auto& c : d.counts()) {
            it = std::lower_bound(it, out.kept.end(), c.item);
            if (it == out.kept.end()) break;
            if (*it == c.item) kept.push_back(c);
        }
        out.bins.emplace_back(d.bin(), d.cohort(), std::move(kept));
    }
    return out;
}

std::vector<RankFrequencyPoint> rank_frequency(const PopularityDistribution& dist) {
    std::vector<std::uint64_t> counts;
    counts.reserve(dist.support_size());
    for (const auto& c : dist.counts()) counts.push_back(c.count);
    std::sort(counts.begin(), counts.end(), std::greater<>());
    std::vector<RankFrequencyPoint> out;
    out.reserve(counts.size());
    const double n = static_cast<double>(counts.size());
    std::size_t i = 0;
    while (i < counts.size()) {
        // Items with count >= counts[i] are the ranks up to the last tie of counts[i].
        std::size_t last = i;
        while (last + 1 < counts.size() && counts[last + 1] == counts[i]) ++last;
        for (std::size_t r = i; r <= last; ++r) {
            out.push_back({r + 1, counts[r], static_cast<double>(last + 1) / n});
        }
        i = last + 1;
    }
    return out;
}

void write_distribution_dump(std::ostream& out, std::span<const PopularityDistribution> dists,
                             const ItemDictionary& items) {
    out << "bin_start,canonical_id,count\n";
    for (const auto& d : dists) {
        const std::string start = d.bin().start.to_string();
        for (const auto& c : d.counts()) {
            out << start << ',' << csv::escape(items.name(c.item)) << ',' << c.count << '\n';
        }
    }
}

}  // namespace attndrift
