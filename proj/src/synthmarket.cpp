#include "attndrift/synthmarket.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "attndrift/csv.hpp"
#include "attndrift/divergence.hpp"
#include "attndrift/random.hpp"

namespace attndrift {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kSeasonalTag = 1;
constexpr std::uint64_t kChurnTag = 2;
constexpr std::uint64_t kLoanTag = 3;
constexpr std::uint64_t kEventTag = 4;
constexpr std::uint64_t kLoanerTag = 5;

constexpr int kMaxChurnDraws = 1000;
constexpr double kChurnTolerance = 0.05;

std::string item_name(std::uint64_t item) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "b%07llu", static_cast<unsigned long long>(item));
    return buf;
}

std::string pseudo_words(std::uint64_t h, int words) {
    static constexpr const char* onsets[] = {"b", "d", "f", "g", "h", "k", "l", "m",
                                             "n", "p", "r", "s", "t", "v", "st", "tr"};
    static constexpr const char* vowels[] = {"a", "e", "i", "o", "u", "ae", "ei", "ou"};
    std::string out;
    for (int w = 0; w < words; ++w) {
        if (w) out += ' ';
        const int syllables = 2 + static_cast<int>(h & 1);
        h >>= 1;
        for (int s = 0; s < syllables; ++s) {
            out += onsets[h & 15];
            out += vowels[(h >> 4) & 7];
            h >>= 7;
            if (h < 1024) h = splitmix64(h + w + s + 1);
        }
    }
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
    return out;
}

Category item_category(std::uint64_t item) {
    const auto r = splitmix64(item ^ 0xca7e) % 100;
    if (r < 45) return Category::adult_fiction;
    if (r < 75) return Category::adult_nonfiction;
    if (r < 95) return Category::children;
    return Category::other;
}

bool has_ebook_variant(std::uint64_t item) { return splitmix64(item ^ 0xeb00c) % 5 == 0; }

}  // namespace

std::vector<CohortProfile> default_cohort_profiles() {
    return {
        {0.20, Sex::female, Education::higher, Residence::large_city, 30, 66},
        {0.15, Sex::female, Education::upper_secondary, Residence::town_rural, 46, 85},
        {0.10, Sex::male, Education::higher, Residence::large_city, 30, 66},
        {0.10, Sex::male, Education::basic, Residence::town_rural, 46, 85},
        {0.25, Sex::unknown, Education::unknown, Residence::unknown, 5, 18},
        {0.20, Sex::female, Education::basic, Residence::large_city, 18, 30},
    };
}

void SynthMarketSpec::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid market spec: " + what); };
    if (catalog_size == 0) fail("catalog_size must be positive");
    if (!(zipf_exponent >= 0.0) || !std::isfinite(zipf_exponent)) fail("zipf_exponent must be >= 0");
    if (!(churn >= 0.0 && churn <= 1.0)) fail("churn must lie in [0,1]");
    if (!(seasonal_fraction >= 0.0 && seasonal_fraction <= 1.0)) fail("seasonal_fraction must lie in [0,1]");
    if (!(seasonal_multiplier > 0.0) || !std::isfinite(seasonal_multiplier)) fail("seasonal_multiplier must be positive");
    for (unsigned m : active_months) {
        if (m < 1 || m > 12) fail("active months must lie in 1..12");
    }
    if (loans_per_bin == 0) fail("loans_per_bin must be positive");
    if (n_bins == 0) fail("n_bins must be positive");
    if (cohorts.empty()) fail("at least one cohort profile is needed");
    for (const auto& c : cohorts) {
        if (!(c.weight >= 0.0)) fail("cohort weights must be nonnegative");
        if (c.min_age < 0 || c.max_age <= c.min_age) fail("cohort age range must be nonempty");
    }
    if (std::none_of(cohorts.begin(), cohorts.end(), [](const auto& c) { return c.weight > 0; })) {
        fail("cohort weights must not all be zero");
    }
    if (n_loaners == 0) fail("n_loaners must be positive");
}

GroundTruth generate_truth(const SynthMarketSpec& spec) {
    spec.validate();
    const std::size_t K = spec.catalog_size;

    std::vector<double> rank_weight(K);
    for (std::size_t r = 0; r < K; ++r) rank_weight[r] = std::pow(static_cast<double>(r + 1), -spec.zipf_exponent);

    GroundTruth truth;
    truth.spec = spec;

    const auto n_seasonal = static_cast<std::size_t>(std::llround(spec.seasonal_fraction * static_cast<double>(K)));
    {
        Rng rng(derive_seed(spec.seed, {kSeasonalTag}));
        truth.seasonal_positions = weighted_sample_without_replacement(rank_weight, n_seasonal, rng);
    }
    std::vector<bool> seasonal(K, false);
    for (auto r : truth.seasonal_positions) seasonal[r] = true;
    std::vector<std::size_t> eligible;
    for (std::size_t r = 0; r < K; ++r) {
        if (!seasonal[r]) eligible.push_back(r);
    }
    long double eligible_mass = 0;
    for (auto r : eligible) eligible_mass += rank_weight[r];
    const std::size_t m = std::min(eligible.size(),
                                   static_cast<std::size_t>(std::llround(spec.churn * static_cast<double>(K))));
    const long double expected = eligible.empty() ? 0 : eligible_mass * m / eligible.size();

    std::vector<std::uint64_t> occupant(K);
    std::iota(occupant.begin(), occupant.end(), std::uint64_t{0});
    std::uint64_t next_item = K;

    for (std::size_t b = 0; b < spec.n_bins; ++b) {
        const TimeBin bin = b == 0 ? assign_bin(spec.start, spec.granularity)
                                   : bin_from_index(truth.bins.back().index + 1, spec.granularity);
        truth.bins.push_back(bin);

        if (b > 0 && m > 0) {
            Rng rng(derive_seed(spec.seed, {kChurnTag, b}));
            std::vector<std::size_t> best;
            long double best_gap = -1;
            for (int attempt = 0; attempt < kMaxChurnDraws; ++attempt) {
                auto pick = sample_without_replacement(eligible.size(), m, rng);
                long double mass = 0;
                for (auto i : pick) mass += rank_weight[eligible[i]];
                const long double gap = std::abs(mass - expected);
                if (best_gap < 0 || gap < best_gap) {
                    best_gap = gap;
                    best = std::move(pick);
                }
                if (gap <= kChurnTolerance * expected) break;
            }
            std::sort(best.begin(), best.end());
            for (auto i : best) occupant[eligible[i]] = next_item++;
        }

        const bool active = spec.active_months.count(bin.start.month()) > 0;
        std::vector<long double> w(rank_weight.begin(), rank_weight.end());
        if (active) {
            for (auto r : truth.seasonal_positions) w[r] *= spec.seasonal_multiplier;
        }
        const long double total = std::accumulate(w.begin(), w.end(), 0.0L);
        std::vector<ItemProb> probs(K);
        for (std::size_t r = 0; r < K; ++r) {
            probs[r] = {static_cast<ItemId>(occupant[r]), static_cast<double>(w[r] / total)};
        }
        std::sort(probs.begin(), probs.end(), [](const ItemProb& a, const ItemProb& b) { return a.item < b.item; });
        truth.dists.push_back(RelativeDistribution::from_sorted_probs(std::move(probs)));
    }

    auto dict = std::make_shared<ItemDictionary>();
    dict->names.reserve(next_item);
    for (std::uint64_t i = 0; i < next_item; ++i) dict->names.push_back(item_name(i));
    truth.items = std::move(dict);
    return truth;
}

std::vector<ItemId> draw_loans(const GroundTruth& truth, std::size_t bin, std::uint64_t n, std::uint64_t stream) {
    const auto& dist = truth.dists.at(bin);
    std::vector<double> p;
    p.reserve(dist.support_size());
    for (const auto& e : dist.probs()) p.push_back(e.p);
    AliasTable table(p);
    Rng rng(derive_seed(truth.spec.seed, {kLoanTag, bin, stream}));
    std::vector<ItemId> out(n);
    for (auto& item : out) item = dist.probs()[table.sample(rng)].item;
    return out;
}

PopularityDistribution sample_counts(const GroundTruth& truth, std::size_t bin, std::uint64_t n,
                                     std::uint64_t stream) {
    auto loans = draw_loans(truth, bin, n, stream);
    std::sort(loans.begin(), loans.end());
    std::vector<ItemCount> counts;
    for (ItemId id : loans) {
        if (!counts.empty() && counts.back().item == id) {
            ++counts.back().count;
        } else {
            counts.push_back({id, 1});
        }
    }
    return PopularityDistribution(truth.bins.at(bin), "all", std::move(counts));
}

PopularityDistribution sample_counts(const GroundTruth& truth, std::size_t bin) {
    return sample_counts(truth, bin, truth.spec.loans_per_bin);
}

double true_jsd(const GroundTruth& truth, std::size_t bin_a, std::size_t bin_b) {
    if (bin_a == bin_b) return 0.0;
    return jsd(truth.dists.at(bin_a), truth.dists.at(bin_b)).value;
}

std::string synthetic_title(std::uint64_t item) { return pseudo_words(splitmix64(item * 2 + 1), 3); }
std::string synthetic_creator(std::uint64_t item) { return pseudo_words(splitmix64(item * 2 + 2), 2); }

SynthWriteReport write_events(const GroundTruth& truth, std::ostream& out) {
    const auto& spec = truth.spec;

    struct Loaner {
        Date birthdate;
        Sex sex;
        Education education;
        Residence residence;
    };
    std::vector<Loaner> loaners(spec.n_loaners);
    {
        std::vector<double> weights;
        for (const auto& c : spec.cohorts) weights.push_back(c.weight);
        AliasTable pick(weights);
        Rng rng(derive_seed(spec.seed, {kLoanerTag}));
        for (auto& l : loaners) {
            const auto& c = spec.cohorts[pick.sample(rng)];
            const auto age_days = static_cast<std::int32_t>(
                c.min_age * 365.2425 + rng.uniform() * (c.max_age - c.min_age) * 365.2425);
            l = {spec.start.add_days(-age_days), c.sex, c.education, c.residence};
        }
    }

    const std::size_t n_items = truth.items->size();
    std::vector<std::string> titles(n_items), creators(n_items);
    std::vector<std::uint8_t> used(n_items, 0);  // bit 0 physical key, bit 1 ebook key

    SynthWriteReport report;
    out << event_log_header() << '\n';
    for (std::size_t b = 0; b < truth.bins.size(); ++b) {
        const TimeBin& bin = truth.bins[b];
        const auto loans = draw_loans(truth, b, spec.loans_per_bin);
        const auto span_days = static_cast<std::uint64_t>(bin.end.days() - bin.start.days());
        Rng rng(derive_seed(spec.seed, {kEventTag, b}));

        struct Pending {
            std::uint32_t day;
            std::uint32_t loaner;
            ItemId item;
            bool ebook;
        };
        std::vector<Pending> pending(loans.size());
        for (std::size_t i = 0; i < loans.size(); ++i) {
            const ItemId item = loans[i];
            const auto day = static_cast<std::uint32_t>(rng.below(span_days));
            const auto loaner = static_cast<std::uint32_t>(rng.below(spec.n_loaners));
            const bool ebook = has_ebook_variant(item) && rng.uniform() < 0.3;
            pending[i] = {day, loaner, item, ebook};
        }
        std::stable_sort(pending.begin(), pending.end(),
                         [](const Pending& a, const Pending& b) { return a.day < b.day; });

        LoanEvent e;
        for (const auto& p : pending) {
            if (titles[p.item].empty()) {
                titles[p.item] = synthetic_title(p.item);
                creators[p.item] = synthetic_creator(p.item);
            }
            const Loaner& l = loaners[p.loaner];
            e.date = bin.start.add_days(static_cast<std::int32_t>(p.day));
            e.item_key = truth.items->name(p.item);
            if (p.ebook) e.item_key += 'e';
            e.title = titles[p.item];
            e.creator = creators[p.item];
            e.category = item_category(p.item);
            e.medium = p.ebook ? Medium::ebook : Medium::physical;
            e.loaner_id = "L" + std::to_string(p.loaner);
            e.birthdate = l.birthdate;
            e.sex = l.sex;
            e.education = l.education;
            e.residence = l.residence;
            out << format_event(e) << '\n';
            used[p.item] |= p.ebook ? 2 : 1;
            ++report.events;
        }
    }
    for (auto u : used) report.raw_items += (u & 1) + ((u >> 1) & 1);
    return report;
}

void write_truth_csv(const GroundTruth& truth, std::ostream& out) {
    out << "bin_start,canonical_id,probability\n";
    for (std::size_t b = 0; b < truth.bins.size(); ++b) {
        const std::string start = truth.bins[b].start.to_string();
        for (const auto& e : truth.dists[b].probs()) {
            out << start << ',' << truth.items->name(e.item) << ',' << csv::format_double(e.p) << '\n';
        }
    }
}

}  // namespace attndrift
