#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "attndrift/calendar.hpp"
#include "attndrift/event_ledger.hpp"
#include "attndrift/popularity.hpp"

namespace attndrift {

// Demographic profile of a share of the synthetic loaner population.
struct CohortProfile {
    double weight = 1.0;
    Sex sex = Sex::unknown;
    Education education = Education::unknown;
    Residence residence = Residence::unknown;
    int min_age = 18;  // age at the market start, [min_age, max_age)
    int max_age = 80;
};

std::vector<CohortProfile> default_cohort_profiles();

struct SynthMarketSpec {
    std::size_t catalog_size = 50000;
    double zipf_exponent = 1.0;
    double churn = 0.05;                 // fraction of rank positions handed to fresh items each bin
    double seasonal_fraction = 0.01;     // share of the catalog that is seasonal
    double seasonal_multiplier = 1.0;    // gamma
    std::set<unsigned> active_months{11, 12};
    std::uint64_t loans_per_bin = 500000;
    std::size_t n_bins = 24;
    Granularity granularity = Granularity::month;
    Date start = Date::from_ymd(2022, 1, 1);
    std::vector<CohortProfile> cohorts = default_cohort_profiles();
    std::size_t n_loaners = 100000;
    std::uint64_t seed = 0;

    // Throws std::invalid_argument naming the first bad parameter.
    void validate() const;
};

// Exact per-bin distributions before sampling. Item ids index `items`, whose
// names are "b" followed by the zero-padded item number, so id order is the
// item number order.
struct GroundTruth {
    SynthMarketSpec spec;
    std::shared_ptr<const ItemDictionary> items;
    std::vector<TimeBin> bins;
    std::vector<RelativeDistribution> dists;
    std::vector<std::size_t> seasonal_positions;  // zipf ranks (0-based) of the seasonal set
};

// Builds the true distributions. Rank weights follow r^-s; seasonal ranks are
// drawn by weight and never churn. Each bin after the first hands
// round(churn * K) non-seasonal ranks to fresh items; the drawn ranks are
// redrawn until their weight is within 5% of the expected share, so every step
// moves about the same mass. In active months seasonal weights are multiplied
// by gamma before renormalizing.
GroundTruth generate_truth(const SynthMarketSpec& spec);

// Item ids of `n` loans drawn from bin `bin`, in draw order. `stream`
// selects an independent sample of the same bin.
std::vector<ItemId> draw_loans(const GroundTruth& truth, std::size_t bin, std::uint64_t n, std::uint64_t stream = 0);

// Tally of draw_loans as a distribution over truth.items.
PopularityDistribution sample_counts(const GroundTruth& truth, std::size_t bin, std::uint64_t n,
                                     std::uint64_t stream = 0);
PopularityDistribution sample_counts(const GroundTruth& truth, std::size_t bin);

double true_jsd(const GroundTruth& truth, std::size_t bin_a, std::size_t bin_b);

// Title and creator of a synthetic item; distinct items differ by far more
// than one edit.
std::string synthetic_title(std::uint64_t item);
std::string synthetic_creator(std::uint64_t item);

struct SynthWriteReport {
    std::uint64_t events = 0;
    std::uint64_t raw_items = 0;  // distinct item keys written
};

// Writes the event log (stream 0 of every bin, loans_per_bin each), sorted by
// day. Some items also circulate as an ebook variant with key suffix "e" and
// the same title, which the canonicalizer folds back onto the physical key.
SynthWriteReport write_events(const GroundTruth& truth, std::ostream& out);

// bin_start,canonical_id,probability
void write_truth_csv(const GroundTruth& truth, std::ostream& out);

}  // namespace attndrift
