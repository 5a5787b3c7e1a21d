#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "attndrift/calendar.hpp"
#include "attndrift/divergence.hpp"
#include "attndrift/popularity.hpp"

namespace attndrift {

// Raised for analysis inputs that do not fit the request (gaps between bins,
// absent baseline). The CLI maps it to a data error.
class DriftInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Estimator {
    enum class Kind { plugin, bootstrap };

    Kind kind = Kind::plugin;
    int resamples = 500;
    std::uint64_t seed = 0;

    static Estimator plugin() { return {}; }
    static Estimator bootstrap(int resamples = 500, std::uint64_t seed = 0) {
        return {Kind::bootstrap, resamples, seed};
    }
    std::string describe() const;
};

struct DriftCell {
    double value = 0.0;  // plug-in value, or the bias-corrected value for bootstrap
    std::optional<double> std_error;
    double plugin_value = 0.0;
    std::uint64_t n_left = 0;
    std::uint64_t n_right = 0;
};

// Divergence between two bins under an estimator. The pair is always
// evaluated earlier bin first and bootstrap streams are keyed by the two bin
// indices, so every view of the same pair yields the same bits.
DriftCell estimate_pair(const PopularityDistribution& a, const PopularityDistribution& b, const Measure& measure,
                        const Estimator& estimator, unsigned threads = 1);

enum class DriftKind { local, global };

struct DriftPoint {
    TimeBin bin;        // the bin the value is reported at
    TimeBin reference;  // previous bin (local) or baseline (global)
    DriftCell cell;
};

struct DriftSeries {
    Measure measure;
    Estimator estimator;
    DriftKind kind = DriftKind::local;
    std::optional<TimeBin> baseline;
    std::vector<DriftPoint> points;
};

// value_t = m(dist_{t-1}, dist_t). Bins must be consecutive; gaps raise
// DriftInputError naming the missing bins.
DriftSeries local_drift(std::span<const PopularityDistribution> dists, const Measure& measure = Measure::jsd(),
                        const Estimator& estimator = {}, unsigned threads = 1);

// value_t = m(dist_baseline, dist_t) for every t != baseline.
DriftSeries global_drift(std::span<const PopularityDistribution> dists, const TimeBin& baseline,
                         const Measure& measure = Measure::jsd(), const Estimator& estimator = {},
                         unsigned threads = 1);

struct DriftMatrix {
    Measure measure;
    Estimator estimator;
    std::vector<TimeBin> bins;
    std::vector<double> values;  // row-major, symmetric, zero diagonal
    std::vector<double> std_errors;  // empty for plug-in

    std::size_t size() const { return bins.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * bins.size() + j]; }
};

DriftMatrix drift_matrix(std::span<const PopularityDistribution> dists, const Measure& measure = Measure::jsd(),
                         const Estimator& estimator = {}, unsigned threads = 1);

inline constexpr std::size_t kGroupCount = 5;

// Upper rank (inclusive) of groups G1..G4; G5 holds everything beyond.
struct GroupBounds {
    std::array<std::size_t, kGroupCount - 1> upper{100, 1000, 10000, 50000};

    // rank is 1-based; returns 0..4
    std::size_t group_of_rank(std::size_t rank) const;
};

struct RankedContribution {
    ItemId item;
    double partial_bits;
    std::uint64_t loans;  // loans of the item across both bins
    std::size_t rank;     // 1-based
    std::size_t group;    // 0..4
};

struct ContributionAnalysis {
    TimeBin left;
    TimeBin right;
    double jsd_bits = 0.0;
    std::vector<RankedContribution> ranked;  // by partial desc, loans desc, item asc
    // Sum of partials per group divided by the JSD; all zero when the JSD is 0.
    std::array<double, kGroupCount> shares{};
};

// Items with loans in either bin, ranked by their partial JSD.
ContributionAnalysis contribution_groups(const PopularityDistribution& left, const PopularityDistribution& right,
                                         const GroupBounds& bounds = {});

// Contribution analyses of each consecutive bin pair (local drift).
std::vector<ContributionAnalysis> local_contributions(std::span<const PopularityDistribution> dists,
                                                      const GroupBounds& bounds = {}, unsigned threads = 1);
// Contribution analyses of (baseline, t) for each t != baseline (global drift).
std::vector<ContributionAnalysis> global_contributions(std::span<const PopularityDistribution> dists,
                                                       const TimeBin& baseline, const GroupBounds& bounds = {},
                                                       unsigned threads = 1);

// Group of every ranked item for one bin pair, sorted by item.
struct GroupAssignment {
    TimeBin bin;
    std::vector<std::pair<ItemId, std::uint8_t>> groups;

    std::optional<std::size_t> group_of(ItemId item) const;
};

GroupAssignment group_assignment(const ContributionAnalysis& analysis);

using TransitionMatrix = std::array<std::array<double, kGroupCount>, kGroupCount>;

// Row g, column h: probability that an item in group g at pair t is in group
// h at pair t+1, averaged over consecutive pairs in which group g is
// populated. Items absent from the next pair's ranking land in G5. A group
// never populated gets an identity row.
TransitionMatrix transition_matrix(std::span<const GroupAssignment> schedule);

struct TrajectorySelector {
    enum class Kind { top_global_contrib, top_total, top_peak };

    Kind kind = Kind::top_total;
    std::size_t k = 1000;
    std::optional<TimeBin> at;        // top_global_contrib: bin whose global drift is decomposed
    std::optional<TimeBin> baseline;  // top_global_contrib: defaults to the first bin
};

struct TrajectoryRow {
    ItemId item;
    std::size_t peak_column;  // first column holding the maximum count
    std::vector<std::uint64_t> counts;
};

struct TrajectoryPanel {
    std::vector<TimeBin> bins;
    std::vector<TrajectoryRow> rows;  // sorted by peak column, then item
};

TrajectoryPanel trajectory_panel(std::span<const PopularityDistribution> dists, const TrajectorySelector& selector,
                                 Diagnostics* diag = nullptr);

// CSV writers.
void write_series_csv(std::ostream& out, const DriftSeries& series);
void write_matrix_csv(std::ostream& out, const DriftMatrix& matrix);
void write_group_shares_csv(std::ostream& out, std::span<const ContributionAnalysis> analyses);
void write_contributions_csv(std::ostream& out, const ContributionAnalysis& analysis, const ItemDictionary& items);
void write_transitions_csv(std::ostream& out, const TransitionMatrix& matrix);
void write_trajectory_csv(std::ostream& out, const TrajectoryPanel& panel, const ItemDictionary& items);

}  // namespace attndrift
