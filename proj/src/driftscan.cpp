#include "attndrift/driftscan.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "attndrift/csv.hpp"
#include "attndrift/estimators.hpp"
#include "attndrift/parallel.hpp"
#include "attndrift/random.hpp"

namespace attndrift {

std::string Estimator::describe() const {
    if (kind == Kind::plugin) return "plugin";
    return "bootstrap(resamples=" + std::to_string(resamples) + ",seed=" + std::to_string(seed) + ")";
}

DriftCell estimate_pair(const PopularityDistribution& a, const PopularityDistribution& b, const Measure& measure,
                        const Estimator& estimator, unsigned threads) {
    const bool swap = b.bin() < a.bin();
    const PopularityDistribution& first = swap ? b : a;
    const PopularityDistribution& second = swap ? a : b;

    DriftCell cell;
    if (estimator.kind == Estimator::Kind::plugin) {
        auto v = plugin_estimate(first, second, measure);
        cell.value = v.value;
        cell.plugin_value = v.value;
    } else {
        const std::uint64_t seed =
            derive_seed(estimator.seed, {static_cast<std::uint64_t>(first.bin().index),
                                         static_cast<std::uint64_t>(second.bin().index),
                                         static_cast<std::uint64_t>(first.bin().granularity)});
        auto est = bootstrap_estimate(first, second, measure, estimator.resamples, seed, threads);
        cell.value = est.corrected_value;
        cell.plugin_value = est.plugin_value;
        cell.std_error = est.std_error;
    }
    cell.n_left = a.total();
    cell.n_right = b.total();
    return cell;
}

namespace {

void require_sorted_same_granularity(std::span<const PopularityDistribution> dists) {
    for (std::size_t i = 1; i < dists.size(); ++i) {
        if (dists[i].bin().granularity != dists[0].bin().granularity) {
            throw DriftInputError("distributions mix time granularities");
        }
        if (!(dists[i - 1].bin() < dists[i].bin())) {
            throw DriftInputError("distributions must be in strictly ascending bin order");
        }
    }
}

// Cells are independent jobs; with several cells the parallelism goes to the
// cells and each bootstrap runs single-threaded.
template <typename PairFn>
std::vector<DriftCell> evaluate_pairs(std::size_t n, unsigned threads, PairFn&& pair_at, const Measure& measure,
                                      const Estimator& estimator) {
    std::vector<DriftCell> cells(n);
    const unsigned inner = n == 1 ? threads : 1;
    parallel_for(n, n == 1 ? 1 : threads, [&](std::size_t i) {
        auto [a, b] = pair_at(i);
        cells[i] = estimate_pair(*a, *b, measure, estimator, inner);
    });
    return cells;
}

}  // namespace

DriftSeries local_drift(std::span<const PopularityDistribution> dists, const Measure& measure,
                        const Estimator& estimator, unsigned threads) {
    if (dists.size() < 2) throw DriftInputError("local drift needs at least two bins");
    require_sorted_same_granularity(dists);
    std::string missing;
    for (std::size_t i = 1; i < dists.size(); ++i) {
        for (auto idx = dists[i - 1].bin().index + 1; idx < dists[i].bin().index; ++idx) {
            if (!missing.empty()) missing += ", ";
            missing += bin_from_index(idx, dists[i].bin().granularity).start.to_string();
        }
    }
    if (!missing.empty()) throw DriftInputError("gap in bin sequence; missing bins: " + missing);

    DriftSeries series;
    series.measure = measure;
    series.estimator = estimator;
    series.kind = DriftKind::local;
    auto cells = evaluate_pairs(
        dists.size() - 1, threads, [&](std::size_t i) { return std::pair{&dists[i], &dists[i + 1]}; }, measure,
        estimator);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        series.points.push_back({dists[i + 1].bin(), dists[i].bin(), cells[i]});
    }
    return series;
}

DriftSeries global_drift(std::span<const PopularityDistribution> dists, const TimeBin& baseline,
                         const Measure& measure, const Estimator& estimator, unsigned threads) {
    require_sorted_same_granularity(dists);
    auto base = std::find_if(dists.begin(), dists.end(), [&](const auto& d) { return d.bin() == baseline; });
    if (base == dists.end()) {
        throw DriftInputError("baseline bin " + baseline.start.to_string() + " (" +
                              std::string(to_string(baseline.granularity)) + ") is not present in the data");
    }
    std::vector<const PopularityDistribution*> others;
    for (const auto& d : dists) {
        if (&d != &*base) others.push_back(&d);
    }
    DriftSeries series;
    series.measure = measure;
    series.estimator = estimator;
    series.kind = DriftKind::global;
    series.baseline = baseline;
    auto cells = evaluate_pairs(
        others.size(), threads, [&](std::size_t i) { return std::pair{&*base, others[i]}; }, measure, estimator);
    for (std::size_t i = 0; i < cells.size(); ++i) series.points.push_back({others[i]->bin(), baseline, cells[i]});
    return series;
}

DriftMatrix drift_matrix(std::span<const PopularityDistribution> dists, const Measure& measure,
                         const Estimator& estimator, unsigned threads) {
    if (dists.size() < 2) throw DriftInputError("a drift matrix needs at least two bins");
    require_sorted_same_granularity(dists);
    const std::size_t n = dists.size();
    std::vector<std::pair<std::size_t, std::size_t>> upper;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) upper.emplace_back(i, j);
    }
    auto cells = evaluate_pairs(
        upper.size(), threads, [&](std::size_t k) { return std::pair{&dists[upper[k].first], &dists[upper[k].second]}; },
        measure, estimator);

    DriftMatrix m;
    m.measure = measure;
    m.estimator = estimator;
    for (const auto& d : dists) m.bins.push_back(d.bin());
    m.values.assign(n * n, 0.0);
    if (estimator.kind == Estimator::Kind::bootstrap) m.std_errors.assign(n * n, 0.0);
    for (std::size_t k = 0; k < upper.size(); ++k) {
        auto [i, j] = upper[k];
        m.values[i * n + j] = m.values[j * n + i] = cells[k].value;
        if (cells[k].std_error) m.std_errors[i * n + j] = m.std_errors[j * n + i] = *cells[k].std_error;
    }
    return m;
}

std::size_t GroupBounds::group_of_rank(std::size_t rank) const {
    for (std::size_t g = 0; g < upper.size(); ++g) {
        if (rank <= upper[g]) return g;
    }
    return kGroupCount - 1;
}

ContributionAnalysis contribution_groups(const PopularityDistribution& left, const PopularityDistribution& right,
                                         const GroupBounds& bounds) {
    auto [value, breakdown] = jsd_with_contributions(normalize(left), normalize(right));
    ContributionAnalysis out;
    out.left = left.bin();
    out.right = right.bin();
    out.jsd_bits = value.value;
    out.ranked.reserve(breakdown.items.size());
    for (const auto& c : breakdown.items) {
        out.ranked.push_back({c.item, c.partial_bits, left.count_of(c.item) + right.count_of(c.item), 0, 0});
    }
    std::sort(out.ranked.begin(), out.ranked.end(), [](const RankedContribution& a, const RankedContribution& b) {
        if (a.partial_bits != b.partial_bits) return a.partial_bits > b.partial_bits;
        if (a.loans != b.loans) return a.loans > b.loans;
        return a.item < b.item;
    });
    std::array<long double, kGroupCount> sums{};
    for (std::size_t i = 0; i < out.ranked.size(); ++i) {
        auto& r = out.ranked[i];
        r.rank = i + 1;
        r.group = bounds.group_of_rank(r.rank);
        sums[r.group] += r.partial_bits;
    }
    if (out.jsd_bits > 0.0) {
        for (std::size_t g = 0; g < kGroupCount; ++g) out.shares[g] = static_cast<double>(sums[g] / out.jsd_bits);
    }
    return out;
}

std::vector<ContributionAnalysis> local_contributions(std::span<const PopularityDistribution> dists,
                                                      const GroupBounds& bounds, unsigned threads) {
    require_sorted_same_granularity(dists);
    std::vector<ContributionAnalysis> out(dists.size() > 1 ? dists.size() - 1 : 0);
    parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = contribution_groups(dists[i], dists[i + 1], bounds); });
    return out;
}

std::vector<ContributionAnalysis> global_contributions(std::span<const PopularityDistribution> dists,
                                                       const TimeBin& baseline, const GroupBounds& bounds,
                                                       unsigned threads) {
    require_sorted_same_granularity(dists);
    auto base = std::find_if(dists.begin(), dists.end(), [&](const auto& d) { return d.bin() == baseline; });
    if (base == dists.end()) {
        throw DriftInputError("baseline bin " + baseline.start.to_string() + " is not present in the data");
    }
    std::vector<const PopularityDistribution*> others;
    for (const auto& d : dists) {
        if (&d != &*base) others.push_back(&d);
    }
    std::vector<ContributionAnalysis> out(others.size());
    parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = contribution_groups(*base, *others[i], bounds); });
    return out;
}

std::optional<std::size_t> GroupAssignment::group_of(ItemId item) const {
    auto it = std::lower_bound(groups.begin(), groups.end(), item,
                               [](const auto& g, ItemId id) { return g.first < id; });
    if (it == groups.end() || it->first != item) return std::nullopt;
    return it->second;
}

GroupAssignment group_assignment(const ContributionAnalysis& analysis) {
    GroupAssignment a;
    a.bin = analysis.right;
    a.groups.reserve(analysis.ranked.size());
    for (const auto& r : analysis.ranked) a.groups.emplace_back(r.item, static_cast<std::uint8_t>(r.group));
    std::sort(a.groups.begin(), a.groups.end());
    return a;
}

TransitionMatrix transition_matrix(std::span<const GroupAssignment> schedule) {
    TransitionMatrix sum{};
    std::array<std::size_t, kGroupCount> contributing{};
    for (std::size_t t = 0; t + 1 < schedule.size(); ++t) {
        std::array<std::array<std::uint64_t, kGroupCount>, kGroupCount> counts{};
        const auto& next = schedule[t + 1];
        for (const auto& [item, g] : schedule[t].groups) {
            const std::size_t h = next.group_of(item).value_or(kGroupCount - 1);
            ++counts[g][h];
        }
        for (std::size_t g = 0; g < kGroupCount; ++g) {
            const std::uint64_t row = std::accumulate(counts[g].begin(), counts[g].end(), std::uint64_t{0});
            if (row == 0) continue;
            ++contributing[g];
            for (std::size_t h = 0; h < kGroupCount; ++h) {
                sum[g][h] += static_cast<double>(counts[g][h]) / static_cast<double>(row);
            }
        }
    }
    TransitionMatrix out{};
    for (std::size_t g = 0; g < kGroupCount; ++g) {
        if (contributing[g] == 0) {
            out[g][g] = 1.0;
            continue;
        }
        for (std::size_t h = 0; h < kGroupCount; ++h) out[g][h] = sum[g][h] / static_cast<double>(contributing[g]);
    }
    return out;
}

TrajectoryPanel trajectory_panel(std::span<const PopularityDistribution> dists, const TrajectorySelector& selector,
                                 Diagnostics* diag) {
    require_sorted_same_granularity(dists);
    TrajectoryPanel panel;
    for (const auto& d : dists) panel.bins.push_back(d.bin());
    if (dists.empty()) return panel;

    std::vector<ItemId> chosen;
    switch (selector.kind) {
        case TrajectorySelector::Kind::top_global_contrib: {
            if (!selector.at) throw DriftInputError("top_global_contrib needs the bin to decompose");
            const TimeBin baseline = selector.baseline.value_or(dists.front().bin());
            auto find = [&](const TimeBin& b) -> const PopularityDistribution& {
                auto it = std::find_if(dists.begin(), dists.end(), [&](const auto& d) { return d.bin() == b; });
                if (it == dists.end()) throw DriftInputError("bin " + b.start.to_string() + " is not present in the data");
                return *it;
            };
            auto analysis = contribution_groups(find(baseline), find(*selector.at));
            for (const auto& r : analysis.ranked) {
                if (chosen.size() == selector.k) break;
                chosen.push_back(r.item);
            }
            break;
        }
        case TrajectorySelector::Kind::top_total:
        case TrajectorySelector::Kind::top_peak: {
            std::unordered_map<ItemId, std::uint64_t> score;
            for (const auto& d : dists) {
                for (const auto& c : d.counts()) {
                    auto& s = score[c.item];
                    s = selector.kind == TrajectorySelector::Kind::top_total ? s + c.count : std::max(s, c.count);
                }
            }
            std::vector<std::pair<ItemId, std::uint64_t>> ranked(score.begin(), score.end());
            std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second > b.second : a.first < b.first;
            });
            for (const auto& r : ranked) {
                if (chosen.size() == selector.k) break;
                chosen.push_back(r.first);
            }
            break;
        }
    }
    if (chosen.size() < selector.k) {
        warn(diag, "only " + std::to_string(chosen.size()) + " items available for a panel of " +
                       std::to_string(selector.k));
    }

    for (ItemId item : chosen) {
        TrajectoryRow row{item, 0, {}};
        row.counts.reserve(dists.size());
        for (const auto& d : dists) row.counts.push_back(d.count_of(item));
        row.peak_column = static_cast<std::size_t>(std::max_element(row.counts.begin(), row.counts.end()) - row.counts.begin());
        panel.rows.push_back(std::move(row));
    }
    std::sort(panel.rows.begin(), panel.rows.end(), [](const TrajectoryRow& a, const TrajectoryRow& b) {
        return a.peak_column != b.peak_column ? a.peak_column < b.peak_column : a.item < b.item;
    });
    return panel;
}

void write_series_csv(std::ostream& out, const DriftSeries& series) {
    out << "bin_start,value,std_error\n";
    for (const auto& p : series.points) {
        out << p.bin.start.to_string() << ',' << csv::format_double(p.cell.value) << ',';
        if (p.cell.std_error) out << csv::format_double(*p.cell.std_error);
        out << '\n';
    }
}

void write_matrix_csv(std::ostream& out, const DriftMatrix& matrix) {
    out << "bin_start";
    for (const auto& b : matrix.bins) out << ',' << b.start.to_string();
    out << '\n';
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        out << matrix.bins[i].start.to_string();
        for (std::size_t j = 0; j < matrix.size(); ++j) out << ',' << csv::format_double(matrix.at(i, j));
        out << '\n';
    }
}

void write_group_shares_csv(std::ostream& out, std::span<const ContributionAnalysis> analyses) {
    out << "bin_start,g1,g2,g3,g4,g5\n";
    for (const auto& a : analyses) {
        out << a.right.start.to_string();
        for (double s : a.shares) out << ',' << csv::format_double(s);
        out << '\n';
    }
}

void write_contributions_csv(std::ostream& out, const ContributionAnalysis& analysis, const ItemDictionary& items) {
    out << "canonical_id,partial_bits,rank,group\n";
    for (const auto& r : analysis.ranked) {
        out << csv::escape(items.name(r.item)) << ',' << csv::format_double(r.partial_bits) << ',' << r.rank << ",g"
            << (r.group + 1) << '\n';
    }
}

void write_transitions_csv(std::ostream& out, const TransitionMatrix& matrix) {
    out << "from_group,g1,g2,g3,g4,g5\n";
    for (std::size_t g = 0; g < kGroupCount; ++g) {
        out << 'g' << (g + 1);
        for (double v : matrix[g]) out << ',' << csv::format_double(v);
        out << '\n';
    }
}

void write_trajectory_csv(std::ostream& out, const TrajectoryPanel& panel, const ItemDictionary& items) {
    out << "canonical_id,peak_bin";
    for (const auto& b : panel.bins) out << ',' << b.start.to_string();
    out << '\n';
    for (const auto& row : panel.rows) {
        out << csv::escape(items.name(row.item)) << ',' << panel.bins[row.peak_column].start.to_string();
        for (auto c : row.counts) out << ',' << c;
        out << '\n';
    }
}

}  // namespace attndrift
