#include "attndrift/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "attndrift/csv.hpp"

namespace attndrift {

namespace {

CalendarPosition source_position(CalendarPosition target, int year_offset, Granularity g) {
    CalendarPosition src{target.year - year_offset, target.position};
    if (g == Granularity::week && src.position == 53 && iso_weeks_in_year(src.year) == 52) src.position = 52;
    return src;
}

TimeBin first_bin_of_year(int year, Granularity g) {
    auto bin = bin_at_position({year, 1}, g);
    if (!bin) throw std::invalid_argument("no first bin for year " + std::to_string(year));
    return *bin;
}

}  // namespace

DriftSeries year_global_drift(std::span<const PopularityDistribution> dists, int year, const Measure& measure,
                              const Estimator& estimator, unsigned threads) {
    auto in_year = [&](const PopularityDistribution& d) { return calendar_position(d.bin()).year == year; };
    auto first = std::find_if(dists.begin(), dists.end(), in_year);
    auto last = std::find_if(first, dists.end(), [&](const auto& d) { return !in_year(d); });
    if (first == last) throw DriftInputError("no bins in year " + std::to_string(year));
    const TimeBin baseline = first_bin_of_year(year, first->bin().granularity);
    return global_drift(std::span(first, last), baseline, measure, estimator, threads);
}

DriftSeries predict_drift(const DriftSeries& source, std::span<const TimeBin> target_bins, int year_offset,
                          Diagnostics* diag) {
    std::map<std::pair<int, int>, const DriftPoint*> by_position;
    for (const auto& p : source.points) {
        auto pos = calendar_position(p.bin);
        by_position[{pos.year, pos.position}] = &p;
    }

    DriftSeries out;
    out.measure = source.measure;
    out.estimator = source.estimator;
    out.kind = source.kind;
    for (const auto& target : target_bins) {
        const auto tpos = calendar_position(target);
        const auto spos = source_position(tpos, year_offset, target.granularity);
        auto it = by_position.find({spos.year, spos.position});
        if (it == by_position.end()) {
            warn(diag, "no source value for " + target.start.to_string() + " (position " +
                           std::to_string(spos.position) + " of " + std::to_string(spos.year) + "); bin omitted");
            continue;
        }
        DriftPoint point;
        point.bin = target;
        point.cell = it->second->cell;
        if (source.kind == DriftKind::local) {
            point.reference = bin_from_index(target.index - 1, target.granularity);
        } else {
            point.reference = first_bin_of_year(tpos.year, target.granularity);
            if (!out.baseline) out.baseline = point.reference;
        }
        out.points.push_back(point);
    }
    return out;
}

ForecastReport score(const DriftSeries& predicted, const DriftSeries& observed, int year_offset) {
    std::map<TimeBin, double> obs;
    for (const auto& p : observed.points) obs[p.bin] = p.cell.value;

    ForecastReport report;
    report.kind = observed.kind;
    report.target_baseline = observed.baseline;
    for (const auto& p : predicted.points) {
        auto it = obs.find(p.bin);
        if (it == obs.end()) continue;
        report.rows.push_back({p.bin, p.cell.value, it->second, std::abs(p.cell.value - it->second)});
    }
    if (report.rows.empty()) throw std::invalid_argument("predicted and observed series share no bin");
    std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) { return a.bin < b.bin; });

    report.target_year = calendar_position(report.rows.front().bin).year;
    report.source_year = report.target_year - year_offset;
    if (report.kind == DriftKind::global) {
        report.source_baseline = first_bin_of_year(report.source_year, report.rows.front().bin.granularity);
    }

    long double abs_sum = 0, pct_sum = 0;
    std::size_t pct_n = 0;
    for (const auto& r : report.rows) {
        abs_sum += r.abs_error;
        if (r.observed == 0.0) {
            ++report.mape_excluded;
        } else {
            pct_sum += r.abs_error / std::abs(r.observed);
            ++pct_n;
        }
    }
    report.mae = static_cast<double>(abs_sum / report.rows.size());
    if (pct_n > 0) report.mape = static_cast<double>(100.0L * pct_sum / pct_n);
    if (report.mape_excluded > 0) {
        report.notes.push_back(std::to_string(report.mape_excluded) + " bins with observed value 0 excluded from MAPE");
    }
    return report;
}

void write_forecast_csv(std::ostream& out, const ForecastReport& report) {
    out << "bin_start,predicted,observed,abs_error\n";
    for (const auto& r : report.rows) {
        out << r.bin.start.to_string() << ',' << csv::format_double(r.predicted) << ','
            << csv::format_double(r.observed) << ',' << csv::format_double(r.abs_error) << '\n';
    }
}

std::string forecast_summary_json(const ForecastReport& report) {
    nlohmann::ordered_json j;
    j["kind"] = report.kind == DriftKind::local ? "local" : "global";
    j["source_year"] = report.source_year;
    j["target_year"] = report.target_year;
    j["source_baseline"] = report.source_baseline ? nlohmann::ordered_json(report.source_baseline->start.to_string())
                                                  : nlohmann::ordered_json(nullptr);
    j["target_baseline"] = report.target_baseline ? nlohmann::ordered_json(report.target_baseline->start.to_string())
                                                  : nlohmann::ordered_json(nullptr);
    j["bins"] = report.rows.size();
    j["mae"] = report.mae;
    j["mape_percent"] = report.mape ? nlohmann::ordered_json(*report.mape) : nlohmann::ordered_json(nullptr);
    j["mape_excluded"] = report.mape_excluded;
    j["notes"] = report.notes;
    return j.dump(2);
}

}  // namespace attndrift
