#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attndrift/diagnostics.hpp"
#include "attndrift/driftscan.hpp"

namespace attndrift {

// Global drift of one calendar year against that year's first bin (January,
// ISO week 1 or Q1). Only bins of `year` are used.
DriftSeries year_global_drift(std::span<const PopularityDistribution> dists, int year,
                              const Measure& measure = Measure::jsd(), const Estimator& estimator = {},
                              unsigned threads = 1);

// Seasonal-naive forecast: the value predicted for a target bin is the source
// value at the same calendar position `year_offset` years earlier. ISO week 53
// maps to week 52 when the source year has only 52 weeks. Targets without a
// source value are omitted and reported through `diag`. Local references
// become the bin before the target; global ones the first bin of the target's
// year.
DriftSeries predict_drift(const DriftSeries& source, std::span<const TimeBin> target_bins, int year_offset = 1,
                          Diagnostics* diag = nullptr);

struct ForecastRow {
    TimeBin bin;
    double predicted = 0.0;
    double observed = 0.0;
    double abs_error = 0.0;
};

struct ForecastReport {
    DriftKind kind = DriftKind::local;
    int source_year = 0;
    int target_year = 0;
    std::optional<TimeBin> source_baseline;
    std::optional<TimeBin> target_baseline;
    std::vector<ForecastRow> rows;  // bins present in both series, ascending
    double mae = 0.0;
    std::optional<double> mape;        // empty when every observed value is zero
    std::size_t mape_excluded = 0;     // rows with observed == 0
    std::vector<std::string> notes;
};

// Compares aligned bins of two series. Throws std::invalid_argument when they
// share no bin.
ForecastReport score(const DriftSeries& predicted, const DriftSeries& observed, int year_offset = 1);

// bin_start,predicted,observed,abs_error
void write_forecast_csv(std::ostream& out, const ForecastReport& report);
// Summary without per-bin rows.
std::string forecast_summary_json(const ForecastReport& report);

}  // namespace attndrift
