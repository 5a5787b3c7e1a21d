#include "attndrift/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "attndrift/canonicalizer.hpp"
#include "attndrift/csv.hpp"
#include "attndrift/driftscan.hpp"
#include "attndrift/event_ledger.hpp"
#include "attndrift/forecast.hpp"
#include "attndrift/popularity.hpp"
#include "attndrift/synthmarket.hpp"

namespace attndrift::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::vector<std::string> events;
    std::string catalog;
    bool canonicalize = false;
    std::string granularity = "month";
    std::string from;
    std::string to;
    std::vector<std::string> exclude;
    double max_malformed = 0.01;
    std::string age;
    std::string sex;
    std::string education;
    std::string residence;
    std::vector<std::string> categories;
    std::string measure = "jsd";
    double alpha = 1.0;
    std::string estimator = "plugin";
    int resamples = 500;
    std::uint64_t seed = 0;
    std::size_t top_k = 10000;
    unsigned threads = 1;
    std::string out = ".";
};

// Everything a subcommand hands back for the manifest.
struct RunRecord {
    std::vector<std::string> outputs;
    Diagnostics diag;
    json details = json::object();
};

Date parse_date_arg(const std::string& text, const char* flag, bool end_of_month) {
    auto d = parse_bin_reference(text);
    if (!d) throw UsageError(std::string(flag) + ": expected YYYY-MM or YYYY-MM-DD, got '" + text + "'");
    if (end_of_month && text.size() == 7) return assign_bin(*d, Granularity::month).end.add_days(-1);
    return *d;
}

Granularity granularity_of(const RunConfig& cfg) {
    auto g = parse_granularity(cfg.granularity);
    if (!g) throw UsageError("--granularity: expected week, month or quarter");
    return *g;
}

template <typename T, typename Parse>
std::optional<T> parse_enum_flag(const std::string& text, const char* flag, Parse parse) {
    if (text.empty()) return std::nullopt;
    auto v = parse(text);
    if (!v) throw UsageError(std::string(flag) + ": unknown value '" + text + "'");
    return v;
}

CohortFilter cohort_of(const RunConfig& cfg) {
    CohortFilter f;
    if (!cfg.age.empty()) {
        try {
            f.age = AgeRange::parse(cfg.age);
        } catch (const std::exception& e) {
            throw UsageError(std::string("--age: ") + e.what());
        }
    }
    f.sex = parse_enum_flag<Sex>(cfg.sex, "--sex", parse_sex);
    f.education = parse_enum_flag<Education>(cfg.education, "--education", parse_education);
    f.residence = parse_enum_flag<Residence>(cfg.residence, "--residence", parse_residence);
    for (const auto& c : cfg.categories) f.categories.insert(*parse_enum_flag<Category>(c, "--category", parse_category));
    return f;
}

IngestOptions ingest_options_of(const RunConfig& cfg) {
    IngestOptions opts;
    if (!cfg.from.empty()) opts.window.first = parse_date_arg(cfg.from, "--from", false);
    if (!cfg.to.empty()) opts.window.last = parse_date_arg(cfg.to, "--to", true);
    for (const auto& x : cfg.exclude) {
        try {
            opts.exclusions.push_back(DateRange::parse(x));
        } catch (const std::exception& e) {
            throw UsageError(std::string("--exclude: ") + e.what());
        }
    }
    if (!(cfg.max_malformed >= 0.0 && cfg.max_malformed <= 1.0)) throw UsageError("--max-malformed must lie in [0,1]");
    opts.max_malformed_fraction = cfg.max_malformed;
    return opts;
}

Measure measure_of(const RunConfig& cfg, bool alpha_given) {
    if (cfg.measure == "jsd") {
        if (alpha_given) throw UsageError("--alpha only applies to --measure alpha");
        return Measure::jsd();
    }
    if (cfg.measure == "jaccard") {
        if (alpha_given) throw UsageError("--alpha only applies to --measure alpha");
        return Measure::jaccard();
    }
    if (!(cfg.alpha >= 0.0)) throw UsageError("--alpha must be >= 0");
    return Measure::jsd_alpha(cfg.alpha);
}

Estimator estimator_of(const RunConfig& cfg) {
    if (cfg.estimator == "plugin") return Estimator::plugin();
    if (cfg.resamples < 2) throw UsageError("--resamples must be at least 2");
    return Estimator::bootstrap(cfg.resamples, cfg.seed);
}

json ingest_json(const IngestReport& r) {
    return {{"rows", r.rows},         {"accepted", r.accepted}, {"out_of_window", r.out_of_window},
            {"excluded", r.excluded}, {"malformed", r.malformed}, {"flagged", r.flagged},
            {"diagnostics", r.diagnostics}};
}

std::ofstream open_output(const RunConfig& cfg, RunRecord& rec, const std::string& name) {
    std::ofstream f(fs::path(cfg.out) / name, std::ios::binary);
    if (!f) throw DataError("cannot write " + (fs::path(cfg.out) / name).string());
    rec.outputs.push_back(name);
    return f;
}

// Distributions ready for analysis: ingested, aggregated, canonicalized,
// restricted to the top-k items when `restrict` is set, with empty bins
// dropped. Contribution analyses rank every item with a loan in the pair, so
// they skip the restriction.
struct Loaded {
    std::shared_ptr<const ItemDictionary> items;
    std::vector<PopularityDistribution> bins;
};

Loaded load(const RunConfig& cfg, RunRecord& rec, bool restrict = true) {
    if (cfg.events.empty()) throw UsageError("--events is required");
    if (cfg.canonicalize && !cfg.catalog.empty()) throw UsageError("--canonicalize and --catalog are mutually exclusive");
    const Granularity g = granularity_of(cfg);
    const CohortFilter cohort = cohort_of(cfg);
    const IngestOptions opts = ingest_options_of(cfg);

    std::optional<CanonicalCatalog> catalog;
    if (!cfg.catalog.empty()) catalog = CanonicalCatalog::read_csv(cfg.catalog);

    Aggregator agg(g, cohort, catalog ? &*catalog : nullptr);
    std::unordered_map<std::string, ItemRecord> records;
    json ingests = json::array();
    for (const auto& path : cfg.events) {
        auto report = ingest(path, opts, [&](const LoanEvent& e) {
            agg.add(e);
            if (cfg.canonicalize && !records.count(e.item_key)) {
                records.emplace(e.item_key, ItemRecord{e.item_key, e.title, e.creator});
            }
        });
        ingests.push_back(ingest_json(report));
    }
    BinnedCounts counts = agg.finish(&rec.diag);
    rec.details["ingest"] = std::move(ingests);

    if (cfg.canonicalize) {
        std::vector<ItemRecord> list;
        list.reserve(records.size());
        for (auto& [k, r] : records) list.push_back(std::move(r));
        std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.item_key < b.item_key; });
        CanonicalizeStats stats;
        auto cat = canonicalize(list, {}, &stats);
        counts = apply_catalog(counts, cat);
        rec.details["canonicalize"] = {{"raw_items", stats.raw_items}, {"canonical_items", stats.canonical_items}};
    }
    rec.details["aggregate"] = {{"events_seen", counts.report.events_seen},
                                {"events_matched", counts.report.events_matched},
                                {"missing_birthdate_skips", counts.report.skips.missing_birthdate},
                                {"unmapped_keys", counts.report.unmapped_keys},
                                {"bins", counts.bins.size()},
                                {"items", counts.items->size()}};

    Loaded out;
    out.items = counts.items;
    std::vector<PopularityDistribution> bins = std::move(counts.bins);
    rec.details["top_k_applied"] = restrict && cfg.top_k > 0;
    if (restrict && cfg.top_k > 0 && !bins.empty()) bins = restrict_top_k(bins, cfg.top_k, &rec.diag).bins;
    for (auto& d : bins) {
        if (d.empty()) {
            rec.diag.warn("bin " + d.bin().start.to_string() + " is empty after the top-k restriction; dropped");
        } else {
            out.bins.push_back(std::move(d));
        }
    }
    if (out.bins.empty()) throw DataError("no loans left to analyse for cohort '" + cohort.describe() + "'");
    return out;
}

TimeBin bin_arg(const std::string& text, const char* flag, Granularity g) {
    return assign_bin(parse_date_arg(text, flag, false), g);
}

TimeBin baseline_of(const std::string& text, const Loaded& data) {
    return text.empty() ? data.bins.front().bin() : bin_arg(text, "--baseline", data.bins.front().bin().granularity);
}

const PopularityDistribution& find_bin(const Loaded& data, const TimeBin& bin, const char* role) {
    for (const auto& d : data.bins) {
        if (d.bin() == bin) return d;
    }
    throw DataError(std::string(role) + " bin " + bin.start.to_string() + " is not present in the data");
}

std::vector<ContributionAnalysis> analyses_of(const std::string& kind, const std::string& baseline, const Loaded& data,
                                              unsigned threads) {
    if (kind == "local") return local_contributions(data.bins, {}, threads);
    const TimeBin base = baseline_of(baseline, data);
    find_bin(data, base, "baseline");
    return global_contributions(data.bins, base, {}, threads);
}

void write_manifest(const RunConfig& cfg, const CLI::App& app, const std::vector<std::string>& args,
                    const std::string& subcommand, RunRecord& rec) {
    json inputs = json::array();
    for (const auto& p : cfg.events) {
        std::error_code ec;
        auto size = fs::file_size(p, ec);
        inputs.push_back({{"path", p}, {"bytes", ec ? json(nullptr) : json(size)}});
    }
    std::sort(rec.outputs.begin(), rec.outputs.end());
    json m;
    m["tool"] = "attndrift";
    m["version"] = kVersion;
    m["subcommand"] = subcommand;
    m["arguments"] = args;
    m["config"] = app.config_to_str(true, false);
    m["inputs"] = std::move(inputs);
    m["outputs"] = rec.outputs;
    m["details"] = rec.details;
    m["warnings"] = rec.diag.warnings;
    std::ofstream f(fs::path(cfg.out) / "manifest.json", std::ios::binary);
    if (!f) throw DataError("cannot write manifest in " + cfg.out);
    f << m.dump(2) << '\n';
}

void add_shared_options(CLI::App& app, RunConfig& cfg) {
    app.add_option("--events", cfg.events, "Event log CSV (repeatable)");
    app.add_option("--catalog", cfg.catalog, "item_key,canonical_id map applied during aggregation");
    app.add_flag("--canonicalize", cfg.canonicalize, "Canonicalize item keys found in the events");
    app.add_option("--granularity", cfg.granularity, "Time bins: week, month or quarter")
        ->check(CLI::IsMember({"week", "month", "quarter"}))
        ->capture_default_str();
    app.add_option("--from", cfg.from, "First day of the analysis window (YYYY-MM[-DD])");
    app.add_option("--to", cfg.to, "Last day of the analysis window (YYYY-MM[-DD], a month means its last day)");
    app.add_option("--exclude", cfg.exclude, "Excluded date range FROM:TO (repeatable)");
    app.add_option("--max-malformed", cfg.max_malformed, "Abort when malformed rows exceed this fraction")
        ->capture_default_str();
    app.add_option("--age", cfg.age, "Age bin at loan time, LO-HI (half-open) or N+");
    app.add_option("--sex", cfg.sex, "female, male or unknown");
    app.add_option("--education", cfg.education, "basic, upper_secondary, higher or unknown");
    app.add_option("--residence", cfg.residence, "large_city, town_rural or unknown");
    app.add_option("--category", cfg.categories, "Item category (repeatable)");
    app.add_option("--measure", cfg.measure, "jsd (bits), alpha (normalized alpha-JSD) or jaccard")
        ->check(CLI::IsMember({"jsd", "alpha", "jaccard"}))
        ->capture_default_str();
    app.add_option("--alpha", cfg.alpha, "Order of the normalized alpha-JSD")->capture_default_str();
    app.add_option("--estimator", cfg.estimator, "plugin or bootstrap (bias-corrected)")
        ->check(CLI::IsMember({"plugin", "bootstrap"}))
        ->capture_default_str();
    app.add_option("--resamples", cfg.resamples, "Bootstrap resamples")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Root seed of all randomness")->capture_default_str();
    app.add_option("--top-k", cfg.top_k, "Keep the k most loaned items overall; 0 keeps all")->capture_default_str();
    app.add_option("--threads", cfg.threads, "Worker threads; results do not depend on it")->capture_default_str();
    app.add_option("--out", cfg.out, "Output directory")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Attention drift analysis of item-consumption event logs", "attndrift"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "Key-value config file; flags override it");
    app.require_subcommand(1);
    add_shared_options(app, cfg);

    auto* ingest_cmd = app.add_subcommand("ingest-check", "Validate an event log and report row counts");

    std::string canon_items;
    CanonicalizeOptions canon_opts;
    auto* canon_cmd = app.add_subcommand("canon", "Group edition and media variants into canonical items");
    canon_cmd->add_option("--items", canon_items, "item_key,title,creator table");
    canon_cmd->add_option("--window", canon_opts.window, "Forward comparison window in sorted order")
        ->capture_default_str();
    canon_cmd->add_option("--max-edit", canon_opts.max_edit, "Edit distance allowed per field")->capture_default_str();

    std::string drift_mode, baseline;
    auto* drift_cmd = app.add_subcommand("drift", "Local or global drift series, or the pairwise drift matrix");
    drift_cmd->add_option("mode", drift_mode, "local, global or matrix")
        ->required()
        ->check(CLI::IsMember({"local", "global", "matrix"}));
    drift_cmd->add_option("--baseline", baseline, "Baseline bin for global drift (default: first bin)");

    std::string kind = "local", at;
    auto* contrib_cmd = app.add_subcommand("contrib", "Per-item contributions and contribution-group shares");
    contrib_cmd->add_option("--kind", kind, "local or global")->check(CLI::IsMember({"local", "global"}))->capture_default_str();
    contrib_cmd->add_option("--baseline", baseline, "Baseline bin for global contributions");
    contrib_cmd->add_option("--at", at, "Also write the item ranking of the pair ending at this bin");

    auto* trans_cmd = app.add_subcommand("transitions", "Transition probabilities between contribution groups");
    trans_cmd->add_option("--kind", kind, "local or global")->check(CLI::IsMember({"local", "global"}))->capture_default_str();
    trans_cmd->add_option("--baseline", baseline, "Baseline bin for global contributions");

    std::string select = "total";
    std::size_t panel_k = 1000;
    auto* traj_cmd = app.add_subcommand("trajectories", "Per-item loan trajectories sorted by peak bin");
    traj_cmd->add_option("--select", select, "contrib (top global contributors at --at), total or peak")
        ->check(CLI::IsMember({"contrib", "total", "peak"}))
        ->capture_default_str();
    traj_cmd->add_option("--k", panel_k, "Number of items")->capture_default_str();
    traj_cmd->add_option("--at", at, "Bin whose global drift is decomposed (contrib)");
    traj_cmd->add_option("--baseline", baseline, "Baseline bin (contrib, default: first bin)");

    int source_year = 0, target_year = 0;
    auto* predict_cmd = app.add_subcommand("predict", "Seasonal-naive drift forecast from the previous year");
    predict_cmd->add_option("--kind", kind, "local or global")->check(CLI::IsMember({"local", "global"}))->capture_default_str();
    predict_cmd->add_option("--target-year", target_year, "Year to predict (default: last year in the data)");
    predict_cmd->add_option("--source-year", source_year, "Year providing the prediction (default: target - 1)");

    SynthMarketSpec spec;
    std::string synth_start = "2022-01-01";
    std::vector<unsigned> active_months{11, 12};
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic event log with known true distributions");
    synth_cmd->add_option("--catalog-size", spec.catalog_size, "Items K")->capture_default_str();
    synth_cmd->add_option("--zipf", spec.zipf_exponent, "Zipf exponent s")->capture_default_str();
    synth_cmd->add_option("--churn", spec.churn, "Fraction of rank positions renewed per bin")->capture_default_str();
    synth_cmd->add_option("--seasonal-fraction", spec.seasonal_fraction, "Share of seasonal items")->capture_default_str();
    synth_cmd->add_option("--gamma", spec.seasonal_multiplier, "Seasonal weight multiplier")->capture_default_str();
    synth_cmd->add_option("--active-months", active_months, "Months in which seasonal items are boosted")
        ->capture_default_str();
    synth_cmd->add_option("--loans-per-bin", spec.loans_per_bin, "Loans N per bin")->capture_default_str();
    synth_cmd->add_option("--bins", spec.n_bins, "Number of bins")->capture_default_str();
    synth_cmd->add_option("--start", synth_start, "First day of the first bin")->capture_default_str();
    synth_cmd->add_option("--loaners", spec.n_loaners, "Distinct loaners")->capture_default_str();

    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const bool alpha_given = app.count("--alpha") > 0;
    RunRecord rec;
    std::string subcommand;
    try {
        const Measure measure = measure_of(cfg, alpha_given);
        const Estimator estimator = estimator_of(cfg);
        std::error_code ec;
        fs::create_directories(cfg.out, ec);
        if (ec || !fs::is_directory(cfg.out)) throw DataError("cannot create output directory " + cfg.out);

        if (ingest_cmd->parsed()) {
            subcommand = "ingest-check";
            if (cfg.events.empty()) throw UsageError("--events is required");
            const IngestOptions opts = ingest_options_of(cfg);
            json reports = json::array();
            for (const auto& path : cfg.events) {
                auto report = ingest(path, opts, [](const LoanEvent&) {});
                out << path << ": " << report.accepted << " accepted, " << report.out_of_window << " out of window, "
                    << report.excluded << " excluded, " << report.malformed << " malformed, " << report.flagged
                    << " flagged\n";
                reports.push_back(ingest_json(report));
            }
            open_output(cfg, rec, "ingest_report.json") << reports.dump(2) << '\n';
        } else if (canon_cmd->parsed()) {
            subcommand = "canon";
            if (canon_items.empty() == cfg.events.empty()) throw UsageError("canon needs exactly one of --items and --events");
            std::vector<ItemRecord> records;
            if (!canon_items.empty()) {
                records = read_item_table(canon_items);
            } else {
                std::unordered_map<std::string, ItemRecord> seen;
                const IngestOptions opts = ingest_options_of(cfg);
                for (const auto& path : cfg.events) {
                    ingest(path, opts, [&](const LoanEvent& e) {
                        if (!seen.count(e.item_key)) seen.emplace(e.item_key, ItemRecord{e.item_key, e.title, e.creator});
                    });
                }
                for (auto& [k, r] : seen) records.push_back(std::move(r));
                std::sort(records.begin(), records.end(),
                          [](const auto& a, const auto& b) { return a.item_key < b.item_key; });
            }
            if (canon_opts.window == 0) throw UsageError("--window must be at least 1");
            CanonicalizeStats stats;
            auto catalog = canonicalize(records, canon_opts, &stats);
            auto f = open_output(cfg, rec, "catalog.csv");
            catalog.write_csv(f);
            rec.details["canonicalize"] = {{"raw_items", stats.raw_items},       {"distinct_rows", stats.distinct_rows},
                                           {"pairs", stats.pairs},               {"empty_titles", stats.empty_titles},
                                           {"canonical_items", stats.canonical_items}};
            out << stats.raw_items << " item keys -> " << stats.canonical_items << " canonical items\n";
        } else if (drift_cmd->parsed()) {
            subcommand = "drift " + drift_mode;
            const Loaded data = load(cfg, rec);
            if (drift_mode == "matrix") {
                auto m = drift_matrix(data.bins, measure, estimator, cfg.threads);
                auto f = open_output(cfg, rec, "drift_matrix.csv");
                write_matrix_csv(f, m);
                if (!m.std_errors.empty()) {
                    DriftMatrix se = m;
                    se.values = m.std_errors;
                    auto g = open_output(cfg, rec, "drift_matrix_stderr.csv");
                    write_matrix_csv(g, se);
                }
            } else {
                DriftSeries series;
                if (drift_mode == "local") {
                    series = local_drift(data.bins, measure, estimator, cfg.threads);
                } else {
                    const TimeBin base = baseline_of(baseline, data);
                    series = global_drift(data.bins, base, measure, estimator, cfg.threads);
                }
                auto f = open_output(cfg, rec, "drift_" + drift_mode + ".csv");
                write_series_csv(f, series);
            }
        } else if (contrib_cmd->parsed()) {
            subcommand = "contrib";
            const Loaded data = load(cfg, rec, false);
            auto analyses = analyses_of(kind, baseline, data, cfg.threads);
            auto f = open_output(cfg, rec, "group_shares.csv");
            write_group_shares_csv(f, analyses);
            if (!at.empty()) {
                const TimeBin target = bin_arg(at, "--at", data.bins.front().bin().granularity);
                auto it = std::find_if(analyses.begin(), analyses.end(), [&](const auto& a) { return a.right == target; });
                if (it == analyses.end()) throw DataError("no " + kind + " pair ends at bin " + target.start.to_string());
                auto g = open_output(cfg, rec, "contributions.csv");
                write_contributions_csv(g, *it, *data.items);
            }
        } else if (trans_cmd->parsed()) {
            subcommand = "transitions";
            const Loaded data = load(cfg, rec, false);
            auto analyses = analyses_of(kind, baseline, data, cfg.threads);
            std::vector<GroupAssignment> schedule;
            for (const auto& a : analyses) schedule.push_back(group_assignment(a));
            auto f = open_output(cfg, rec, "transitions.csv");
            write_transitions_csv(f, transition_matrix(schedule));
        } else if (traj_cmd->parsed()) {
            subcommand = "trajectories";
            const Loaded data = load(cfg, rec, false);
            const Granularity g = data.bins.front().bin().granularity;
            TrajectorySelector sel;
            sel.k = panel_k;
            if (select == "contrib") {
                if (at.empty()) throw UsageError("--select contrib needs --at");
                sel.kind = TrajectorySelector::Kind::top_global_contrib;
                sel.at = bin_arg(at, "--at", g);
                sel.baseline = baseline_of(baseline, data);
                find_bin(data, *sel.at, "--at");
                find_bin(data, *sel.baseline, "baseline");
            } else {
                sel.kind = select == "total" ? TrajectorySelector::Kind::top_total : TrajectorySelector::Kind::top_peak;
            }
            auto panel = trajectory_panel(data.bins, sel, &rec.diag);
            auto f = open_output(cfg, rec, "trajectories.csv");
            write_trajectory_csv(f, panel, *data.items);
        } else if (predict_cmd->parsed()) {
            subcommand = "predict";
            const Loaded data = load(cfg, rec);
            if (target_year == 0) target_year = calendar_position(data.bins.back().bin()).year;
            if (source_year == 0) source_year = target_year - 1;
            if (source_year == target_year) throw UsageError("--source-year must differ from --target-year");
            DriftSeries source, observed;
            if (kind == "local") {
                auto all = local_drift(data.bins, measure, estimator, cfg.threads);
                source = observed = all;
                source.points.clear();
                observed.points.clear();
                for (const auto& p : all.points) {
                    const int y = calendar_position(p.bin).year;
                    if (y == source_year) source.points.push_back(p);
                    if (y == target_year) observed.points.push_back(p);
                }
            } else {
                source = year_global_drift(data.bins, source_year, measure, estimator, cfg.threads);
                observed = year_global_drift(data.bins, target_year, measure, estimator, cfg.threads);
            }
            if (source.points.empty()) throw DataError("no " + kind + " drift values in source year " + std::to_string(source_year));
            std::vector<TimeBin> targets;
            for (const auto& p : observed.points) targets.push_back(p.bin);
            auto predicted = predict_drift(source, targets, target_year - source_year, &rec.diag);
            auto report = score(predicted, observed, target_year - source_year);
            auto f = open_output(cfg, rec, "forecast.csv");
            write_forecast_csv(f, report);
            open_output(cfg, rec, "forecast.json") << forecast_summary_json(report) << '\n';
            out << kind << " drift " << target_year << " from " << source_year << ": MAE "
                << csv::format_double(report.mae) << " over " << report.rows.size() << " bins\n";
        } else if (synth_cmd->parsed()) {
            subcommand = "synth";
            spec.seed = cfg.seed;
            spec.granularity = granularity_of(cfg);
            spec.start = parse_date_arg(synth_start, "--start", false);
            spec.active_months = {active_months.begin(), active_months.end()};
            try {
                spec.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const GroundTruth truth = generate_truth(spec);
            auto f = open_output(cfg, rec, "events.csv");
            const auto report = write_events(truth, f);
            auto g = open_output(cfg, rec, "truth.csv");
            write_truth_csv(truth, g);
            rec.details["events"] = report.events;
            rec.details["raw_items"] = report.raw_items;
            out << "wrote " << report.events << " events over " << truth.bins.size() << " bins\n";
        }
        rec.details["measure"] = measure.describe();
        rec.details["estimator"] = estimator.describe();
        write_manifest(cfg, app, args, subcommand, rec);
        for (const auto& w : rec.diag.warnings) err << "warning: " << w << '\n';
        return kExitOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

}  // namespace attndrift::cli
