#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "attndrift/cli.hpp"

namespace fs = std::filesystem;
using attndrift::cli::run;

namespace {

const std::string kData = ATTNDRIFT_TEST_DATA;
const std::string kEvents = kData + "/events_1k.csv";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("attndrift_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("local drift of the bundled log matches the golden file") {
    auto dir = fresh_dir("golden");
    auto r = call({"drift", "local", "--events", kEvents, "--canonicalize", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "drift_local.csv") == slurp(kData + "/golden_drift_local.csv"));

    auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["tool"] == "attndrift");
    CHECK(m["version"] == attndrift::cli::kVersion);
    CHECK(m["subcommand"] == "drift local");
    CHECK(m["outputs"] == nlohmann::json::array({"drift_local.csv"}));
    CHECK(m["inputs"][0]["bytes"] == fs::file_size(kEvents));
    CHECK(m["details"]["canonicalize"]["raw_items"] == 199);
    CHECK(m["details"]["canonicalize"]["canonical_items"] == 187);
    CHECK(m["details"]["aggregate"]["bins"] == 8);
    CHECK(m["config"].get<std::string>().find("measure=\"jsd\"") != std::string::npos);
    CHECK(m.dump().find("time") == std::string::npos);
}

TEST_CASE("reruns are byte-identical and thread count does not matter") {
    auto a = fresh_dir("rerun_a"), b = fresh_dir("rerun_b");
    std::vector<std::string> args{"drift", "matrix", "--events", kEvents, "--estimator", "bootstrap",
                                  "--resamples", "20", "--seed", "4", "--out", a.string()};
    REQUIRE(call(args).code == 0);
    const auto first_matrix = slurp(a / "drift_matrix.csv");
    const auto first_manifest = slurp(a / "manifest.json");
    REQUIRE(call(args).code == 0);
    CHECK(slurp(a / "drift_matrix.csv") == first_matrix);
    CHECK(slurp(a / "manifest.json") == first_manifest);
    CHECK(lines(first_matrix) == 9);
    CHECK(fs::exists(a / "drift_matrix_stderr.csv"));

    args.back() = b.string();
    args.insert(args.end(), {"--threads", "3"});
    REQUIRE(call(args).code == 0);
    CHECK(slurp(b / "drift_matrix.csv") == first_matrix);
}

TEST_CASE("exit codes") {
    auto dir = fresh_dir("codes");
    CHECK(call({}).code == 1);
    CHECK(call({"frobnicate"}).code == 1);
    CHECK(call({"drift", "local", "--bogus"}).code == 1);
    CHECK(call({"drift", "local", "--out", dir.string()}).code == 1);
    CHECK(call({"drift", "local", "--events", kEvents, "--alpha", "2", "--out", dir.string()}).code == 1);
    CHECK(call({"drift", "local", "--events", kEvents, "--measure", "alpha", "--alpha", "2", "--out", dir.string()}).code == 0);
    CHECK(call({"canon", "--out", dir.string()}).code == 1);
    CHECK(call({"drift", "local", "--events", kData + "/missing.csv", "--out", dir.string()}).code == 2);
    auto r = call({"drift", "global", "--baseline", "2021-05", "--events", kEvents, "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("2021-05-01") != std::string::npos);
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"--version"}).code == 0);

    // Through the installed binary as well.
    const std::string bin = ATTNDRIFT_CLI;
    auto status = [&](const std::string& tail) {
        const int s = std::system((bin + " " + tail + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(s);
    };
    CHECK(status("") == 1);
    CHECK(status("drift local --events " + kData + "/missing.csv --out " + dir.string()) == 2);
    CHECK(status("drift local --events " + kEvents + " --out " + dir.string()) == 0);
}

TEST_CASE("ingest-check reports malformed rows and enforces the threshold") {
    auto dir = fresh_dir("ingest");
    fs::create_directories(dir);
    const auto path = dir / "bad.csv";
    {
        std::ofstream f(path);
        std::istringstream src(slurp(kEvents));
        std::string line;
        int n = 0;
        while (std::getline(src, line) && n++ < 101) f << line << '\n';
        f << "2022-13-40,x,t,c,adult_fiction,physical,L1,1980-01-01,female,basic,town_rural\n";
    }
    auto out = dir / "out";
    auto r = call({"ingest-check", "--events", path.string(), "--out", out.string()});
    REQUIRE(r.code == 0);
    auto report = nlohmann::json::parse(slurp(out / "ingest_report.json"));
    CHECK(report.dump().find("\"malformed\":1") != std::string::npos);
    CHECK(call({"ingest-check", "--events", path.string(), "--max-malformed", "0.001", "--out", out.string()}).code == 2);
}

TEST_CASE("canon folds ebook keys") {
    auto dir = fresh_dir("canon");
    REQUIRE(call({"canon", "--events", kEvents, "--out", dir.string()}).code == 0);
    const auto catalog = slurp(dir / "catalog.csv");
    CHECK(catalog.rfind("item_key,canonical_id\n", 0) == 0);
    CHECK(lines(catalog) == 200);
    std::istringstream in(catalog);
    std::string line;
    std::getline(in, line);
    int folded = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        const auto key = line.substr(0, comma), canon = line.substr(comma + 1);
        if (key != canon) {
            ++folded;
            CHECK(key == canon + "e");
        }
    }
    CHECK(folded == 12);
}

TEST_CASE("analysis subcommands write their tables") {
    auto dir = fresh_dir("analysis");
    const std::string o = dir.string();
    REQUIRE(call({"contrib", "--events", kEvents, "--canonicalize", "--at", "2022-05", "--out", o}).code == 0);
    CHECK(slurp(dir / "group_shares.csv").rfind("bin_start,g1,g2,g3,g4,g5\n2022-02-01,", 0) == 0);
    CHECK(lines(slurp(dir / "group_shares.csv")) == 8);
    CHECK(slurp(dir / "contributions.csv").rfind("canonical_id,partial_bits,rank,group\n", 0) == 0);

    REQUIRE(call({"transitions", "--events", kEvents, "--kind", "global", "--out", o}).code == 0);
    CHECK(lines(slurp(dir / "transitions.csv")) == 6);

    REQUIRE(call({"trajectories", "--events", kEvents, "--select", "peak", "--k", "5", "--out", o}).code == 0);
    CHECK(lines(slurp(dir / "trajectories.csv")) == 6);
    CHECK(call({"trajectories", "--events", kEvents, "--select", "contrib", "--out", o}).code == 1);

    REQUIRE(call({"drift", "global", "--baseline", "2022-03", "--measure", "jaccard", "--events", kEvents, "--out", o}).code == 0);
    CHECK(lines(slurp(dir / "drift_global.csv")) == 8);
}

TEST_CASE("synth and predict round trip") {
    auto dir = fresh_dir("synth");
    const std::string o = dir.string();
    REQUIRE(call({"synth", "--catalog-size", "300", "--loans-per-bin", "400", "--bins", "24", "--loaners", "50",
                  "--gamma", "3", "--seasonal-fraction", "0.05", "--seed", "9", "--out", o}).code == 0);
    const auto events = slurp(dir / "events.csv");
    CHECK(lines(events) == 24 * 400 + 1);
    CHECK(lines(slurp(dir / "truth.csv")) == 24 * 300 + 1);

    auto p = dir / "predict";
    auto r = call({"predict", "--events", (dir / "events.csv").string(), "--canonicalize", "--out", p.string()});
    REQUIRE(r.code == 0);
    auto summary = nlohmann::json::parse(slurp(p / "forecast.json"));
    CHECK(summary["target_year"] == 2023);
    CHECK(summary["source_year"] == 2022);
    // January 2022 has no local value, so January 2023 has no prediction.
    CHECK(summary["bins"] == 11);
    CHECK(lines(slurp(p / "forecast.csv")) == 12);

    auto g = call({"predict", "--kind", "global", "--events", (dir / "events.csv").string(), "--out", p.string()});
    REQUIRE(g.code == 0);
    CHECK(nlohmann::json::parse(slurp(p / "forecast.json"))["bins"] == 11);

    auto again = fresh_dir("synth2");
    REQUIRE(call({"synth", "--catalog-size", "300", "--loans-per-bin", "400", "--bins", "24", "--loaners", "50",
                  "--gamma", "3", "--seasonal-fraction", "0.05", "--seed", "9", "--out", again.string()}).code == 0);
    CHECK(slurp(again / "events.csv") == events);
}

TEST_CASE("config file supplies options") {
    auto dir = fresh_dir("config");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "run.ini");
        f << "measure=\"jaccard\"\ngranularity=\"quarter\"\n";
    }
    REQUIRE(call({"drift", "local", "--config", (dir / "run.ini").string(), "--events", kEvents, "--out", dir.string()}).code == 0);
    CHECK(lines(slurp(dir / "drift_local.csv")) == 3);
    auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["details"]["measure"] == "jaccard");
}

}
