#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "attndrift/event_ledger.hpp"

using namespace attndrift;

namespace {

Date ymd(int y, unsigned m, unsigned d) { return Date::from_ymd(y, m, d); }

LoanEvent event_on(Date date, std::string key = "k1") {
    LoanEvent e;
    e.date = date;
    e.item_key = std::move(key);
    e.title = "Ternet Ninja";
    e.creator = "Anders Matthesen";
    e.category = Category::children;
    e.medium = Medium::physical;
    e.loaner_id = "L1";
    e.birthdate = ymd(1990, 1, 1);
    e.sex = Sex::female;
    e.education = Education::higher;
    e.residence = Residence::large_city;
    return e;
}

std::string log_of(const std::vector<LoanEvent>& events) {
    std::string s = event_log_header() + "\n";
    for (const auto& e : events) s += format_event(e) + "\n";
    return s;
}

std::vector<LoanEvent> read_all(const std::string& text, const IngestOptions& opts, IngestReport* report = nullptr) {
    std::istringstream in(text);
    std::vector<LoanEvent> out;
    auto r = ingest_stream(in, opts, [&](const LoanEvent& e) { out.push_back(e); });
    if (report) *report = r;
    return out;
}

bool same_event(const LoanEvent& a, const LoanEvent& b) {
    return a.date == b.date && a.item_key == b.item_key && a.title == b.title && a.creator == b.creator &&
           a.category == b.category && a.medium == b.medium && a.loaner_id == b.loaner_id &&
           a.birthdate == b.birthdate && a.sex == b.sex && a.education == b.education && a.residence == b.residence;
}

}  // namespace

TEST_SUITE("ledger") {

TEST_CASE("well-formed rows are all accepted in file order") {
    std::vector<LoanEvent> events;
    for (int i = 0; i < 10; ++i) events.push_back(event_on(ymd(2022, 1, 1 + i), "k" + std::to_string(i)));
    events[3].title = "Title, with \"quotes\"";
    events[4].birthdate.reset();
    IngestReport report;
    auto got = read_all(log_of(events), {}, &report);
    REQUIRE(got.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(same_event(got[i], events[i]));
    CHECK(report.rows == 10);
    CHECK(report.accepted == 10);
    CHECK(report.malformed == 0);
    CHECK(report.out_of_window == 0);
}

TEST_CASE("window and exclusions filter rows without rejecting them") {
    std::vector<LoanEvent> events{event_on(ymd(2021, 12, 31)), event_on(ymd(2022, 1, 1)), event_on(ymd(2022, 4, 15)),
                                  event_on(ymd(2022, 7, 1))};
    IngestOptions opts;
    opts.window = DateRange{ymd(2022, 1, 1), ymd(2022, 6, 30)};
    opts.exclusions.push_back(DateRange::parse("2022-04-01:2022-04-30"));
    IngestReport report;
    auto got = read_all(log_of(events), opts, &report);
    REQUIRE(got.size() == 1);
    CHECK(got[0].date == ymd(2022, 1, 1));
    CHECK(report.out_of_window == 2);
    CHECK(report.excluded == 1);
    CHECK(report.malformed == 0);
}

TEST_CASE("malformed fraction above the limit aborts") {
    // 100 rows, 5 without item_key: 5% > 1%.
    std::vector<LoanEvent> events;
    for (int i = 0; i < 100; ++i) events.push_back(event_on(ymd(2022, 1, 1), i % 20 == 0 ? "" : "k"));
    try {
        read_all(log_of(events), {});
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.report().rows == 100);
        CHECK(e.report().malformed == 5);
        CHECK(e.report().accepted == 95);
        CHECK(std::string(e.what()).find("5 of 100") != std::string::npos);
    }
    IngestOptions lenient;
    lenient.max_malformed_fraction = 0.05;
    IngestReport report;
    CHECK(read_all(log_of(events), lenient, &report).size() == 95);
    CHECK(report.malformed == 5);
}

TEST_CASE("row-level problems are malformed; unknown enum values are flagged") {
    std::string text = event_log_header() + "\n";
    text += "2022-13-01,k,T,C,children,physical,L,,,,\n";            // bad date
    text += "2022-01-05,k,T,C,children,physical,L,2023-01-01,,,\n";  // born after loan
    text += "2022-01-05,k,T,C,children,physical,L,1990-02-31,,,\n";  // bad birthdate
    text += "2022-01-05,k,,C,children,physical,L,,,,\n";             // empty title
    text += "2022-01-05,k,\"T,C,children,physical,L,,,,\n";          // unterminated quote
    text += "2022-01-05,k,T,C,poetry,vinyl,L,,x,,\n";                // flagged
    text += "2022-01-05,k,T,C,,,L,,,,\n";                            // empty enums are unknown, not flagged
    IngestOptions opts;
    opts.max_malformed_fraction = 1.0;
    IngestReport report;
    auto got = read_all(text, opts, &report);
    CHECK(report.rows == 7);
    CHECK(report.malformed == 5);
    CHECK(report.flagged == 1);
    REQUIRE(got.size() == 2);
    CHECK(got[0].category == Category::other);
    CHECK(got[0].medium == Medium::other);
    CHECK(got[0].sex == Sex::unknown);
    CHECK(report.diagnostics.size() == 5);
    CHECK(report.diagnostics[0].rfind("line 2:", 0) == 0);
}

TEST_CASE("schema errors and unreadable files") {
    std::istringstream missing("loan_date,title,loaner_id\n2022-01-01,T,L\n");
    CHECK_THROWS_AS(ingest_stream(missing, {}, [](const LoanEvent&) {}), IngestError);
    CHECK_THROWS_AS(ingest("/nonexistent/events.csv", {}, [](const LoanEvent&) {}), IngestError);

    // Custom column names and order.
    IngestOptions opts;
    opts.schema.date = "day";
    opts.schema.item_key = "id";
    std::istringstream custom("title,id,loaner_id,day\nSome Book,x1,L9,2022-03-04\n");
    std::vector<LoanEvent> got;
    ingest_stream(custom, opts, [&](const LoanEvent& e) { got.push_back(e); });
    REQUIRE(got.size() == 1);
    CHECK(got[0].item_key == "x1");
    CHECK(got[0].date == ymd(2022, 3, 4));
    CHECK_FALSE(got[0].birthdate);
}

TEST_CASE("ingest from a file is deterministic") {
    const auto path = std::filesystem::temp_directory_path() / "attndrift_ledger_test.csv";
    std::vector<LoanEvent> events;
    for (int i = 0; i < 50; ++i) events.push_back(event_on(ymd(2022, 1 + i % 12, 1 + i % 28), "k" + std::to_string(i % 7)));
    {
        std::ofstream f(path);
        f << log_of(events) << "2022-01-01,,T,C,,,L,,,,\n";
    }
    IngestOptions opts;
    opts.max_malformed_fraction = 0.05;
    IngestReport r1, r2;
    auto a = ingest_all(path.string(), opts, &r1);
    auto b = ingest_all(path.string(), opts, &r2);
    CHECK(r1 == r2);
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_event(a[i], b[i]));
    std::filesystem::remove(path);
}

TEST_CASE("cohort matching") {
    const LoanEvent e = event_on(ymd(2022, 6, 1));
    CHECK(matches(e, {}));

    CohortFilter age;
    age.age = AgeRange{30, 46};
    CHECK(matches(e, age));  // 32 at the loan

    CohortFilter male;
    male.sex = Sex::male;
    CHECK_FALSE(matches(e, male));

    CohortFilter kids;
    kids.categories = {Category::children, Category::other};
    CHECK(matches(e, kids));
    kids.categories = {Category::adult_fiction};
    CHECK_FALSE(matches(e, kids));

    CohortFilter combined;
    combined.education = Education::higher;
    combined.residence = Residence::town_rural;
    CHECK_FALSE(matches(e, combined));
    combined.residence = Residence::large_city;
    CHECK(matches(e, combined));
}

TEST_CASE("age is dynamic across a birthday") {
    LoanEvent before = event_on(ymd(2020, 5, 9));
    LoanEvent after = event_on(ymd(2020, 5, 10));
    before.birthdate = after.birthdate = ymd(1990, 5, 10);  // turns 30 on 2020-05-10
    CohortFilter thirties;
    thirties.age = AgeRange::parse("30-46");
    CohortFilter twenties;
    twenties.age = AgeRange::parse("18-30");
    CHECK_FALSE(matches(before, thirties));
    CHECK(matches(before, twenties));
    CHECK(matches(after, thirties));
    CHECK_FALSE(matches(after, twenties));
}

TEST_CASE("age filter on an event without birthdate is skipped and tallied") {
    LoanEvent e = event_on(ymd(2022, 6, 1));
    e.birthdate.reset();
    CohortFilter f;
    f.age = AgeRange::parse("65+");
    CohortSkipTally skips;
    CHECK_FALSE(matches(e, f, &skips));
    CHECK_FALSE(matches(e, f, &skips));
    CHECK(skips.missing_birthdate == 2);
    CohortFilter no_age;
    CHECK(matches(e, no_age, &skips));
    CHECK(skips.missing_birthdate == 2);
}

TEST_CASE("age ranges and default bins") {
    CHECK(AgeRange::parse("65+") == AgeRange{65, std::nullopt});
    CHECK(AgeRange::parse("30-46") == AgeRange{30, 46});
    CHECK_THROWS(AgeRange::parse("46-30"));
    CHECK_THROWS(AgeRange::parse("abc"));
    const auto bins = default_age_bins();
    REQUIRE(bins.size() == 5);
    for (int age = 0; age < 120; ++age) {
        int hits = 0;
        for (const auto& b : bins) hits += b.contains(age) ? 1 : 0;
        REQUIRE(hits == 1);
    }
    CohortFilter f;
    CHECK(f.describe() == "all");
    f.sex = Sex::female;
    f.age = AgeRange{30, 46};
    CHECK(f.describe() != "all");
}

}
