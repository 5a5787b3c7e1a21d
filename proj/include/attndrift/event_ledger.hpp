#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "attndrift/calendar.hpp"

namespace attndrift {

enum class Category { adult_fiction, adult_nonfiction, children, other };
enum class Medium { physical, ebook, audiobook, other };
enum class Sex { female, male, unknown };
enum class Education { basic, upper_secondary, higher, unknown };
enum class Residence { large_city, town_rural, unknown };

std::string_view to_string(Category v);
std::string_view to_string(Medium v);
std::string_view to_string(Sex v);
std::string_view to_string(Education v);
std::string_view to_string(Residence v);

// Parsers return nullopt for text outside the closed set. Empty text parses to
// the set's fallback member (other / unknown).
std::optional<Category> parse_category(std::string_view text);
std::optional<Medium> parse_medium(std::string_view text);
std::optional<Sex> parse_sex(std::string_view text);
std::optional<Education> parse_education(std::string_view text);
std::optional<Residence> parse_residence(std::string_view text);

// One loan. Demographics are a snapshot at loan time; education and residence
// may differ between two loans of the same loaner.
struct LoanEvent {
    Date date;
    std::string item_key;
    std::string title;
    std::string creator;
    Category category = Category::other;
    Medium medium = Medium::other;
    std::string loaner_id;
    std::optional<Date> birthdate;
    Sex sex = Sex::unknown;
    Education education = Education::unknown;
    Residence residence = Residence::unknown;
};

// Column name for each event field. Mandatory: date, item_key, title, loaner_id.
struct ColumnSchema {
    std::string date = "loan_date";
    std::string item_key = "item_key";
    std::string title = "title";
    std::string creator = "creator";
    std::string category = "category";
    std::string medium = "medium";
    std::string loaner_id = "loaner_id";
    std::string birthdate = "birthdate";
    std::string sex = "sex";
    std::string education = "education";
    std::string residence = "residence";
};

// Header line of the standard event-log layout.
std::string event_log_header();
// Serializes one event as a line of the standard layout (no trailing newline).
std::string format_event(const LoanEvent& e);

struct IngestOptions {
    ColumnSchema schema;
    DateRange window = DateRange::unbounded();
    std::vector<DateRange> exclusions;
    // Abort when malformed rows exceed this fraction of data rows.
    double max_malformed_fraction = 0.01;
    // Number of malformed-row diagnostics retained in the report.
    std::size_t max_diagnostics = 20;
};

struct IngestReport {
    std::uint64_t rows = 0;
    std::uint64_t accepted = 0;
    std::uint64_t out_of_window = 0;
    std::uint64_t excluded = 0;
    std::uint64_t malformed = 0;
    // Accepted rows carrying an enum value outside its closed set.
    std::uint64_t flagged = 0;
    std::vector<std::string> diagnostics;

    friend bool operator==(const IngestReport&, const IngestReport&) = default;
};

class IngestError : public std::runtime_error {
public:
    IngestError(const std::string& what, IngestReport report)
        : std::runtime_error(what), report_(std::move(report)) {}
    const IngestReport& report() const { return report_; }

private:
    IngestReport report_;
};

using EventSink = std::function<void(const LoanEvent&)>;

// Streams the accepted events of a delimited event log to `sink` in file
// order. Throws IngestError when the file cannot be read, a mandatory column
// is missing or the malformed fraction exceeds the threshold. The threshold
// is checked after the full pass, so the sink may already have seen events.
IngestReport ingest(const std::string& path, const IngestOptions& options, const EventSink& sink);
IngestReport ingest_stream(std::istream& in, const IngestOptions& options, const EventSink& sink);

// Convenience wrapper that materializes the events.
std::vector<LoanEvent> ingest_all(const std::string& path, const IngestOptions& options,
                                  IngestReport* report = nullptr);

// Half-open age interval in whole years; no upper bound when `upper` is empty.
struct AgeRange {
    int lower = 0;
    std::optional<int> upper;

    bool contains(int age) const { return age >= lower && (!upper || age < *upper); }
    // "30-46" or "65+".
    static AgeRange parse(std::string_view text);
    std::string to_string() const;
    friend bool operator==(const AgeRange&, const AgeRange&) = default;
};

// [0,18), [18,30), [30,46), [46,65), [65,inf)
std::vector<AgeRange> default_age_bins();

struct CohortFilter {
    std::optional<AgeRange> age;
    std::optional<Sex> sex;
    std::optional<Education> education;
    std::optional<Residence> residence;
    std::set<Category> categories;  // empty = any category

    bool empty() const {
        return !age && !sex && !education && !residence && categories.empty();
    }
    // Stable textual descriptor, "all" for the empty filter.
    std::string describe() const;
};

struct CohortSkipTally {
    std::uint64_t missing_birthdate = 0;
};

// True iff every present filter field matches. Age is evaluated at the event
// date. An age filter against an event without birthdate does not match and is
// counted in `skips`.
bool matches(const LoanEvent& event, const CohortFilter& filter, CohortSkipTally* skips = nullptr);

}  // namespace attndrift
