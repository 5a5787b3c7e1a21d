#include "attndrift/event_ledger.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "attndrift/csv.hpp"

namespace attndrift {

namespace {

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view text, const std::array<std::string_view, N>& names,
                            E fallback) {
    if (text.empty()) return fallback;
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == text) return static_cast<E>(i);
    }
    return std::nullopt;
}

constexpr std::array<std::string_view, 4> kCategoryNames{"adult_fiction", "adult_nonfiction",
                                                         "children", "other"};
constexpr std::array<std::string_view, 4> kMediumNames{"physical", "ebook", "audiobook", "other"};
constexpr std::array<std::string_view, 3> kSexNames{"female", "male", "unknown"};
constexpr std::array<std::string_view, 4> kEducationNames{"basic", "upper_secondary", "higher",
                                                          "unknown"};
constexpr std::array<std::string_view, 3> kResidenceNames{"large_city", "town_rural", "unknown"};

}  // namespace

std::string_view to_string(Category v) { return kCategoryNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Medium v) { return kMediumNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Sex v) { return kSexNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Education v) { return kEducationNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Residence v) { return kResidenceNames[static_cast<std::size_t>(v)]; }

std::optional<Category> parse_category(std::string_view t) {
    return parse_enum(t, kCategoryNames, Category::other);
}
std::optional<Medium> parse_medium(std::string_view t) {
    return parse_enum(t, kMediumNames, Medium::other);
}
std::optional<Sex> parse_sex(std::string_view t) { return parse_enum(t, kSexNames, Sex::unknown); }
std::optional<Education> parse_education(std::string_view t) {
    return parse_enum(t, kEducationNames, Education::unknown);
}
std::optional<Residence> parse_residence(std::string_view t) {
    return parse_enum(t, kResidenceNames, Residence::unknown);
}

std::string event_log_header() {
    return "loan_date,item_key,title,creator,category,medium,loaner_id,birthdate,sex,education,"
           "residence";
}

std::string format_event(const LoanEvent& e) {
    std::string line;
    line.reserve(128);
    line += e.date.to_string();
    line += ',';
    csv::append_field(line, e.item_key);
    line += ',';
    csv::append_field(line, e.title);
    line += ',';
    csv::append_field(line, e.creator);
    line += ',';
    line += to_string(e.category);
    line += ',';
    line += to_string(e.medium);
    line += ',';
    csv::append_field(line, e.loaner_id);
    line += ',';
    if (e.birthdate) line += e.birthdate->to_string();
    line += ',';
    line += to_string(e.sex);
    line += ',';
    line += to_string(e.education);
    line += ',';
    line += to_string(e.residence);
    return line;
}

namespace {

struct ColumnIndex {
    int date = -1, item_key = -1, title = -1, creator = -1, category = -1, medium = -1,
        loaner_id = -1, birthdate = -1, sex = -1, education = -1, residence = -1;
};

ColumnIndex resolve_columns(const std::vector<std::string>& header, const ColumnSchema& schema) {
    ColumnIndex idx;
    auto find = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        return -1;
    };
    idx.date = find(schema.date);
    idx.item_key = find(schema.item_key);
    idx.title = find(schema.title);
    idx.creator = find(schema.creator);
    idx.category = find(schema.category);
    idx.medium = find(schema.medium);
    idx.loaner_id = find(schema.loaner_id);
    idx.birthdate = find(schema.birthdate);
    idx.sex = find(schema.sex);
    idx.education = find(schema.education);
    idx.residence = find(schema.residence);
    std::string missing;
    auto require = [&](int i, const std::string& name) {
        if (i < 0) missing += (missing.empty() ? "" : ", ") + name;
    };
    require(idx.date, schema.date);
    require(idx.item_key, schema.item_key);
    require(idx.title, schema.title);
    require(idx.loaner_id, schema.loaner_id);
    if (!missing.empty()) {
        throw IngestError("missing mandatory column(s): " + missing, {});
    }
    return idx;
}

std::string_view field_at(const std::vector<std::string>& fields, int i) {
    if (i < 0 || static_cast<std::size_t>(i) >= fields.size()) return {};
    return fields[static_cast<std::size_t>(i)];
}

}  // namespace

IngestReport ingest_stream(std::istream& in, const IngestOptions& options, const EventSink& sink) {
    IngestReport report;
    std::string line;
    std::vector<std::string> fields;
    if (!std::getline(in, line)) throw IngestError("event log is empty (no header row)", report);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!csv::split_record(line, fields)) throw IngestError("malformed header row", report);
    const ColumnIndex col = resolve_columns(fields, options.schema);

    LoanEvent event;
    std::uint64_t line_no = 1;
    auto reject = [&](std::string_view why) {
        ++report.malformed;
        if (report.diagnostics.size() < options.max_diagnostics) {
            report.diagnostics.push_back("line " + std::to_string(line_no) + ": " + std::string(why));
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++report.rows;
        if (!csv::split_record(line, fields)) {
            reject("unterminated quoted field");
            continue;
        }
        auto date = Date::parse(field_at(fields, col.date));
        if (!date) {
            reject("unparseable loan date");
            continue;
        }
        auto item_key = field_at(fields, col.item_key);
        auto title = field_at(fields, col.title);
        auto loaner = field_at(fields, col.loaner_id);
        if (item_key.empty() || title.empty() || loaner.empty()) {
            reject("empty mandatory field");
            continue;
        }
        std::optional<Date> birthdate;
        if (auto b = field_at(fields, col.birthdate); !b.empty()) {
            birthdate = Date::parse(b);
            if (!birthdate) {
                reject("unparseable birthdate");
                continue;
            }
            if (*date < *birthdate) {
                reject("birthdate after loan date");
                continue;
            }
        }
        if (!options.window.contains(*date)) {
            ++report.out_of_window;
            continue;
        }
        bool in_exclusion = false;
        for (const auto& r : options.exclusions) {
            if (r.contains(*date)) {
                in_exclusion = true;
                break;
            }
        }
        if (in_exclusion) {
            ++report.excluded;
            continue;
        }

        bool flagged = false;
        auto category = parse_category(field_at(fields, col.category));
        auto medium = parse_medium(field_at(fields, col.medium));
        auto sex = parse_sex(field_at(fields, col.sex));
        auto education = parse_education(field_at(fields, col.education));
        auto residence = parse_residence(field_at(fields, col.residence));
        flagged = !category || !medium || !sex || !education || !residence;

        event.date = *date;
        event.item_key.assign(item_key);
        event.title.assign(title);
        event.creator.assign(field_at(fields, col.creator));
        event.category = category.value_or(Category::other);
        event.medium = medium.value_or(Medium::other);
        event.loaner_id.assign(loaner);
        event.birthdate = birthdate;
        event.sex = sex.value_or(Sex::unknown);
        event.education = education.value_or(Education::unknown);
        event.residence = residence.value_or(Residence::unknown);
        if (flagged) ++report.flagged;
        ++report.accepted;
        sink(event);
    }
    if (in.bad()) throw IngestError("read error while scanning event log", report);

    if (report.rows > 0 &&
        static_cast<double>(report.malformed) >
            options.max_malformed_fraction * static_cast<double>(report.rows)) {
        std::ostringstream msg;
        msg << report.malformed << " of " << report.rows << " rows are malformed (limit "
            << options.max_malformed_fraction * 100.0 << "%)";
        if (!report.diagnostics.empty()) msg << "; first: " << report.diagnostics.front();
        throw IngestError(msg.str(), report);
    }
    return report;
}

IngestReport ingest(const std::string& path, const IngestOptions& options, const EventSink& sink) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open event log '" + path + "'", {});
    std::vector<char> buffer(1 << 20);
    in.rdbuf()->pubsetbuf(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    return ingest_stream(in, options, sink);
}

std::vector<LoanEvent> ingest_all(const std::string& path, const IngestOptions& options,
                                  IngestReport* report) {
    std::vector<LoanEvent> events;
    auto r = ingest(path, options, [&](const LoanEvent& e) { events.push_back(e); });
    if (report) *report = std::move(r);
    return events;
}

AgeRange AgeRange::parse(std::string_view text) {
    auto bad = [&] {
        return std::invalid_argument("age range '" + std::string(text) + "' must look like 30-46 or 65+");
    };
    auto to_int = [&](std::string_view s) {
        if (s.empty() || s.size() > 3) throw bad();
        int v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') throw bad();
            v = v * 10 + (c - '0');
        }
        return v;
    };
    AgeRange r;
    if (!text.empty() && text.back() == '+') {
        r.lower = to_int(text.substr(0, text.size() - 1));
        return r;
    }
    auto dash = text.find('-');
    if (dash == std::string_view::npos) throw bad();
    r.lower = to_int(text.substr(0, dash));
    r.upper = to_int(text.substr(dash + 1));
    if (*r.upper <= r.lower) throw bad();
    return r;
}

std::string AgeRange::to_string() const {
    if (!upper) return std::to_string(lower) + "+";
    return std::to_string(lower) + "-" + std::to_string(*upper);
}

std::vector<AgeRange> default_age_bins() {
    return {{0, 18}, {18, 30}, {30, 46}, {46, 65}, {65, std::nullopt}};
}

std::string CohortFilter::describe() const {
    if (empty()) return "all";
    std::string out;
    auto add = [&](std::string_view key, std::string_view value) {
        if (!out.empty()) out += ';';
        out += key;
        out += '=';
        out += value;
    };
    if (age) add("age", age->to_string());
    if (sex) add("sex", to_string(*sex));
    if (education) add("education", to_string(*education));
    if (residence) add("residence", to_string(*residence));
    if (!categories.empty()) {
        std::string cats;
        for (auto c : categories) {
            if (!cats.empty()) cats += '|';
            cats += to_string(c);
        }
        add("category", cats);
    }
    return out;
}

bool matches(const LoanEvent& event, const CohortFilter& filter, CohortSkipTally* skips) {
    if (filter.sex && event.sex != *filter.sex) return false;
    if (filter.education && event.education != *filter.education) return false;
    if (filter.residence && event.residence != *filter.residence) return false;
    if (!filter.categories.empty() && !filter.categories.contains(event.category)) return false;
    if (filter.age) {
        if (!event.birthdate) {
            if (skips) ++skips->missing_birthdate;
            return false;
        }
        if (!filter.age->contains(age_in_years(*event.birthdate, event.date))) return false;
    }
    return true;
}

}  // namespace attndrift
