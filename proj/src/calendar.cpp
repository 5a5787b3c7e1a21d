#include "attndrift/calendar.hpp"

#include <chrono>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace attndrift {

namespace chr = std::chrono;

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

chr::year_month_day to_ymd(Date d) {
    return chr::year_month_day{chr::sys_days{chr::days{d.days()}}};
}

// 1970-01-05 was the first Monday after the epoch.
constexpr std::int32_t kFirstMonday = 4;

bool parse_digits(std::string_view s, int& out) {
    if (s.empty()) return false;
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
    chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date " + std::to_string(year) + "-" +
                                    std::to_string(month) + "-" + std::to_string(day));
    }
    return Date(static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count()));
}

std::optional<Date> Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_digits(iso.substr(0, 4), y) || !parse_digits(iso.substr(5, 2), m) ||
        !parse_digits(iso.substr(8, 2), d)) {
        return std::nullopt;
    }
    chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                            chr::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date(static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count()));
}

Date Date::parse_or_throw(std::string_view iso) {
    auto d = parse(iso);
    if (!d) throw std::invalid_argument("invalid date '" + std::string(iso) + "' (expected YYYY-MM-DD)");
    return *d;
}

int Date::year() const { return static_cast<int>(to_ymd(*this).year()); }
unsigned Date::month() const { return static_cast<unsigned>(to_ymd(*this).month()); }
unsigned Date::day() const { return static_cast<unsigned>(to_ymd(*this).day()); }

unsigned Date::iso_weekday() const {
    return chr::weekday{chr::sys_days{chr::days{days_}}}.iso_encoding();
}

std::string Date::to_string() const {
    auto ymd = to_ymd(*this);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

int age_in_years(Date birth, Date on) {
    auto b = to_ymd(birth);
    auto o = to_ymd(on);
    int age = static_cast<int>(o.year()) - static_cast<int>(b.year());
    if (chr::month_day{o.month(), o.day()} < chr::month_day{b.month(), b.day()}) --age;
    return age;
}

DateRange DateRange::unbounded() {
    return {Date::from_days(std::numeric_limits<std::int32_t>::min() / 2),
            Date::from_days(std::numeric_limits<std::int32_t>::max() / 2)};
}

DateRange DateRange::parse(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("date range '" + std::string(text) +
                                    "' must look like FIRST:LAST");
    }
    DateRange r = unbounded();
    auto lhs = text.substr(0, colon);
    auto rhs = text.substr(colon + 1);
    if (!lhs.empty()) r.first = Date::parse_or_throw(lhs);
    if (!rhs.empty()) r.last = Date::parse_or_throw(rhs);
    if (r.last < r.first) {
        throw std::invalid_argument("date range '" + std::string(text) + "' ends before it starts");
    }
    return r;
}

std::string DateRange::to_string() const {
    auto u = unbounded();
    std::string out = first == u.first ? "" : first.to_string();
    out += ':';
    if (!(last == u.last)) out += last.to_string();
    return out;
}

std::string_view to_string(Granularity g) {
    switch (g) {
        case Granularity::week: return "week";
        case Granularity::month: return "month";
        case Granularity::quarter: return "quarter";
    }
    return "month";
}

std::optional<Granularity> parse_granularity(std::string_view text) {
    if (text == "week") return Granularity::week;
    if (text == "month") return Granularity::month;
    if (text == "quarter") return Granularity::quarter;
    return std::nullopt;
}

TimeBin bin_from_index(std::int64_t index, Granularity granularity) {
    TimeBin bin;
    bin.granularity = granularity;
    bin.index = index;
    switch (granularity) {
        case Granularity::week: {
            auto start = static_cast<std::int32_t>(index * 7 + kFirstMonday);
            bin.start = Date::from_days(start);
            bin.end = Date::from_days(start + 7);
            break;
        }
        case Granularity::month: {
            auto year = static_cast<int>(1970 + floor_div(index, 12));
            auto month = static_cast<unsigned>(index - floor_div(index, 12) * 12 + 1);
            bin.start = Date::from_ymd(year, month, 1);
            bin.end = month == 12 ? Date::from_ymd(year + 1, 1, 1) : Date::from_ymd(year, month + 1, 1);
            break;
        }
        case Granularity::quarter: {
            auto year = static_cast<int>(1970 + floor_div(index, 4));
            auto q = static_cast<unsigned>(index - floor_div(index, 4) * 4);
            bin.start = Date::from_ymd(year, q * 3 + 1, 1);
            bin.end = q == 3 ? Date::from_ymd(year + 1, 1, 1) : Date::from_ymd(year, q * 3 + 4, 1);
            break;
        }
    }
    return bin;
}

TimeBin assign_bin(Date date, Granularity granularity) {
    std::int64_t index = 0;
    switch (granularity) {
        case Granularity::week:
            index = floor_div(static_cast<std::int64_t>(date.days()) - kFirstMonday, 7);
            break;
        case Granularity::month:
            index = static_cast<std::int64_t>(date.year() - 1970) * 12 + (date.month() - 1);
            break;
        case Granularity::quarter:
            index = static_cast<std::int64_t>(date.year() - 1970) * 4 + (date.month() - 1) / 3;
            break;
    }
    return bin_from_index(index, granularity);
}

namespace {

int day_of_year(Date d) {
    return d.days() - Date::from_ymd(d.year(), 1, 1).days() + 1;
}

Date iso_week_one_monday(int iso_year) {
    Date jan4 = Date::from_ymd(iso_year, 1, 4);
    return jan4.add_days(-static_cast<std::int32_t>(jan4.iso_weekday() - 1));
}

}  // namespace

int iso_weeks_in_year(int iso_year) {
    Date dec28 = Date::from_ymd(iso_year, 12, 28);
    return (day_of_year(dec28.add_days(4 - static_cast<std::int32_t>(dec28.iso_weekday()))) - 1) / 7 + 1;
}

CalendarPosition calendar_position(const TimeBin& bin) {
    switch (bin.granularity) {
        case Granularity::week: {
            Date thursday = bin.start.add_days(3);
            return {thursday.year(), (day_of_year(thursday) - 1) / 7 + 1};
        }
        case Granularity::month:
            return {bin.start.year(), static_cast<int>(bin.start.month())};
        case Granularity::quarter:
            return {bin.start.year(), static_cast<int>((bin.start.month() - 1) / 3 + 1)};
    }
    return {};
}

std::optional<TimeBin> bin_at_position(CalendarPosition pos, Granularity granularity) {
    switch (granularity) {
        case Granularity::week:
            if (pos.position < 1 || pos.position > iso_weeks_in_year(pos.year)) return std::nullopt;
            return assign_bin(iso_week_one_monday(pos.year).add_days(7 * (pos.position - 1)),
                              Granularity::week);
        case Granularity::month:
            if (pos.position < 1 || pos.position > 12) return std::nullopt;
            return assign_bin(Date::from_ymd(pos.year, static_cast<unsigned>(pos.position), 1),
                              Granularity::month);
        case Granularity::quarter:
            if (pos.position < 1 || pos.position > 4) return std::nullopt;
            return assign_bin(Date::from_ymd(pos.year, static_cast<unsigned>(pos.position - 1) * 3 + 1, 1),
                              Granularity::quarter);
    }
    return std::nullopt;
}

std::optional<Date> parse_bin_reference(std::string_view text) {
    if (text.size() == 7 && text[4] == '-') {
        std::string full(text);
        full += "-01";
        return Date::parse(full);
    }
    return Date::parse(text);
}

}  // namespace attndrift
