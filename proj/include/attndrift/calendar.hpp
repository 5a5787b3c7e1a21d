#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace attndrift {

// Calendar day stored as days since 1970-01-01 (proleptic Gregorian).
class Date {
public:
    constexpr Date() = default;
    static Date from_days(std::int32_t days) { return Date(days); }
    static Date from_ymd(int year, unsigned month, unsigned day);

    // Strict "YYYY-MM-DD". Returns nullopt on any malformation.
    static std::optional<Date> parse(std::string_view iso);
    // Like parse() but throws std::invalid_argument.
    static Date parse_or_throw(std::string_view iso);

    std::int32_t days() const { return days_; }
    int year() const;
    unsigned month() const;
    unsigned day() const;
    // 1 = Monday ... 7 = Sunday
    unsigned iso_weekday() const;

    Date add_days(std::int32_t n) const { return Date(days_ + n); }
    std::string to_string() const;

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    explicit constexpr Date(std::int32_t days) : days_(days) {}
    std::int32_t days_ = 0;
};

// Whole years elapsed between birth and on (floor), e.g. the age on a loan date.
int age_in_years(Date birth, Date on);

// Inclusive range of days.
struct DateRange {
    Date first;
    Date last;

    bool contains(Date d) const { return first <= d && d <= last; }
    // "YYYY-MM-DD:YYYY-MM-DD"; either side may be empty for an open end.
    static DateRange parse(std::string_view text);
    static DateRange unbounded();
    std::string to_string() const;
    friend bool operator==(const DateRange&, const DateRange&) = default;
};

enum class Granularity { week, month, quarter };

std::string_view to_string(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view text);

// Half-open calendar interval [start, end). Weeks start on Monday.
struct TimeBin {
    Granularity granularity = Granularity::month;
    std::int64_t index = 0;  // ordinal from the 1970 epoch within the granularity
    Date start;
    Date end;

    bool contains(Date d) const { return start <= d && d < end; }
    friend bool operator==(const TimeBin& a, const TimeBin& b) {
        return a.granularity == b.granularity && a.index == b.index;
    }
    friend auto operator<=>(const TimeBin& a, const TimeBin& b) {
        if (auto c = a.granularity <=> b.granularity; c != 0) return c;
        return a.index <=> b.index;
    }
};

TimeBin assign_bin(Date date, Granularity granularity);
TimeBin bin_from_index(std::int64_t index, Granularity granularity);

// Position of a bin within its calendar year: month number (1-12), quarter
// number (1-4) or ISO week number (1-53), plus the year the position belongs
// to (the ISO week-numbering year for weeks).
struct CalendarPosition {
    int year = 0;
    int position = 0;
    friend bool operator==(const CalendarPosition&, const CalendarPosition&) = default;
};

CalendarPosition calendar_position(const TimeBin& bin);
// Number of ISO weeks (52 or 53) in an ISO week-numbering year.
int iso_weeks_in_year(int iso_year);
// Inverse of calendar_position.
std::optional<TimeBin> bin_at_position(CalendarPosition pos, Granularity granularity);

// "YYYY-MM" (first of month) or "YYYY-MM-DD".
std::optional<Date> parse_bin_reference(std::string_view text);

}  // namespace attndrift
