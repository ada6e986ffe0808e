#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace trendfolio {

/// Calendar date with day resolution. Ordered, hashable through serial().
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days d) : days_(d) {}
    constexpr Date(int y, unsigned m, unsigned d)
        : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                            std::chrono::day{d}}) {}

    /// Strict ISO-8601 "YYYY-MM-DD". Returns nullopt on anything else.
    static std::optional<Date> parse(std::string_view s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-')
            return std::nullopt;
        int y = 0;
        unsigned m = 0, d = 0;
        auto num = [](std::string_view part, auto& out) {
            auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
            return ec == std::errc{} && ptr == part.data() + part.size();
        };
        if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d))
            return std::nullopt;
        std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
        if (!ymd.ok())
            return std::nullopt;
        return Date{std::chrono::sys_days{ymd}};
    }

    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
    int year() const { return static_cast<int>(ymd().year()); }
    unsigned month() const { return static_cast<unsigned>(ymd().month()); }
    unsigned day() const { return static_cast<unsigned>(ymd().day()); }
    std::chrono::sys_days sys_days() const { return days_; }
    long serial() const { return days_.time_since_epoch().count(); }

    bool is_weekday() const {
        auto wd = std::chrono::weekday{days_}.c_encoding();
        return wd != 0 && wd != 6;
    }

    Date operator+(int n) const { return Date{days_ + std::chrono::days{n}}; }

    std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
        return buf;
    }

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

inline bool same_month(const Date& a, const Date& b) {
    return a.year() == b.year() && a.month() == b.month();
}

/// True when no weekday follows `d` inside its calendar month.
inline bool is_last_weekday_of_month(const Date& d) {
    for (Date n = d + 1; same_month(n, d); n = n + 1)
        if (n.is_weekday())
            return false;
    return true;
}

/// True when no weekday follows `d` inside its calendar year.
inline bool is_last_weekday_of_year(const Date& d) {
    for (Date n = d + 1; n.year() == d.year(); n = n + 1)
        if (n.is_weekday())
            return false;
    return true;
}

} // namespace trendfolio
