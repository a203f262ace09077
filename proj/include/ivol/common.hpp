// Shared error types and the calendar-date value type used across ivol.
#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ivol {

//===========================================================================//
// Errors                                                                    //
//===========================================================================//
// Every failure surfaced by the library derives from ivol::Error so callers
// (the CLI in particular) can map families of errors onto exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (carries the 1-based line number when known).
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Input data violates a documented invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A statistic needs nonzero sample variance (or n >= 2) and did not get it.
class DegenerateVarianceError : public Error {
public:
  using Error::Error;
};

/// Model estimation impossible (rank deficiency, empty design cells, ...).
class EstimationError : public Error {
public:
  using Error::Error;
};

/// Bad run configuration; raised before any computation starts.
class ConfigError : public Error {
public:
  using Error::Error;
};

//===========================================================================//
// Date                                                                      //
//===========================================================================//
// A civil calendar day. Stored as days since 1970-01-01 so ordering and
// arithmetic are trivial; converts through std::chrono for y/m/d fields.
class Date {
public:
  constexpr Date() = default;
  constexpr explicit Date(std::int64_t days_since_epoch) : days_(days_since_epoch) {}

  static Date from_ymd(int y, unsigned m, unsigned d) {
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok())
      throw ValidationError("invalid calendar date " + std::to_string(y) + "-" +
                            std::to_string(m) + "-" + std::to_string(d));
    return Date(sys_days{ymd}.time_since_epoch().count());
  }

  /// Parses `YYYY-MM-DD`.
  static Date parse(std::string_view s) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    const std::string buf(s);
    if (buf.size() != 10 || std::sscanf(buf.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
      throw ParseError("expected ISO-8601 date YYYY-MM-DD, got '" + buf + "'");
    return from_ymd(y, m, d);
  }

  constexpr std::int64_t days_since_epoch() const noexcept { return days_; }

  std::chrono::year_month_day ymd() const {
    using namespace std::chrono;
    return year_month_day{sys_days{days{days_}}};
  }

  std::string iso() const {
    const auto v = ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(v.year()),
                  static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
    return buf;
  }

  constexpr Date operator+(std::int64_t n) const noexcept { return Date(days_ + n); }
  constexpr Date operator-(std::int64_t n) const noexcept { return Date(days_ - n); }
  constexpr std::int64_t operator-(Date o) const noexcept { return days_ - o.days_; }
  constexpr auto operator<=>(const Date&) const = default;

private:
  std::int64_t days_ = 0;
};

/// Floor division that also works for negative numerators.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  const std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

/// Decimal text with 17 significant digits; parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace ivol
