// Minute-bar ingestion, civil-day price grids and event-study period labels.
#pragma once

#include "ivol/common.hpp"
#include "ivol/timezone.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ivol {

inline constexpr int kMinutesPerDay = 1440;
inline constexpr int kGridPoints = kMinutesPerDay + 1;

//===========================================================================//
// MinuteBar                                                                 //
//===========================================================================//
struct MinuteBar {
  std::int64_t timestamp = 0;  // UTC epoch seconds, minute aligned
  double open = 0, high = 0, low = 0, close = 0;

  bool operator==(const MinuteBar&) const = default;
};

/// Throws ValidationError describing the first violated OHLC invariant.
inline void validate_bar(const MinuteBar& b, const std::string& where = {}) {
  const std::string ctx = where.empty() ? "" : where + ": ";
  if (b.timestamp % 60 != 0)
    throw ValidationError(ctx + "timestamp " + std::to_string(b.timestamp) + " is not minute aligned");
  if (!(b.open > 0 && b.high > 0 && b.low > 0 && b.close > 0) ||
      !std::isfinite(b.open + b.high + b.low + b.close))
    throw ValidationError(ctx + "prices must be finite and positive");
  if (b.high < b.low) throw ValidationError(ctx + "high < low");
  if (b.low > std::min(b.open, b.close) || b.high < std::max(b.open, b.close))
    throw ValidationError(ctx + "open/close outside [low, high]");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

}  // namespace detail

/// Reads `timestamp,open,high,low,close` rows. Line numbers in errors are
/// 1-based and count the header.
inline std::vector<MinuteBar> parse_bars(std::istream& in) {
  std::vector<MinuteBar> bars;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++lineno;
  {
    std::string_view header = detail::trim(line);
    if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
    if (header != "timestamp,open,high,low,close")
      throw ParseError("expected header 'timestamp,open,high,low,close'", lineno);
  }
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    const auto f = detail::split(row, ',');
    if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), lineno);
    MinuteBar b;
    if (!detail::parse_number(f[0], b.timestamp)) throw ParseError("bad timestamp", lineno);
    double* dst[] = {&b.open, &b.high, &b.low, &b.close};
    for (int i = 0; i < 4; ++i)
      if (!detail::parse_number(f[static_cast<std::size_t>(i) + 1], *dst[i]))
        throw ParseError("bad price in field " + std::to_string(i + 2), lineno);
    const std::string where = "line " + std::to_string(lineno);
    validate_bar(b, where);
    if (!bars.empty()) {
      if (b.timestamp == bars.back().timestamp)
        throw ValidationError(where + ": duplicate timestamp " + std::to_string(b.timestamp));
      if (b.timestamp < bars.back().timestamp)
        throw ValidationError(where + ": timestamps not ascending");
    }
    bars.push_back(b);
  }
  return bars;
}

inline void write_bars(std::ostream& out, std::span<const MinuteBar> bars) {
  out << "timestamp,open,high,low,close\n";
  for (const auto& b : bars)
    out << b.timestamp << ',' << format_double(b.open) << ',' << format_double(b.high) << ','
        << format_double(b.low) << ',' << format_double(b.close) << '\n';
}

//===========================================================================//
// PeriodScheme                                                              //
//===========================================================================//
struct Period {
  std::string label;
  Date start;  // inclusive
  Date end;    // inclusive
};

struct PeriodScheme {
  std::vector<Period> periods;
  std::size_t baseline = 0;  // index into periods
  Timezone timezone = Timezone::parse("America/New_York");

  void validate() const {
    if (periods.empty()) throw ConfigError("period scheme has no periods");
    if (baseline >= periods.size()) throw ConfigError("baseline period index out of range");
    for (std::size_t i = 0; i < periods.size(); ++i) {
      const auto& p = periods[i];
      if (p.label.empty()) throw ConfigError("period " + std::to_string(i) + " has an empty label");
      if (p.end < p.start) throw ConfigError("period '" + p.label + "' ends before it starts");
      if (i > 0 && !(periods[i - 1].end < p.start))
        throw ConfigError("periods '" + periods[i - 1].label + "' and '" + p.label +
                          "' overlap or are out of order");
      for (std::size_t j = 0; j < i; ++j)
        if (periods[j].label == p.label) throw ConfigError("duplicate period label '" + p.label + "'");
    }
  }

  const Period& baseline_period() const { return periods.at(baseline); }

  std::optional<std::size_t> period_of(Date d) const {
    for (std::size_t i = 0; i < periods.size(); ++i)
      if (periods[i].start <= d && d <= periods[i].end) return i;
    return std::nullopt;
  }

  /// The Dec-2017 futures-launch study: baseline before the launch, then three
  /// roughly two-month windows, days split on New York civil time.
  static PeriodScheme futures_launch_2017() {
    PeriodScheme s;
    s.periods = {
        {"Period 0", Date::parse("2017-07-05"), Date::parse("2017-12-17")},
        {"Period 1", Date::parse("2017-12-18"), Date::parse("2018-02-28")},
        {"Period 2", Date::parse("2018-03-01"), Date::parse("2018-04-30")},
        {"Period 3", Date::parse("2018-05-01"), Date::parse("2018-06-26")},
    };
    s.baseline = 0;
    s.timezone = Timezone::parse("America/New_York");
    return s;
  }
};

//===========================================================================//
// DayGrid                                                                   //
//===========================================================================//
struct DayGrid {
  Date date;
  std::vector<double> log_prices;  // kGridPoints: boundary price then 1440 minute closes
  std::vector<double> returns;     // kMinutesPerDay first differences of log_prices
  std::vector<MinuteBar> bars;     // kMinutesPerDay, forward-filled where missing
  int missing_count = 0;
  bool boundary_from_open = false;  // no prior close existed; first open used instead
};

struct ExcludedDay {
  Date date;
  int missing_count = 0;
  std::string reason;
};

struct DayGridBuild {
  std::vector<DayGrid> days;
  std::vector<ExcludedDay> excluded;
  std::vector<std::string> notices;
};

/// Groups bars into civil days of scheme.timezone and builds the price grids.
/// Minutes without a bar repeat the last close (zero return) and are counted;
/// days missing more than `max_missing_fraction` of their minutes are excluded.
inline DayGridBuild build_day_grids(std::span<const MinuteBar> bars, const PeriodScheme& scheme,
                                    double max_missing_fraction = 0.10) {
  if (!(max_missing_fraction >= 0.0 && max_missing_fraction <= 1.0))
    throw ConfigError("max missing fraction must lie in [0, 1]");
  DayGridBuild out;
  if (bars.empty()) {
    out.notices.push_back("no bars in input");
    return out;
  }
  const Timezone& tz = scheme.timezone;

  if (!scheme.periods.empty()) {
    const Date lo = scheme.periods.front().start, hi = scheme.periods.back().end;
    const Date first = tz.civil_date(bars.front().timestamp), last = tz.civil_date(bars.back().timestamp);
    if (last < lo || hi < first) out.notices.push_back("no bars fall inside the period scheme's date range");
  }

  std::optional<double> prev_close;
  std::size_t i = 0;
  const Date first_day = tz.civil_date(bars.front().timestamp);
  const Date last_day = tz.civil_date(bars.back().timestamp);
  for (Date day = first_day; day <= last_day; day = day + 1) {
    std::vector<std::optional<MinuteBar>> slots(kMinutesPerDay);
    std::size_t observed = 0;
    for (; i < bars.size() && tz.civil_date(bars[i].timestamp) == day; ++i) {
      const MinuteBar& b = bars[i];
      auto& slot = slots[static_cast<std::size_t>(tz.civil_minute(b.timestamp))];
      if (!slot) {
        slot = b;
        ++observed;
      } else {
        // Repeated civil minute (DST fall-back): merge in UTC order.
        slot->high = std::max(slot->high, b.high);
        slot->low = std::min(slot->low, b.low);
        slot->close = b.close;
      }
    }
    if (observed == 0) {
      out.excluded.push_back({day, kMinutesPerDay, "no observed bars"});
      continue;
    }

    DayGrid g;
    g.date = day;
    g.log_prices.resize(kGridPoints);
    g.returns.resize(kMinutesPerDay);
    g.bars.resize(kMinutesPerDay);
    double last = 0;
    if (prev_close) {
      last = *prev_close;
    } else {
      for (const auto& s : slots)
        if (s) {
          last = s->open;
          break;
        }
      g.boundary_from_open = true;
    }
    g.log_prices[0] = std::log(last);
    const std::int64_t local_midnight = day.days_since_epoch() * 86400;
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (slots[k]) {
        g.bars[k] = *slots[k];
        last = slots[k]->close;
      } else {
        const std::int64_t local = local_midnight + static_cast<std::int64_t>(k) * 60;
        g.bars[k] = {local - tz.offset_at(local - tz.offset_at(local)), last, last, last, last};
        ++g.missing_count;
      }
      g.log_prices[k + 1] = std::log(last);
      g.returns[k] = g.log_prices[k + 1] - g.log_prices[k];
    }
    prev_close = last;

    if (static_cast<double>(g.missing_count) / kMinutesPerDay > max_missing_fraction) {
      out.excluded.push_back({day, g.missing_count, "missing fraction above threshold"});
      continue;
    }
    out.days.push_back(std::move(g));
  }
  return out;
}

//===========================================================================//
// Period assignment                                                         //
//===========================================================================//
// Works for any record type exposing a `date` member (DayGrid, DailyVol,
// AmplitudeSpectrum, ...).
template <class T>
struct PeriodBuckets {
  std::vector<std::string> labels;  // scheme order
  std::map<std::string, std::vector<T>> members;
  std::size_t dropped = 0;

  const std::vector<T>& at(const std::string& label) const { return members.at(label); }
  std::size_t count(const std::string& label) const { return members.at(label).size(); }
};

template <class T>
PeriodBuckets<T> assign_periods(std::span<const T> items, const PeriodScheme& scheme) {
  scheme.validate();
  PeriodBuckets<T> out;
  for (const auto& p : scheme.periods) {
    out.labels.push_back(p.label);
    out.members[p.label];
  }
  for (const auto& item : items) {
    if (const auto idx = scheme.period_of(item.date))
      out.members[scheme.periods[*idx].label].push_back(item);
    else
      ++out.dropped;
  }
  return out;
}

template <class T>
PeriodBuckets<T> assign_periods(const std::vector<T>& items, const PeriodScheme& scheme) {
  return assign_periods(std::span<const T>(items), scheme);
}

//===========================================================================//
// Day-grid interchange (one JSON object per line)                           //
//===========================================================================//
struct GridRecord {
  Date date;
  std::vector<double> log_prices;
  int missing_count = 0;
};

inline void write_day_grid_line(std::ostream& out, Date date, std::span<const double> log_prices,
                                int missing_count) {
  out << "{\"date\":\"" << date.iso() << "\",\"logPrices\":[";
  for (std::size_t k = 0; k < log_prices.size(); ++k) {
    if (k) out << ',';
    out << format_double(log_prices[k]);
  }
  out << "],\"missingCount\":" << missing_count << "}\n";
}

inline void write_day_grids(std::ostream& out, std::span<const DayGrid> days) {
  for (const auto& d : days) write_day_grid_line(out, d.date, d.log_prices, d.missing_count);
}

inline std::vector<GridRecord> read_day_grids(std::istream& in) {
  std::vector<GridRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      GridRecord r;
      r.date = Date::parse(j.at("date").get<std::string>());
      r.log_prices = j.at("logPrices").get<std::vector<double>>();
      r.missing_count = j.at("missingCount").get<int>();
      if (r.log_prices.size() != static_cast<std::size_t>(kGridPoints))
        throw ParseError("logPrices must have 1441 entries", lineno);
      if (r.missing_count < 0 || r.missing_count > kMinutesPerDay)
        throw ParseError("missingCount out of range", lineno);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

}  // namespace ivol
