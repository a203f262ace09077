// Civil-day mapping for UTC timestamps under a fixed offset or a POSIX DST rule.
#pragma once

#include "ivol/common.hpp"

#include <boost/date_time/local_time/local_time.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace ivol {

class Timezone {
public:
  static constexpr int kFirstYear = 1970;
  static constexpr int kLastYear = 2199;

  /// UTC, no DST.
  Timezone() : name_("UTC") {}

  /// Accepts a named zone alias, a fixed offset `+HH:MM` / `-HH:MM`, `UTC`,
  /// or a Boost POSIX rule string such as `EST-05EDT+01,M3.2.0/02:00,M11.1.0/02:00`.
  static Timezone parse(std::string_view spec) {
    const std::string s(spec);
    if (s.empty()) throw ConfigError("empty timezone");
    if (s == "UTC" || s == "Etc/UTC" || s == "Z") return Timezone();
    if (const char* rule = alias_rule(s)) return from_posix(s, rule);
    if ((s[0] == '+' || s[0] == '-') && s.size() == 6 && s[3] == ':') {
      const int hh = std::stoi(s.substr(1, 2)), mm = std::stoi(s.substr(4, 2));
      if (hh > 14 || mm > 59) throw ConfigError("timezone offset out of range: " + s);
      Timezone tz;
      tz.name_ = s;
      tz.base_ = (s[0] == '-' ? -1 : 1) * (hh * 3600 + mm * 60);
      return tz;
    }
    return from_posix(s, s);
  }

  const std::string& name() const noexcept { return name_; }

  /// Offset of local civil time from UTC at the given instant, in seconds.
  std::int64_t offset_at(std::int64_t utc) const noexcept {
    if (!has_dst_) return base_;
    const std::int64_t local_std = utc + base_;
    const int y = year_of(local_std);
    if (y < kFirstYear || y > kLastYear) return base_;
    const auto& [start, end] = transitions_[static_cast<std::size_t>(y - kFirstYear)];
    const bool in_dst = start < end ? (utc >= start && utc < end) : (utc < end || utc >= start);
    return in_dst ? base_ + dst_ : base_;
  }

  /// Local civil seconds since the epoch (i.e. UTC seconds shifted by the offset).
  std::int64_t to_local(std::int64_t utc) const noexcept { return utc + offset_at(utc); }

  Date civil_date(std::int64_t utc) const noexcept {
    return Date(floor_div(to_local(utc), 86400));
  }

  /// Minute of the civil day, 0..1439.
  int civil_minute(std::int64_t utc) const noexcept {
    const std::int64_t local = to_local(utc);
    return static_cast<int>((local - floor_div(local, 86400) * 86400) / 60);
  }

private:
  static const char* alias_rule(const std::string& s) {
    // Current rule sets (US rules since 2007, EU rules since 1996).
    if (s == "America/New_York" || s == "US/Eastern") return "EST-05EDT+01,M3.2.0/02:00,M11.1.0/02:00";
    if (s == "America/Chicago" || s == "US/Central") return "CST-06CDT+01,M3.2.0/02:00,M11.1.0/02:00";
    if (s == "Europe/London") return "GMT+00BST+01,M3.5.0/01:00,M10.5.0/02:00";
    if (s == "Europe/Berlin" || s == "Europe/Paris") return "CET+01CEST+01,M3.5.0/02:00,M10.5.0/03:00";
    if (s == "Asia/Tokyo") return "JST+09";
    if (s == "Asia/Seoul") return "KST+09";
    if (s == "Asia/Hong_Kong") return "HKT+08";
    return nullptr;
  }

  static Timezone from_posix(const std::string& name, const std::string& rule) {
    namespace lt = boost::local_time;
    namespace pt = boost::posix_time;
    Timezone tz;
    tz.name_ = name;
    try {
      const lt::posix_time_zone zone(rule);
      tz.base_ = zone.base_utc_offset().total_seconds();
      tz.has_dst_ = zone.has_dst();
      if (tz.has_dst_) {
        tz.dst_ = zone.dst_offset().total_seconds();
        const pt::ptime epoch(boost::gregorian::date(1970, 1, 1));
        for (int y = kFirstYear; y <= kLastYear; ++y) {
          const std::int64_t start_local = (zone.dst_local_start_time(y) - epoch).total_seconds();
          const std::int64_t end_local = (zone.dst_local_end_time(y) - epoch).total_seconds();
          // DST starts at a standard-time wall clock and ends at a DST wall clock.
          tz.transitions_[static_cast<std::size_t>(y - kFirstYear)] = {
              start_local - tz.base_, end_local - tz.base_ - tz.dst_};
        }
      }
    } catch (const std::exception& e) {
      throw ConfigError("unrecognised timezone '" + name + "': " + e.what());
    }
    return tz;
  }

  static int year_of(std::int64_t local_seconds) {
    return static_cast<int>(Date(floor_div(local_seconds, 86400)).ymd().year());
  }

  std::string name_;
  std::int64_t base_ = 0;
  std::int64_t dst_ = 0;
  bool has_dst_ = false;
  std::array<std::pair<std::int64_t, std::int64_t>, kLastYear - kFirstYear + 1> transitions_{};
};

}  // namespace ivol
