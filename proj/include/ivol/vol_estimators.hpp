// Daily volatility estimators and their per-period summaries.
#pragma once

#include "ivol/common.hpp"
#include "ivol/market_data.hpp"
#include "ivol/stats.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ivol {

struct DailyVol {
  Date date;
  double sigma = 0;          // bias-corrected realized volatility
  double sigma_gk = 0;       // Garman-Klass volatility
  bool clamped = false;      // realized-vol radicand was negative
  bool gk_clamped = false;   // Garman-Klass radicand was negative
};

struct ClampedSqrt {
  double value = 0;
  double radicand = 0;
  bool clamped = false;
};

inline ClampedSqrt clamped_sqrt(double radicand) {
  if (radicand < 0) return {0.0, radicand, true};
  return {std::sqrt(radicand), radicand, false};
}

/// Realized volatility with a first-order autocovariance correction:
///   sqrt( sum r_k^2 + 2 * n/(n-1) * sum_{k<n} r_k r_{k+1} ).
/// A negative radicand yields 0 with `clamped` set.
inline ClampedSqrt realized_vol(std::span<const double> returns) {
  const std::size_t n = returns.size();
  if (n < 2) throw DomainError("realized volatility needs at least two returns");
  double sq = 0, cross = 0;
  for (std::size_t k = 0; k < n; ++k) sq += returns[k] * returns[k];
  for (std::size_t k = 0; k + 1 < n; ++k) cross += returns[k] * returns[k + 1];
  const double scale = static_cast<double>(n) / static_cast<double>(n - 1);
  return clamped_sqrt(sq + 2.0 * scale * cross);
}

inline ClampedSqrt realized_vol(const DayGrid& day) {
  if (day.returns.size() != static_cast<std::size_t>(kMinutesPerDay))
    throw ValidationError("day " + day.date.iso() + " does not have 1440 returns");
  return realized_vol(day.returns);
}

/// Garman-Klass range estimator summed over the day's minute bars:
///   sqrt( sum [ 0.5 ln(H/L)^2 - (2 ln 2 - 1) ln(C/O)^2 ] ).
inline ClampedSqrt garman_klass_vol(std::span<const MinuteBar> bars) {
  static const double kCoef = 2.0 * std::log(2.0) - 1.0;
  double sum = 0;
  for (const auto& b : bars) {
    validate_bar(b);
    const double hl = std::log(b.high / b.low);
    const double co = std::log(b.close / b.open);
    sum += 0.5 * hl * hl - kCoef * co * co;
  }
  return clamped_sqrt(sum);
}

inline ClampedSqrt garman_klass_vol(const DayGrid& day) {
  if (day.bars.size() != static_cast<std::size_t>(kMinutesPerDay))
    throw ValidationError("day " + day.date.iso() + " does not have 1440 bars");
  return garman_klass_vol(day.bars);
}

inline DailyVol daily_vol(const DayGrid& day) {
  const auto rv = realized_vol(day);
  const auto gk = garman_klass_vol(day);
  return {day.date, rv.value, gk.value, rv.clamped, gk.clamped};
}

inline std::vector<DailyVol> daily_vols(std::span<const DayGrid> days) {
  std::vector<DailyVol> out;
  out.reserve(days.size());
  for (const auto& d : days) out.push_back(daily_vol(d));
  return out;
}

//===========================================================================//
// Period summaries                                                          //
//===========================================================================//
enum class VolMeasure { Realized, GarmanKlass };

inline const char* to_string(VolMeasure m) {
  return m == VolMeasure::Realized ? "realized" : "garman_klass";
}

inline double measure_of(const DailyVol& v, VolMeasure m) {
  return m == VolMeasure::Realized ? v.sigma : v.sigma_gk;
}

struct PeriodVolSummary {
  std::string label;
  VolMeasure measure = VolMeasure::Realized;
  std::size_t n = 0;
  double mean = 0;
  std::optional<double> std_error;        // empty when n == 1
  double diff_from_baseline = 0;          // mean - baseline mean
  std::optional<double> diff_t_stat;      // Welch; empty when either side has n < 2

  /// The t statistic, or DegenerateVarianceError when it is undefined.
  double t_stat() const {
    if (!diff_t_stat) throw DegenerateVarianceError("t statistic for '" + label + "' needs n >= 2 on both sides");
    return *diff_t_stat;
  }
};

inline std::vector<double> measure_series(std::span<const DailyVol> vols, VolMeasure m) {
  std::vector<double> out;
  out.reserve(vols.size());
  for (const auto& v : vols) out.push_back(measure_of(v, m));
  return out;
}

/// Mean, standard error and Welch-test difference against the baseline days.
inline PeriodVolSummary summarize_period(std::span<const DailyVol> vols, std::span<const DailyVol> baseline,
                                         std::string label = {},
                                         VolMeasure measure = VolMeasure::Realized) {
  if (vols.empty() || baseline.empty()) throw DomainError("summarize_period: empty day list");
  const auto x = measure_series(vols, measure);
  const auto b = measure_series(baseline, measure);
  PeriodVolSummary s;
  s.label = std::move(label);
  s.measure = measure;
  s.n = x.size();
  s.mean = stats::mean(x);
  if (x.size() >= 2) s.std_error = stats::standard_error(x);
  s.diff_from_baseline = s.mean - stats::mean(b);
  if (x.size() >= 2 && b.size() >= 2) s.diff_t_stat = stats::welch_t(x, b);
  return s;
}

}  // namespace ivol
