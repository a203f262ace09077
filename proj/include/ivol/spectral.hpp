// Intraday DFT amplitude spectra, period RMS averages and frequency-band tests.
#pragma once

#include "ivol/common.hpp"
#include "ivol/market_data.hpp"
#include "ivol/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace ivol {

inline constexpr int kFrequencies = kGridPoints / 2;  // 720
inline constexpr int kBandWidth = 240;

struct AmplitudeSpectrum {
  Date date;
  std::vector<double> amplitudes;  // index w-1 holds C(w), w = 1..720
};

namespace detail {

// cos/sin of 2*pi*m/N for m = 0..N-1; (w*k) mod N indexes the table so each
// term uses a correctly rounded twiddle instead of cos of a large argument.
struct Twiddles {
  std::vector<double> c, s;
  explicit Twiddles(int n) : c(static_cast<std::size_t>(n)), s(static_cast<std::size_t>(n)) {
    for (int m = 0; m < n; ++m) {
      const double th = 2.0 * std::numbers::pi * m / n;
      c[static_cast<std::size_t>(m)] = std::cos(th);
      s[static_cast<std::size_t>(m)] = std::sin(th);
    }
  }
};

inline const Twiddles& grid_twiddles() {
  static const Twiddles t(kGridPoints);
  return t;
}

}  // namespace detail

/// Direct-summation DFT of the 1441 raw log prices:
///   a(w) = 2/N sum_k P(k) cos(2 pi w k / N),  b(w) likewise with sin,
///   C(w) = hypot(a, b),  k = 1..N, w = 1..720.
inline std::vector<double> dft_amplitudes(std::span<const double> log_prices) {
  if (log_prices.size() != static_cast<std::size_t>(kGridPoints))
    throw ValidationError("DFT input must have 1441 log prices");
  const auto& tw = detail::grid_twiddles();
  const std::size_t n = kGridPoints;
  std::vector<double> amp(kFrequencies);
  for (std::size_t w = 1; w <= static_cast<std::size_t>(kFrequencies); ++w) {
    double a = 0, b = 0;
    std::size_t idx = w % n;  // (w * k) mod n for k = 1
    for (std::size_t k = 0; k < n; ++k) {
      a += log_prices[k] * tw.c[idx];
      b += log_prices[k] * tw.s[idx];
      idx += w;
      if (idx >= n) idx -= n;
    }
    amp[w - 1] = std::hypot(a, b) * 2.0 / static_cast<double>(n);
  }
  return amp;
}

inline AmplitudeSpectrum fourier_coefficients(const DayGrid& day) {
  return {day.date, dft_amplitudes(day.log_prices)};
}

inline std::vector<AmplitudeSpectrum> fourier_coefficients(std::span<const DayGrid> days) {
  std::vector<AmplitudeSpectrum> out;
  out.reserve(days.size());
  for (const auto& d : days) out.push_back(fourier_coefficients(d));
  return out;
}

/// Root-mean-square amplitude per frequency across the period's days.
inline std::vector<double> period_rms_amplitude(std::span<const AmplitudeSpectrum> spectra) {
  if (spectra.empty()) throw DomainError("period_rms_amplitude: no spectra in period");
  const std::size_t width = spectra.front().amplitudes.size();
  std::vector<double> sumsq(width, 0.0);
  for (const auto& s : spectra) {
    if (s.amplitudes.size() != width) throw ValidationError("spectra of unequal length");
    for (std::size_t w = 0; w < width; ++w) sumsq[w] += s.amplitudes[w] * s.amplitudes[w];
  }
  const double n = static_cast<double>(spectra.size());
  for (auto& v : sumsq) v = std::sqrt(v / n);
  return sumsq;
}

/// current(w) / baseline(w).
inline std::vector<double> change_ratios(std::span<const double> current, std::span<const double> baseline) {
  if (current.size() != baseline.size()) throw ValidationError("change_ratios: length mismatch");
  std::vector<double> out(current.size());
  for (std::size_t i = 0; i < current.size(); ++i) {
    if (!(baseline[i] > 0))
      throw DomainError("change_ratios: baseline amplitude at w=" + std::to_string(i + 1) + " is not positive");
    out[i] = current[i] / baseline[i];
  }
  return out;
}

//===========================================================================//
// Frequency bands                                                           //
//===========================================================================//
enum class Band { Low, Medium, High };

inline const char* to_string(Band b) {
  switch (b) {
    case Band::Low: return "low";
    case Band::Medium: return "medium";
    case Band::High: return "high";
  }
  return "?";
}

struct BandReport {
  Band band = Band::Low;
  int first_w = 0, last_w = 0;  // inclusive, 1-based
  double mean_change = 0;
  double t_stat = 0;            // one-sample t against 1
  std::size_t n = 0;
};

/// Mean change ratio and one-sample t (vs 1) for a run of frequencies.
inline BandReport band_test(std::span<const double> values, Band band = Band::Low, int first_w = 1) {
  BandReport r;
  r.band = band;
  r.first_w = first_w;
  r.last_w = first_w + static_cast<int>(values.size()) - 1;
  r.n = values.size();
  r.mean_change = stats::mean(values);
  r.t_stat = stats::one_sample_t(values, 1.0);
  return r;
}

/// Low (1-240), medium (241-480) and high (481-720) bands.
inline std::array<BandReport, 3> band_tests(std::span<const double> changes) {
  if (changes.size() != static_cast<std::size_t>(kFrequencies))
    throw ValidationError("band_tests needs 720 change ratios");
  std::array<BandReport, 3> out;
  const Band bands[] = {Band::Low, Band::Medium, Band::High};
  for (int i = 0; i < 3; ++i)
    out[static_cast<std::size_t>(i)] =
        band_test(changes.subspan(static_cast<std::size_t>(i * kBandWidth), kBandWidth), bands[i],
                  i * kBandWidth + 1);
  return out;
}

/// |popVar(P) - 0.5 sum C(w)^2| / max(popVar, eps): the DFT variance
/// decomposition for an odd-length real series. eps = rel_floor * max(1, mean^2)
/// keeps flat series, where both sides are rounding noise, at ~0.
inline double parseval_check(std::span<const double> log_prices, std::span<const double> amplitudes,
                             double rel_floor = 1e-12) {
  const double m = stats::mean(log_prices);
  const double pop_var = stats::population_variance(log_prices);
  double half_power = 0;
  for (double c : amplitudes) half_power += c * c;
  half_power *= 0.5;
  const double eps = rel_floor * std::max(1.0, m * m);
  return std::abs(pop_var - half_power) / std::max(pop_var, eps);
}

inline double parseval_check(const DayGrid& day, const AmplitudeSpectrum& spectrum) {
  return parseval_check(day.log_prices, spectrum.amplitudes);
}

}  // namespace ivol
