// Small descriptive and test statistics shared by the estimators.
#pragma once

#include "ivol/common.hpp"

#include <cmath>
#include <span>

namespace ivol::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of an empty sample");
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Unbiased (n - 1) sample variance.
inline double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw DegenerateVarianceError("sample variance needs at least two observations");
  const double m = mean(x);
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

/// Population (n) variance.
inline double population_variance(std::span<const double> x) {
  const double m = mean(x);
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size());
}

inline double standard_error(std::span<const double> x) {
  return std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

/// Welch's unequal-variance t statistic for mean(a) - mean(b).
inline double welch_t(std::span<const double> a, std::span<const double> b) {
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  const double diff = mean(a) - mean(b);
  if (va + vb == 0.0) {
    if (diff == 0.0) return 0.0;
    throw DegenerateVarianceError("Welch t: both samples have zero variance");
  }
  return diff / std::sqrt(va + vb);
}

/// One-sample t statistic of H0: mean == mu0.
inline double one_sample_t(std::span<const double> x, double mu0) {
  const double v = sample_variance(x);
  if (v == 0.0) throw DegenerateVarianceError("one-sample t: zero sample variance");
  return (mean(x) - mu0) / std::sqrt(v / static_cast<double>(x.size()));
}

}  // namespace ivol::stats
