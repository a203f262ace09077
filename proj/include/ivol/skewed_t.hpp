// Fernandez-Steel skewed Student-t, standardised to zero mean and unit variance.
//
// The symmetric kernel g is the Student-t rescaled to unit variance. Skewing
// stretches the positive half-line by xi and the negative one by 1/xi:
//     p(x) = 2 / (xi + 1/xi) * [ g(x / xi) 1{x >= 0} + g(x * xi) 1{x < 0} ],
// whose mean is m1 (xi - 1/xi) and variance (1 - m1^2)(xi^2 + xi^-2) + 2 m1^2 - 1
// with m1 = E|z| under g. The returned density is that of (x - mean) / sd.
//
// Everything is templated on the scalar so the same code evaluates doubles
// and ceres::Jet dual numbers for exact likelihood gradients.
#pragma once

#include "ivol/common.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ivol {

template <class T>
struct SkewedTConstants {
  T nu, xi;
  T nu_minus_2;
  T log_kernel_norm;  // log of the unit-variance Student-t normalising constant
  T mean;             // mean of the unstandardised skewed variable
  T sd;               // its standard deviation
  T log_front;        // log( 2 / (xi + 1/xi) * sd )

  SkewedTConstants(const T& nu_, const T& xi_) : nu(nu_), xi(xi_) {
    using std::exp;
    using std::lgamma;
    using std::log;
    using std::sqrt;
    nu_minus_2 = nu - T(2);
    const T half_nu = nu / T(2);
    const T half_nu1 = (nu + T(1)) / T(2);
    const T log_gamma_ratio = lgamma(half_nu1) - lgamma(half_nu);
    log_kernel_norm = log_gamma_ratio - T(0.5) * log(T(std::numbers::pi) * nu_minus_2);
    const T m1 = T(2) * sqrt(nu_minus_2) * exp(log_gamma_ratio) /
                 (T(std::sqrt(std::numbers::pi)) * (nu - T(1)));
    const T inv_xi = T(1) / xi;
    mean = m1 * (xi - inv_xi);
    const T var = (T(1) - m1 * m1) * (xi * xi + inv_xi * inv_xi) + T(2) * m1 * m1 - T(1);
    sd = sqrt(var);
    log_front = log(T(2) / (xi + inv_xi)) + log(sd);
  }

  /// log g(u) for the unit-variance symmetric kernel.
  T log_kernel(const T& u) const {
    using std::log1p;
    return log_kernel_norm - (nu + T(1)) / T(2) * log1p(u * u / nu_minus_2);
  }

  T log_density(const T& z) const {
    const T x = sd * z + mean;
    const T u = x >= T(0) ? x / xi : x * xi;
    return log_front + log_kernel(u);
  }
};

inline void check_skewed_t_domain(double nu, double xi) {
  if (!(nu > 2.0) || !std::isfinite(nu))
    throw DomainError("skewed Student-t needs nu > 2 (got " + std::to_string(nu) + ")");
  if (!(xi > 0.0) || !std::isfinite(xi))
    throw DomainError("skewed Student-t needs xi > 0 (got " + std::to_string(xi) + ")");
}

inline double skewed_t_log_density(double z, double nu, double xi) {
  check_skewed_t_domain(nu, xi);
  return SkewedTConstants<double>(nu, xi).log_density(z);
}

inline double skewed_t_density(double z, double nu, double xi) {
  return std::exp(skewed_t_log_density(z, nu, xi));
}

}  // namespace ivol
