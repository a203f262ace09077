// Special functions missing from older ceres::Jet releases.
#pragma once

#include <boost/math/special_functions/digamma.hpp>
#include <ceres/jet.h>
#include <ceres/version.h>

#include <cmath>

#if CERES_VERSION_MAJOR < 2 || (CERES_VERSION_MAJOR == 2 && CERES_VERSION_MINOR < 2)
namespace ceres {

template <typename T, int N>
inline Jet<T, N> lgamma(const Jet<T, N>& x) {
  return Jet<T, N>(std::lgamma(x.a), boost::math::digamma(x.a) * x.v);
}

template <typename T, int N>
inline Jet<T, N> log1p(const Jet<T, N>& x) {
  return Jet<T, N>(std::log1p(x.a), x.v / (T(1) + x.a));
}

}  // namespace ceres
#endif
