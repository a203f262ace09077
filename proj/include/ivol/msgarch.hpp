// Two-regime Markov-switching GJR-GARCH with skewed Student-t innovations:
// variance recursions, Hamilton filter, Kim smoother and simulation.
//
// Each regime k carries its own variance path driven by the observed returns,
//     h_{k,t} = omega_k + (alpha_k + gamma_k 1{r_{t-1} < 0}) r_{t-1}^2 + beta_k h_{k,t-1},
// so the filter stays O(T) and matches exhaustive regime-path enumeration
// exactly. Both paths start from the same h_1.
#pragma once

#include "ivol/common.hpp"
#include "ivol/detail/jet_math.hpp"
#include "ivol/skewed_t.hpp"
#include "ivol/stats.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ivol {

template <class T>
struct BasicGjrParams {
  T omega{}, alpha{}, gamma{}, beta{};
  T nu{}, xi{};  // innovation tail and skew
};

template <class T>
struct BasicMsGarchParams {
  std::array<BasicGjrParams<T>, 2> regime{};
  T p11{}, p22{};  // probabilities of staying in regime 1 / regime 2
};

using GjrParams = BasicGjrParams<double>;
using MsGarchParams = BasicMsGarchParams<double>;

/// alpha + gamma/2 + beta.
inline double persistence(const GjrParams& p) { return p.alpha + p.gamma / 2 + p.beta; }

/// omega / (1 - persistence); infinite when the regime is not stationary.
inline double unconditional_variance(const GjrParams& p) {
  const double s = 1.0 - persistence(p);
  return s > 0 ? p.omega / s : std::numeric_limits<double>::infinity();
}

inline void validate(const GjrParams& p, const std::string& what = "regime") {
  if (!(p.omega > 0)) throw DomainError(what + ": omega must be > 0");
  if (!(p.alpha >= 0)) throw DomainError(what + ": alpha must be >= 0");
  if (!(p.beta >= 0 && p.beta < 1)) throw DomainError(what + ": beta must lie in [0, 1)");
  if (!(p.alpha + p.gamma >= 0)) throw DomainError(what + ": alpha + gamma must be >= 0");
  if (!(persistence(p) < 1)) throw DomainError(what + ": alpha + gamma/2 + beta must be < 1");
  check_skewed_t_domain(p.nu, p.xi);
}

/// `closed_probs` admits p11/p22 in [0, 1] (simulation); estimation needs (0, 1).
inline void validate(const MsGarchParams& p, bool closed_probs = false) {
  validate(p.regime[0], "regime 1");
  validate(p.regime[1], "regime 2");
  auto ok = [&](double q) { return closed_probs ? (q >= 0 && q <= 1) : (q > 0 && q < 1); };
  if (!ok(p.p11) || !ok(p.p22))
    throw DomainError(closed_probs ? "transition probabilities must lie in [0, 1]"
                                   : "transition probabilities must lie in (0, 1)");
}

/// Exchanges regime labels (and p11 <-> p22).
template <class T>
BasicMsGarchParams<T> swap_regimes(const BasicMsGarchParams<T>& p) {
  BasicMsGarchParams<T> q;
  q.regime = {p.regime[1], p.regime[0]};
  q.p11 = p.p22;
  q.p22 = p.p11;
  return q;
}

/// Stationary probabilities of the two-state chain.
template <class T>
std::array<T, 2> stationary_distribution(const T& p11, const T& p22) {
  const T leave1 = T(1) - p11, leave2 = T(1) - p22;
  const T total = leave1 + leave2;
  if (total == T(0)) return {T(0.5), T(0.5)};  // both absorbing: undefined, split evenly
  return {leave2 / total, leave1 / total};
}

//===========================================================================//
// GJR variance path                                                         //
//===========================================================================//
template <class T>
std::vector<T> gjr_variance_path(std::span<const double> returns, const BasicGjrParams<T>& p, const T& h1) {
  std::vector<T> h(returns.size());
  if (returns.empty()) return h;
  h[0] = h1;
  for (std::size_t t = 1; t < returns.size(); ++t) {
    const double r = returns[t - 1];
    if (!std::isfinite(r)) throw DomainError("non-finite return at index " + std::to_string(t - 1));
    const T arch = r < 0 ? p.alpha + p.gamma : p.alpha;
    h[t] = p.omega + arch * T(r * r) + p.beta * h[t - 1];
  }
  if (!std::isfinite(returns.back())) throw DomainError("non-finite return at index " + std::to_string(returns.size() - 1));
  return h;
}

inline std::vector<double> gjr_variance_path(std::span<const double> returns, const GjrParams& p, double h1) {
  if (!(h1 > 0)) throw DomainError("initial variance must be > 0");
  if (!(p.omega > 0 && p.alpha >= 0 && p.beta >= 0 && p.alpha + p.gamma >= 0))
    throw DomainError("GJR parameters violate positivity");
  return gjr_variance_path<double>(returns, p, h1);
}

/// log f(r | h) for a return with conditional variance h under regime innovations.
template <class T>
T regime_log_density(double r, const T& h, const SkewedTConstants<T>& dist) {
  using std::log;
  using std::sqrt;
  const T sd = sqrt(h);
  return dist.log_density(T(r) / sd) - log(sd);
}

//===========================================================================//
// Hamilton filter                                                           //
//===========================================================================//
template <class T>
struct BasicFilterResult {
  T log_likelihood{};
  std::vector<std::array<T, 2>> predicted;  // P(s_t | r_1..r_{t-1})
  std::vector<std::array<T, 2>> filtered;   // P(s_t | r_1..r_t)
};

using FilterResult = BasicFilterResult<double>;

/// Forward filter in log space. Initial regime distribution is the chain's
/// stationary distribution; both variance paths start at h1.
template <class T>
BasicFilterResult<T> hamilton_filter(std::span<const double> returns, const BasicMsGarchParams<T>& p, double h1,
                                     bool keep_probabilities = true) {
  using std::exp;
  using std::log;
  const std::size_t n = returns.size();
  BasicFilterResult<T> out;
  if (keep_probabilities) {
    out.predicted.resize(n);
    out.filtered.resize(n);
  }
  const SkewedTConstants<T> dist[2] = {SkewedTConstants<T>(p.regime[0].nu, p.regime[0].xi),
                                       SkewedTConstants<T>(p.regime[1].nu, p.regime[1].xi)};
  std::array<T, 2> h = {T(h1), T(h1)};
  std::array<T, 2> pred = stationary_distribution(p.p11, p.p22);
  T loglik(0);
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      const double r = returns[t - 1];
      for (int k = 0; k < 2; ++k) {
        const auto& g = p.regime[static_cast<std::size_t>(k)];
        const T arch = r < 0 ? g.alpha + g.gamma : g.alpha;
        h[static_cast<std::size_t>(k)] = g.omega + arch * T(r * r) + g.beta * h[static_cast<std::size_t>(k)];
      }
    }
    const double r = returns[t];
    if (!std::isfinite(r)) throw DomainError("non-finite return at index " + std::to_string(t));
    const T a = log(pred[0]) + regime_log_density(r, h[0], dist[0]);
    const T b = log(pred[1]) + regime_log_density(r, h[1], dist[1]);
    const T m = a > b ? a : b;
    const T log_lt = m + log(exp(a - m) + exp(b - m));
    loglik += log_lt;
    const std::array<T, 2> filt = {exp(a - log_lt), exp(b - log_lt)};
    if (keep_probabilities) {
      out.predicted[t] = pred;
      out.filtered[t] = filt;
    }
    pred = {filt[0] * p.p11 + filt[1] * (T(1) - p.p22), filt[0] * (T(1) - p.p11) + filt[1] * p.p22};
  }
  out.log_likelihood = loglik;
  return out;
}

/// Sample variance, the default initial conditional variance.
inline double initial_variance(std::span<const double> returns) {
  if (returns.size() < 2) throw DomainError("need at least two returns");
  return stats::sample_variance(returns);
}

struct LogLikResult {
  double log_likelihood = 0;
  std::vector<std::array<double, 2>> filtered;
};

inline LogLikResult hamilton_loglik(std::span<const double> returns, const MsGarchParams& p,
                                    std::optional<double> h1 = std::nullopt) {
  validate(p);
  if (returns.size() < 2) throw DomainError("hamilton_loglik needs T >= 2");
  auto res = hamilton_filter<double>(returns, p, h1 ? *h1 : initial_variance(returns));
  return {res.log_likelihood, std::move(res.filtered)};
}

//===========================================================================//
// Kim smoother                                                              //
//===========================================================================//
/// Backward pass: P(s_t = i | all data) =
///   filt_t(i) * sum_j P_ij * smooth_{t+1}(j) / pred_{t+1}(j).
inline std::vector<std::array<double, 2>> kim_smoother(std::span<const std::array<double, 2>> filtered,
                                                       double p11, double p22) {
  for (std::size_t t = 0; t < filtered.size(); ++t) {
    const auto& f = filtered[t];
    if (!(f[0] >= 0 && f[1] >= 0) || std::abs(f[0] + f[1] - 1.0) > 1e-9)
      throw ValidationError("filtered probabilities at t=" + std::to_string(t) + " are not a distribution");
  }
  const std::size_t n = filtered.size();
  std::vector<std::array<double, 2>> smooth(n);
  if (n == 0) return smooth;
  smooth[n - 1] = filtered[n - 1];
  const double P[2][2] = {{p11, 1.0 - p11}, {1.0 - p22, p22}};
  for (std::size_t t = n - 1; t-- > 0;) {
    const auto& f = filtered[t];
    const std::array<double, 2> pred = {f[0] * P[0][0] + f[1] * P[1][0], f[0] * P[0][1] + f[1] * P[1][1]};
    std::array<double, 2> ratio{};
    for (int j = 0; j < 2; ++j)
      ratio[static_cast<std::size_t>(j)] =
          pred[static_cast<std::size_t>(j)] > 0 ? smooth[t + 1][static_cast<std::size_t>(j)] / pred[static_cast<std::size_t>(j)] : 0.0;
    std::array<double, 2> s = {f[0] * (P[0][0] * ratio[0] + P[0][1] * ratio[1]),
                               f[1] * (P[1][0] * ratio[0] + P[1][1] * ratio[1])};
    const double total = s[0] + s[1];
    smooth[t] = total > 0 ? std::array<double, 2>{s[0] / total, s[1] / total} : f;
  }
  return smooth;
}

inline std::vector<std::array<double, 2>> kim_smoother(std::span<const std::array<double, 2>> filtered,
                                                       const MsGarchParams& p) {
  return kim_smoother(filtered, p.p11, p.p22);
}

//===========================================================================//
// Simulation                                                                //
//===========================================================================//
struct Simulation {
  std::vector<double> returns;
  std::vector<int> regimes;  // 0 = regime 1, 1 = regime 2
};

/// Draws one standardised skewed-t innovation.
template <class Rng>
double draw_skewed_t(Rng& rng, const SkewedTConstants<double>& dist) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(dist.nu);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // Unit-variance symmetric t, folded, then placed on the stretched side.
  const double t = normal(rng) / std::sqrt(chi2(rng) / dist.nu) * std::sqrt(dist.nu_minus_2 / dist.nu);
  const double mag = std::abs(t);
  const double p_pos = dist.xi * dist.xi / (1.0 + dist.xi * dist.xi);
  const double x = unif(rng) < p_pos ? mag * dist.xi : -mag / dist.xi;
  return (x - dist.mean) / dist.sd;
}

/// Simulates T returns and the latent regime path. The first regime is drawn
/// from the stationary distribution unless `initial_regime` (0 or 1) is given;
/// each regime's variance path starts at its unconditional variance.
inline Simulation simulate_msgarch(const MsGarchParams& p, std::size_t T, std::uint64_t seed,
                                   std::optional<int> initial_regime = std::nullopt) {
  validate(p, /*closed_probs=*/true);
  if (T == 0) throw DomainError("simulation length must be >= 1");
  if (initial_regime && *initial_regime != 0 && *initial_regime != 1)
    throw DomainError("initial regime must be 0 or 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const SkewedTConstants<double> dist[2] = {{p.regime[0].nu, p.regime[0].xi}, {p.regime[1].nu, p.regime[1].xi}};
  std::array<double, 2> h = {unconditional_variance(p.regime[0]), unconditional_variance(p.regime[1])};

  Simulation sim;
  sim.returns.resize(T);
  sim.regimes.resize(T);
  int s = 0;
  if (initial_regime) {
    s = *initial_regime;
  } else {
    const auto pi = stationary_distribution(p.p11, p.p22);
    s = unif(rng) < pi[0] ? 0 : 1;
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      const double stay = s == 0 ? p.p11 : p.p22;
      if (!(unif(rng) < stay)) s = 1 - s;
      const double r = sim.returns[t - 1];
      for (std::size_t k = 0; k < 2; ++k) {
        const auto& g = p.regime[k];
        h[k] = g.omega + (r < 0 ? g.alpha + g.gamma : g.alpha) * r * r + g.beta * h[k];
      }
    }
    sim.regimes[t] = s;
    sim.returns[t] = std::sqrt(h[static_cast<std::size_t>(s)]) * draw_skewed_t(rng, dist[s]);
  }
  return sim;
}

}  // namespace ivol
