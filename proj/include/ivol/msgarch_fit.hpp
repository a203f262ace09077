// Maximum-likelihood estimation of the two-regime skewed-t GJR model.
//
// The optimiser works on an unconstrained vector (14 entries); decode() maps it
// onto a parameter set that satisfies every constraint by construction:
//   omega = exp(x0)
//   (alpha/2, (alpha+gamma)/2, beta) = softmax(x1, x2, x3, 0)[0..2]
//     -> alpha >= 0, alpha + gamma >= 0, beta >= 0, alpha + gamma/2 + beta < 1
//   nu = 2 + exp(x4),  xi = exp(x5)
//   p11, p22 = logistic(x12), logistic(x13)
// Gradients are exact, from forward-mode dual numbers.
#pragma once

#include "ivol/common.hpp"
#include "ivol/msgarch.hpp"

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>
#include <ceres/jet.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ivol {

inline constexpr int kMsGarchDim = 14;
inline constexpr int kGjrDim = 6;

namespace msgarch_detail {

template <class T>
BasicGjrParams<T> decode_regime(const T* x) {
  using std::exp;
  BasicGjrParams<T> g;
  g.omega = exp(x[0]);
  const T e1 = exp(x[1]), e2 = exp(x[2]), e3 = exp(x[3]);
  const T denom = T(1) + e1 + e2 + e3;
  const T half_alpha = e1 / denom, half_alpha_gamma = e2 / denom;
  g.alpha = T(2) * half_alpha;
  g.gamma = T(2) * (half_alpha_gamma - half_alpha);
  g.beta = e3 / denom;
  g.nu = T(2) + exp(x[4]);
  g.xi = exp(x[5]);
  return g;
}

inline void encode_regime(const GjrParams& g, double* x) {
  const double w1 = g.alpha / 2, w2 = (g.alpha + g.gamma) / 2, w3 = g.beta;
  const double slack = 1.0 - w1 - w2 - w3;
  if (!(w1 > 0 && w2 > 0 && w3 > 0 && slack > 0 && g.omega > 0 && g.nu > 2 && g.xi > 0))
    throw DomainError("parameters lie on the boundary; cannot encode as an interior point");
  x[0] = std::log(g.omega);
  x[1] = std::log(w1 / slack);
  x[2] = std::log(w2 / slack);
  x[3] = std::log(w3 / slack);
  x[4] = std::log(g.nu - 2);
  x[5] = std::log(g.xi);
}

template <class T>
T logistic(const T& v) {
  using std::exp;
  return T(1) / (T(1) + exp(-v));
}

}  // namespace msgarch_detail

template <class T>
BasicMsGarchParams<T> decode_msgarch(const T* x) {
  BasicMsGarchParams<T> p;
  p.regime[0] = msgarch_detail::decode_regime(x);
  p.regime[1] = msgarch_detail::decode_regime(x + kGjrDim);
  p.p11 = msgarch_detail::logistic(x[12]);
  p.p22 = msgarch_detail::logistic(x[13]);
  return p;
}

inline std::array<double, kMsGarchDim> encode_msgarch(const MsGarchParams& p) {
  std::array<double, kMsGarchDim> x{};
  msgarch_detail::encode_regime(p.regime[0], x.data());
  msgarch_detail::encode_regime(p.regime[1], x.data() + kGjrDim);
  if (!(p.p11 > 0 && p.p11 < 1 && p.p22 > 0 && p.p22 < 1))
    throw DomainError("transition probabilities must lie in (0, 1)");
  x[12] = std::log(p.p11 / (1 - p.p11));
  x[13] = std::log(p.p22 / (1 - p.p22));
  return x;
}

//===========================================================================//
// Objectives: negative log-likelihood over the unconstrained vector.        //
//===========================================================================//
class MsGarchObjective final : public ceres::FirstOrderFunction {
public:
  MsGarchObjective(std::span<const double> returns, double h1) : returns_(returns), h1_(h1) {}

  bool Evaluate(const double* x, double* cost, double* gradient) const override {
    if (gradient == nullptr) {
      const double v = value(x);
      if (!std::isfinite(v)) return false;
      *cost = v;
      return true;
    }
    using Jet = ceres::Jet<double, kMsGarchDim>;
    std::array<Jet, kMsGarchDim> xj;
    for (int i = 0; i < kMsGarchDim; ++i) xj[static_cast<std::size_t>(i)] = Jet(x[i], i);
    const auto params = decode_msgarch(xj.data());
    const Jet nll = -hamilton_filter<Jet>(returns_, params, h1_, false).log_likelihood;
    if (!std::isfinite(nll.a) || !nll.v.allFinite()) return false;
    *cost = nll.a;
    for (int i = 0; i < kMsGarchDim; ++i) gradient[i] = nll.v[i];
    return true;
  }

  int NumParameters() const override { return kMsGarchDim; }

  double value(const double* x) const {
    const auto params = decode_msgarch(x);
    return -hamilton_filter<double>(returns_, params, h1_, false).log_likelihood;
  }

  std::array<double, kMsGarchDim> gradient(const double* x) const {
    std::array<double, kMsGarchDim> g{};
    double c = 0;
    if (!Evaluate(x, &c, g.data())) g.fill(std::numeric_limits<double>::quiet_NaN());
    return g;
  }

private:
  std::span<const double> returns_;
  double h1_;
};

/// Single-regime skewed-t GJR log-likelihood (same recursion and h1).
template <class T>
T gjr_loglik(std::span<const double> returns, const BasicGjrParams<T>& g, double h1) {
  const SkewedTConstants<T> dist(g.nu, g.xi);
  T h(h1), ll(0);
  for (std::size_t t = 0; t < returns.size(); ++t) {
    if (t > 0) {
      const double r = returns[t - 1];
      h = g.omega + (r < 0 ? g.alpha + g.gamma : g.alpha) * T(r * r) + g.beta * h;
    }
    ll += regime_log_density(returns[t], h, dist);
  }
  return ll;
}

class GjrObjective final : public ceres::FirstOrderFunction {
public:
  GjrObjective(std::span<const double> returns, double h1) : returns_(returns), h1_(h1) {}

  bool Evaluate(const double* x, double* cost, double* gradient) const override {
    if (gradient == nullptr) {
      const double v = -gjr_loglik(returns_, msgarch_detail::decode_regime(x), h1_);
      if (!std::isfinite(v)) return false;
      *cost = v;
      return true;
    }
    using Jet = ceres::Jet<double, kGjrDim>;
    std::array<Jet, kGjrDim> xj;
    for (int i = 0; i < kGjrDim; ++i) xj[static_cast<std::size_t>(i)] = Jet(x[i], i);
    const Jet nll = -gjr_loglik(returns_, msgarch_detail::decode_regime(xj.data()), h1_);
    if (!std::isfinite(nll.a) || !nll.v.allFinite()) return false;
    *cost = nll.a;
    for (int i = 0; i < kGjrDim; ++i) gradient[i] = nll.v[i];
    return true;
  }

  int NumParameters() const override { return kGjrDim; }

private:
  std::span<const double> returns_;
  double h1_;
};

//===========================================================================//
// Fitting                                                                   //
//===========================================================================//
struct FitConfig {
  int max_iterations = 1000;
  double function_tolerance = 1e-8;  // relative change in the objective
  double gradient_tolerance = 1e-10;
  double parameter_tolerance = 1e-10;
  /// Custom starting points; empty means default_starts().
  std::vector<MsGarchParams> starts;
};

struct MsGarchFit {
  MsGarchParams params;                        // regime 1 = lower unconditional variance
  double log_likelihood = 0;
  double h1 = 0;                               // initial conditional variance used
  std::vector<std::array<double, 2>> filtered;
  std::vector<std::array<double, 2>> smoothed;
  bool converged = false;
  int iterations = 0;
  std::size_t best_start = 0;
  std::vector<double> start_log_likelihoods;   // per start, NaN when it failed
  std::vector<std::string> warnings;
};

/// Eight fixed starting points spread over regime-variance splits,
/// persistence levels and regime durations, scaled by the sample variance.
inline std::vector<MsGarchParams> default_starts(double sample_var) {
  struct Shape {
    double low, high, persist, stay, nu;
  };
  static constexpr Shape shapes[8] = {
      {0.5, 2.0, 0.90, 0.95, 6.0},  {0.3, 3.0, 0.90, 0.98, 6.0},  {0.7, 1.5, 0.95, 0.95, 8.0},
      {0.2, 5.0, 0.80, 0.98, 5.0},  {0.5, 2.0, 0.97, 0.99, 10.0}, {0.4, 2.5, 0.70, 0.90, 4.0},
      {0.6, 1.8, 0.85, 0.99, 12.0}, {0.25, 4.0, 0.95, 0.97, 7.0},
  };
  std::vector<MsGarchParams> out;
  for (const auto& s : shapes) {
    MsGarchParams p;
    const double level[2] = {s.low * sample_var, s.high * sample_var};
    for (int k = 0; k < 2; ++k) {
      GjrParams& g = p.regime[static_cast<std::size_t>(k)];
      g.alpha = 0.05;
      g.gamma = 0.05;
      g.beta = s.persist - g.alpha - g.gamma / 2;
      g.omega = level[k] * (1 - s.persist);
      g.nu = s.nu;
      g.xi = 1.0;
    }
    p.p11 = s.stay;
    p.p22 = s.stay;
    out.push_back(p);
  }
  return out;
}

namespace msgarch_detail {

inline ceres::GradientProblemSolver::Options solver_options(const FitConfig& cfg) {
  ceres::GradientProblemSolver::Options opt;
  opt.line_search_direction_type = ceres::BFGS;
  opt.max_num_iterations = cfg.max_iterations;
  opt.function_tolerance = cfg.function_tolerance;
  opt.gradient_tolerance = cfg.gradient_tolerance;
  opt.parameter_tolerance = cfg.parameter_tolerance;
  opt.logging_type = ceres::SILENT;
  opt.minimizer_progress_to_stdout = false;
  return opt;
}

inline void check_fit_input(std::span<const double> returns, std::vector<std::string>& warnings) {
  if (returns.size() < 2) throw DomainError("fit needs at least two returns");
  for (std::size_t t = 0; t < returns.size(); ++t)
    if (!std::isfinite(returns[t])) throw DomainError("non-finite return at index " + std::to_string(t));
  if (returns.size() < 100)
    warnings.push_back("only " + std::to_string(returns.size()) + " returns; estimates are unreliable below 100");
  const bool constant = std::all_of(returns.begin(), returns.end(), [&](double r) { return r == returns.front(); });
  if (constant || !(stats::sample_variance(returns) > 0)) throw DegenerateVarianceError("returns have zero variance");
}

}  // namespace msgarch_detail

/// Multi-start BFGS maximum likelihood. Deterministic: starts are fixed and
/// the best objective wins, ties going to the lowest start index.
inline MsGarchFit fit_msgarch(std::span<const double> returns, const FitConfig& cfg = {}) {
  MsGarchFit fit;
  msgarch_detail::check_fit_input(returns, fit.warnings);
  fit.h1 = initial_variance(returns);
  const auto starts = cfg.starts.empty() ? default_starts(fit.h1) : cfg.starts;

  const ceres::GradientProblem problem(new MsGarchObjective(returns, fit.h1));
  const auto options = msgarch_detail::solver_options(cfg);

  double best = std::numeric_limits<double>::infinity();
  std::array<double, kMsGarchDim> best_x{};
  bool have_best = false;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    auto x = encode_msgarch(starts[i]);
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, x.data(), &summary);
    const bool usable = summary.IsSolutionUsable() && std::isfinite(summary.final_cost);
    fit.start_log_likelihoods.push_back(usable ? -summary.final_cost : std::numeric_limits<double>::quiet_NaN());
    if (usable && summary.final_cost < best) {
      best = summary.final_cost;
      best_x = x;
      have_best = true;
      fit.best_start = i;
      fit.converged = summary.termination_type == ceres::CONVERGENCE;
      fit.iterations = static_cast<int>(summary.iterations.size());
    }
  }
  if (!have_best) {
    fit.converged = false;
    fit.warnings.push_back("no starting point produced a usable solution");
    fit.params = starts.front();
  } else {
    fit.params = decode_msgarch(best_x.data());
  }
  if (unconditional_variance(fit.params.regime[1]) < unconditional_variance(fit.params.regime[0]))
    fit.params = swap_regimes(fit.params);

  auto filt = hamilton_filter<double>(returns, fit.params, fit.h1);
  fit.log_likelihood = filt.log_likelihood;
  fit.filtered = std::move(filt.filtered);
  fit.smoothed = kim_smoother(fit.filtered, fit.params);
  return fit;
}

struct GjrFit {
  GjrParams params;
  double log_likelihood = 0;
  bool converged = false;
};

/// Single-regime counterpart, used as the nested benchmark.
inline GjrFit fit_gjr(std::span<const double> returns, const FitConfig& cfg = {}) {
  std::vector<std::string> warnings;
  msgarch_detail::check_fit_input(returns, warnings);
  const double h1 = initial_variance(returns);
  const ceres::GradientProblem problem(new GjrObjective(returns, h1));
  const auto options = msgarch_detail::solver_options(cfg);
  GjrFit out;
  double best = std::numeric_limits<double>::infinity();
  for (double persist : {0.90, 0.97, 0.80}) {
    for (double nu : {6.0, 12.0}) {
      GjrParams g{h1 * (1 - persist), 0.05, 0.05, persist - 0.075, nu, 1.0};
      std::array<double, kGjrDim> x{};
      msgarch_detail::encode_regime(g, x.data());
      ceres::GradientProblemSolver::Summary summary;
      ceres::Solve(options, problem, x.data(), &summary);
      if (summary.IsSolutionUsable() && summary.final_cost < best) {
        best = summary.final_cost;
        out.params = msgarch_detail::decode_regime(x.data());
        out.converged = summary.termination_type == ceres::CONVERGENCE;
      }
    }
  }
  out.log_likelihood = gjr_loglik(returns, out.params, h1);
  return out;
}

}  // namespace ivol
