// Difference-in-differences regression of log volatility on period and
// treatment dummies.
#pragma once

#include "ivol/common.hpp"
#include "ivol/vol_estimators.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace ivol {

struct PanelRow {
  Date date;
  double log_sigma = 0;
  int period = 0;     // 1 = post-event period k, 0 = baseline
  int treatment = 0;  // 1 = treatment asset, 0 = control asset
  int interaction() const noexcept { return period * treatment; }
};

struct Panel {
  std::vector<PanelRow> rows;
  std::size_t excluded_treatment = 0;  // clamped / zero-sigma days dropped
  std::size_t excluded_control = 0;
};

/// Stacks baseline and period-k days of both assets into one pooled panel.
/// Days with sigma <= 0 (clamped) are dropped and counted. The caller passes
/// each asset's days already split by period.
inline Panel build_panel(std::span<const DailyVol> treatment_baseline, std::span<const DailyVol> treatment_period,
                         std::span<const DailyVol> control_baseline, std::span<const DailyVol> control_period,
                         VolMeasure measure = VolMeasure::Realized) {
  Panel p;
  auto add = [&](std::span<const DailyVol> days, int period, int treatment, std::size_t& excluded) {
    std::size_t kept = 0;
    for (const auto& d : days) {
      const double s = measure_of(d, measure);
      if (!(s > 0) || !std::isfinite(s)) {
        ++excluded;
        continue;
      }
      p.rows.push_back({d.date, std::log(s), period, treatment});
      ++kept;
    }
    return kept;
  };
  const std::size_t t = add(treatment_baseline, 0, 1, p.excluded_treatment) +
                        add(treatment_period, 1, 1, p.excluded_treatment);
  const std::size_t c = add(control_baseline, 0, 0, p.excluded_control) +
                        add(control_period, 1, 0, p.excluded_control);
  if (t == 0) throw EstimationError("treatment series has no usable days");
  if (c == 0) throw EstimationError("control series has no usable days");
  return p;
}

struct DdEstimate {
  // alpha, beta1 (period), beta2 (treatment), beta3 (period x treatment)
  std::array<double, 4> coef{};
  std::array<double, 4> std_error{};
  std::array<double, 4> t_stat{};
  std::size_t n_obs = 0;
  double residual_variance = 0;

  double alpha() const { return coef[0]; }
  double beta1() const { return coef[1]; }
  double beta2() const { return coef[2]; }
  double beta3() const { return coef[3]; }
};

inline const char* dd_cell_name(int period, int treatment) {
  static const char* names[2][2] = {{"control/baseline", "treatment/baseline"},
                                    {"control/period", "treatment/period"}};
  return names[period][treatment];
}

/// OLS with classical homoskedastic standard errors. Needs every
/// (period, treatment) cell populated and at least five rows.
inline DdEstimate estimate_dd(std::span<const PanelRow> panel) {
  std::array<std::array<std::size_t, 2>, 2> cells{};
  for (const auto& r : panel) ++cells[static_cast<std::size_t>(r.period)][static_cast<std::size_t>(r.treatment)];
  for (int per = 0; per < 2; ++per)
    for (int tr = 0; tr < 2; ++tr)
      if (cells[static_cast<std::size_t>(per)][static_cast<std::size_t>(tr)] == 0)
        throw EstimationError(std::string("rank-deficient design: empty cell ") + dd_cell_name(per, tr));
  const auto n = static_cast<Eigen::Index>(panel.size());
  if (n < 5) throw EstimationError("difference-in-differences needs at least 5 observations");

  Eigen::MatrixXd X(n, 4);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = panel[static_cast<std::size_t>(i)];
    X(i, 0) = 1.0;
    X(i, 1) = r.period;
    X(i, 2) = r.treatment;
    X(i, 3) = r.interaction();
    y(i) = r.log_sigma;
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * beta;

  DdEstimate est;
  est.n_obs = panel.size();
  est.residual_variance = resid.squaredNorm() / static_cast<double>(n - 4);
  // (X'X)^-1 = R^-1 R^-T with R the 4x4 upper factor.
  const Eigen::Matrix4d R = qr.matrixQR().topLeftCorner<4, 4>().triangularView<Eigen::Upper>();
  const Eigen::Matrix4d Rinv = R.inverse();
  const Eigen::Matrix4d xtx_inv = Rinv * Rinv.transpose();
  for (int j = 0; j < 4; ++j) {
    est.coef[static_cast<std::size_t>(j)] = beta(j);
    const double se = std::sqrt(est.residual_variance * xtx_inv(j, j));
    est.std_error[static_cast<std::size_t>(j)] = se;
    est.t_stat[static_cast<std::size_t>(j)] = se > 0 ? beta(j) / se : (beta(j) == 0 ? 0.0 : INFINITY);
  }
  return est;
}

}  // namespace ivol
