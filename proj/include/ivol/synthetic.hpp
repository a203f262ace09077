// Synthetic minute bars for exercising the pipeline without exchange data.
#pragma once

#include "ivol/common.hpp"
#include "ivol/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ivol {

struct SyntheticConfig {
  // One factor per scheme period. Empty means all 1.
  std::vector<double> treatment_multipliers;
  std::vector<double> control_multipliers;
  double correlation = 0.5;       // between treatment and control shocks
  double minute_vol = 8e-4;       // log-return sd per minute at multiplier 1
  double daily_dispersion = 0.2;  // sd of the shared log daily vol factor
  int substeps = 6;               // path points per minute for high/low
  double treatment_start = 10000.0;
  double control_start = 300.0;
  std::uint64_t seed = 1;

  void validate(std::size_t n_periods) const {
    for (const auto* m : {&treatment_multipliers, &control_multipliers}) {
      if (!m->empty() && m->size() != n_periods)
        throw ConfigError("expected " + std::to_string(n_periods) + " volatility multipliers, got " +
                          std::to_string(m->size()));
      for (double v : *m)
        if (!(v > 0) || !std::isfinite(v)) throw ConfigError("volatility multipliers must be positive");
    }
    if (!(correlation >= -1 && correlation <= 1)) throw ConfigError("correlation must lie in [-1, 1]");
    if (!(minute_vol > 0) || !(daily_dispersion >= 0)) throw ConfigError("volatility scales must be positive");
    if (substeps < 1) throw ConfigError("substeps must be at least 1");
    if (!(treatment_start > 0) || !(control_start > 0)) throw ConfigError("start prices must be positive");
  }
};

struct SyntheticData {
  std::vector<MinuteBar> treatment, control;
};

/// Correlated geometric random walks covering every civil minute from the
/// first period's start to the last period's end in the scheme's zone.
inline SyntheticData generate_synthetic(const PeriodScheme& scheme, const SyntheticConfig& cfg) {
  scheme.validate();
  cfg.validate(scheme.periods.size());
  auto factor = [&](const std::vector<double>& m, std::optional<std::size_t> p) {
    return m.empty() || !p ? 1.0 : m[*p];
  };

  const Date first = scheme.periods.front().start, last = scheme.periods.back().end;
  // Local midnight of `first` is within a day of UTC midnight.
  std::int64_t t = (first.days_since_epoch() - 1) * 86400;
  while (scheme.timezone.civil_date(t) < first) t += 60;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double rho = cfg.correlation, rho_c = std::sqrt(1 - rho * rho);
  const double sub = 1.0 / std::sqrt(static_cast<double>(cfg.substeps));

  SyntheticData out;
  const auto n_days = static_cast<std::size_t>(last - first + 1);
  out.treatment.reserve(n_days * kMinutesPerDay);
  out.control.reserve(n_days * kMinutesPerDay);

  double lt = std::log(cfg.treatment_start), lc = std::log(cfg.control_start);
  Date day = first;
  double day_factor = 1, st = 0, sc = 0;
  bool fresh_day = true;
  for (;; t += 60) {
    const Date d = scheme.timezone.civil_date(t);
    if (last < d) break;
    if (fresh_day || d != day) {
      day = d;
      fresh_day = false;
      const double e = cfg.daily_dispersion;
      day_factor = std::exp(e * z(rng) - 0.5 * e * e);
      const auto p = scheme.period_of(d);
      st = cfg.minute_vol * day_factor * factor(cfg.treatment_multipliers, p) * sub;
      sc = cfg.minute_vol * day_factor * factor(cfg.control_multipliers, p) * sub;
    }
    const double ot = lt, oc = lc;
    double ht = lt, mt = lt, hc = lc, mc = lc;
    for (int s = 0; s < cfg.substeps; ++s) {
      const double a = z(rng), b = z(rng);
      lt += st * a - 0.5 * st * st;
      lc += sc * (rho * a + rho_c * b) - 0.5 * sc * sc;
      ht = std::max(ht, lt);
      mt = std::min(mt, lt);
      hc = std::max(hc, lc);
      mc = std::min(mc, lc);
    }
    out.treatment.push_back({t, std::exp(ot), std::exp(ht), std::exp(mt), std::exp(lt)});
    out.control.push_back({t, std::exp(oc), std::exp(hc), std::exp(mc), std::exp(lc)});
  }
  return out;
}

/// Writes treatment.csv and control.csv into `dir`; returns their paths.
inline std::pair<std::filesystem::path, std::filesystem::path> write_synthetic(const SyntheticData& data,
                                                                               const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto tp = dir / "treatment.csv", cp = dir / "control.csv";
  for (const auto& [path, bars] : {std::pair{tp, &data.treatment}, std::pair{cp, &data.control}}) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    write_bars(f, *bars);
    if (!f) throw Error("failed writing " + path.string());
  }
  return {tp, cp};
}

}  // namespace ivol
