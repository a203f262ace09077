#include "ivol/msgarch_fit.hpp"
#include "msgarch_oracle.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <random>

using namespace ivol;

namespace {

MsGarchParams separated_params() {
  MsGarchParams p;
  p.regime[0] = {0.02, 0.04, 0.06, 0.85, 7.0, 0.95};
  p.regime[1] = {0.60, 0.08, 0.10, 0.70, 5.0, 1.10};
  p.p11 = 0.99;
  p.p22 = 0.98;
  return p;
}

}  // namespace

TEST(Reparameterisation, RoundTripsInteriorPoints) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 50; ++i) {
    const auto p = oracle::random_params(rng);
    const auto x = encode_msgarch(p);
    const auto q = decode_msgarch(x.data());
    for (int k = 0; k < 2; ++k) {
      const auto& a = p.regime[static_cast<std::size_t>(k)];
      const auto& b = q.regime[static_cast<std::size_t>(k)];
      EXPECT_NEAR(a.omega, b.omega, 1e-12 * a.omega);
      EXPECT_NEAR(a.alpha, b.alpha, 1e-12);
      EXPECT_NEAR(a.gamma, b.gamma, 1e-12);
      EXPECT_NEAR(a.beta, b.beta, 1e-12);
      EXPECT_NEAR(a.nu, b.nu, 1e-10);
      EXPECT_NEAR(a.xi, b.xi, 1e-12);
    }
    EXPECT_NEAR(p.p11, q.p11, 1e-12);
    EXPECT_NEAR(p.p22, q.p22, 1e-12);
  }
}

TEST(Reparameterisation, AnyVectorDecodesToValidParameters) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z(0.0, 4.0);
  for (int i = 0; i < 500; ++i) {
    std::array<double, kMsGarchDim> x{};
    for (auto& v : x) v = z(rng);
    const auto p = decode_msgarch(x.data());
    for (const auto& g : p.regime) {
      EXPECT_GT(g.omega, 0);
      EXPECT_GE(g.alpha, 0);
      EXPECT_GE(g.alpha + g.gamma, -1e-15);
      EXPECT_GE(g.beta, 0);
      EXPECT_LT(persistence(g), 1.0);
      EXPECT_GT(g.nu, 2.0);
      EXPECT_GT(g.xi, 0.0);
    }
    EXPECT_GT(p.p11, 0);
    EXPECT_LT(p.p11, 1);
  }
}

TEST(Objective, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(12);
  const auto sim = simulate_msgarch(separated_params(), 400, 3);
  const MsGarchObjective obj(sim.returns, initial_variance(sim.returns));
  for (int trial = 0; trial < 10; ++trial) {
    auto x = encode_msgarch(oracle::random_params(rng));
    const auto g = obj.gradient(x.data());
    for (int i = 0; i < kMsGarchDim; ++i) {
      const double step = 1e-5 * std::max(1.0, std::abs(x[static_cast<std::size_t>(i)]));
      auto xp = x, xm = x;
      xp[static_cast<std::size_t>(i)] += step;
      xm[static_cast<std::size_t>(i)] -= step;
      const double fd = (obj.value(xp.data()) - obj.value(xm.data())) / (2 * step);
      const double gi = g[static_cast<std::size_t>(i)];
      EXPECT_NEAR(gi, fd, 1e-4 * std::max(std::abs(fd), 1e-2)) << "param " << i << " trial " << trial;
    }
  }
}

TEST(FitMsgarch, RecoversSeparatedRegimes) {
  const auto truth = separated_params();
  const auto sim = simulate_msgarch(truth, 4000, 77);
  const auto t0 = std::chrono::steady_clock::now();
  const auto fit = fit_msgarch(sim.returns);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  RecordProperty("fit_seconds", std::to_string(secs));
  EXPECT_TRUE(fit.converged);
  for (int k = 0; k < 2; ++k) {
    const double want = unconditional_variance(truth.regime[static_cast<std::size_t>(k)]);
    const double got = unconditional_variance(fit.params.regime[static_cast<std::size_t>(k)]);
    EXPECT_NEAR(got, want, 0.25 * want) << "regime " << k + 1;
  }
  std::size_t hits = 0;
  for (std::size_t t = 0; t < sim.returns.size(); ++t)
    hits += (fit.smoothed[t][1] > 0.5 ? 1 : 0) == sim.regimes[t] ? 1 : 0;
  EXPECT_GE(static_cast<double>(hits) / static_cast<double>(sim.returns.size()), 0.90);
  EXPECT_EQ(fit.start_log_likelihoods.size(), 8u);
  std::cout << "fit took " << secs << " s, loglik " << fit.log_likelihood << ", iterations " << fit.iterations << "\n";
}

TEST(FitMsgarch, RefitIsBitIdentical) {
  const auto sim = simulate_msgarch(separated_params(), 300, 5);
  const auto a = fit_msgarch(sim.returns), b = fit_msgarch(sim.returns);
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
  EXPECT_EQ(a.smoothed, b.smoothed);
  EXPECT_EQ(encode_msgarch(a.params), encode_msgarch(b.params));
  EXPECT_FALSE(a.warnings.empty() && sim.returns.size() < 100);
}

TEST(FitMsgarch, SingleRegimeDataIsNested) {
  MsGarchParams p;
  p.regime[0] = p.regime[1] = {0.1, 0.05, 0.08, 0.85, 6.0, 1.0};
  p.p11 = p.p22 = 0.9;
  const auto sim = simulate_msgarch(p, 1500, 9);
  const auto two = fit_msgarch(sim.returns);
  const auto one = fit_gjr(sim.returns);
  std::cout << "two-regime " << two.log_likelihood << " single " << one.log_likelihood << "\n";
  // Embedding the single-regime fit as two identical regimes reproduces its
  // likelihood for any transition probabilities.
  MsGarchParams nested;
  nested.regime[0] = nested.regime[1] = one.params;
  for (double q : {0.5, 0.9, 0.99}) {
    nested.p11 = q;
    nested.p22 = 1.4 - q;
    EXPECT_NEAR(hamilton_loglik(sim.returns, nested).log_likelihood, one.log_likelihood, 1e-4);
  }
  // The free two-regime fit can only do better.
  EXPECT_GE(two.log_likelihood, one.log_likelihood - 1e-4);
}

TEST(FitMsgarch, DegenerateInput) {
  EXPECT_THROW(fit_msgarch(std::vector<double>(200, 0.3)), DegenerateVarianceError);
  std::vector<double> r(200, 0.1);
  r[3] = NAN;
  EXPECT_THROW(fit_msgarch(r), DomainError);
}
