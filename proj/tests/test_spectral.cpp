#include "ivol/spectral.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace ivol;

namespace {

std::vector<double> cosine_grid(int w0, double amplitude, double offset = 0.0, double phase = 0.0) {
  std::vector<double> p(1441);
  for (int k = 1; k <= 1441; ++k)
    p[static_cast<std::size_t>(k - 1)] =
        offset + amplitude * std::cos(2.0 * std::numbers::pi * w0 * k / 1441.0 + phase);
  return p;
}

std::vector<double> random_log_grid(std::mt19937_64& rng, double start = std::log(8000.0), double vol = 1e-3) {
  std::normal_distribution<double> z(0.0, vol);
  std::vector<double> p(1441);
  double x = start;
  for (auto& v : p) {
    v = x;
    x += z(rng);
  }
  return p;
}

// Independent oracle: direct cos/sin of the full argument in long double.
std::vector<double> oracle_amplitudes(const std::vector<double>& p) {
  std::vector<double> out(720);
  for (int w = 1; w <= 720; ++w) {
    long double a = 0, b = 0;
    for (int k = 1; k <= 1441; ++k) {
      const long double th = 2.0L * std::numbers::pi_v<long double> * w * k / 1441.0L;
      a += p[static_cast<std::size_t>(k - 1)] * std::cos(th);
      b += p[static_cast<std::size_t>(k - 1)] * std::sin(th);
    }
    a *= 2.0L / 1441.0L;
    b *= 2.0L / 1441.0L;
    out[static_cast<std::size_t>(w - 1)] = static_cast<double>(std::sqrt(a * a + b * b));
  }
  return out;
}

}  // namespace

TEST(Dft, ConstantSignalHasNoPower) {
  const auto amp = dft_amplitudes(std::vector<double>(1441, std::log(6000.0)));
  for (double c : amp) EXPECT_LT(c, 1e-12);
}

TEST(Dft, PureCosineSelectsItsFrequency) {
  const auto amp = dft_amplitudes(cosine_grid(5, 1.0));
  for (int w = 1; w <= 720; ++w) {
    if (w == 5)
      EXPECT_NEAR(amp[4], 1.0, 1e-10);
    else
      EXPECT_LT(amp[static_cast<std::size_t>(w - 1)], 1e-10) << "w=" << w;
  }
}

TEST(Dft, MatchesLongDoubleOracle) {
  std::mt19937_64 rng(31);
  const auto p = random_log_grid(rng);
  const auto amp = dft_amplitudes(p);
  const auto ref = oracle_amplitudes(p);
  for (std::size_t w = 0; w < 720; ++w) EXPECT_NEAR(amp[w], ref[w], 1e-12) << "w=" << w + 1;
}

TEST(Dft, LinearAndTranslationInvariant) {
  std::mt19937_64 rng(32);
  const auto p = random_log_grid(rng);
  const auto amp = dft_amplitudes(p);
  auto doubled = p, shifted = p;
  for (auto& v : doubled) v *= 2.0;
  for (auto& v : shifted) v += 3.7;
  const auto a2 = dft_amplitudes(doubled), as = dft_amplitudes(shifted);
  for (std::size_t w = 0; w < 720; ++w) {
    EXPECT_NEAR(a2[w], 2.0 * amp[w], 1e-14);
    EXPECT_NEAR(as[w], amp[w], 1e-10);
  }
}

TEST(Parseval, ConstantAndSinusoid) {
  const std::vector<double> flat(1441, 4.2);
  EXPECT_LT(parseval_check(flat, dft_amplitudes(flat)), 1e-12);
  // Amplitude A at an integer frequency: popVar = A^2/2 = C^2/2.
  const auto s = cosine_grid(17, 0.3, 9.0, 0.4);
  const auto amp = dft_amplitudes(s);
  EXPECT_NEAR(amp[16], 0.3, 1e-12);
  EXPECT_LT(parseval_check(s, amp), 1e-10);
}

TEST(Parseval, RandomDays) {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_log_grid(rng, std::log(100.0 + 100.0 * i), 1e-3 * (1 + i % 5));
    EXPECT_LT(parseval_check(p, dft_amplitudes(p)), 1e-9);
  }
}

TEST(PeriodRms, Formula) {
  AmplitudeSpectrum a{Date(1), std::vector<double>(720, 3.0)};
  AmplitudeSpectrum b{Date(2), std::vector<double>(720, 4.0)};
  const std::vector<AmplitudeSpectrum> one{a}, two{a, b}, same{a, a, a};
  EXPECT_EQ(period_rms_amplitude(one), a.amplitudes);
  EXPECT_NEAR(period_rms_amplitude(two)[100], std::sqrt(12.5), 1e-15);
  EXPECT_NEAR(period_rms_amplitude(two)[100], 3.53553, 1e-5);
  for (double v : period_rms_amplitude(same)) EXPECT_DOUBLE_EQ(v, 3.0);
  EXPECT_THROW(period_rms_amplitude(std::vector<AmplitudeSpectrum>{}), DomainError);
}

TEST(ChangeRatios, Basics) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<double> x(720), y(720);
  for (auto& v : x) v = u(rng);
  for (auto& v : y) v = u(rng);
  for (double r : change_ratios(x, x)) EXPECT_EQ(r, 1.0);
  std::vector<double> half(x);
  for (auto& v : half) v *= 0.5;
  for (double r : change_ratios(half, x)) EXPECT_DOUBLE_EQ(r, 0.5);
  const auto q = change_ratios(y, x);
  for (std::size_t i = 0; i < 720; ++i) EXPECT_NEAR(q[i], y[i] / x[i], 1e-15 * q[i]);
  x[41] = 0.0;
  try {
    change_ratios(y, x);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("w=42"), std::string::npos);
  }
}

TEST(BandTests, MeanOneGivesZeroT) {
  std::vector<double> c(720);
  const double pattern[3] = {0.9, 1.0, 1.1};
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = pattern[i % 3];
  const auto bands = band_tests(c);
  for (const auto& b : bands) {
    EXPECT_EQ(b.n, 240u);
    EXPECT_NEAR(b.mean_change, 1.0, 1e-14);
    EXPECT_NEAR(b.t_stat, 0.0, 1e-10);
  }
  EXPECT_EQ(bands[0].first_w, 1);
  EXPECT_EQ(bands[1].first_w, 241);
  EXPECT_EQ(bands[2].last_w, 720);
}

TEST(BandTests, MiniatureHandComputation) {
  const std::vector<double> v = {1.2, 1.1, 1.3};
  const auto r = band_test(v);
  EXPECT_NEAR(r.mean_change, 1.2, 1e-15);
  EXPECT_NEAR(r.t_stat, 0.2 / (0.1 / std::sqrt(3.0)), 1e-12);
  EXPECT_NEAR(r.t_stat, 3.4641, 1e-4);
}

TEST(BandTests, AllOnesIsDegenerate) {
  EXPECT_THROW(band_tests(std::vector<double>(720, 1.0)), DegenerateVarianceError);
  EXPECT_THROW(band_tests(std::vector<double>(719, 1.1)), ValidationError);
}
