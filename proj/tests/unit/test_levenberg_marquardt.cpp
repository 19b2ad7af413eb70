#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "upsq/levenberg_marquardt.hpp"

using namespace upsq;

namespace {

struct DecayData {
  std::vector<double> t;
  std::vector<double> y;
};

DecayData decay(double a, double b, double c, double noise, std::uint64_t seed) {
  DecayData d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, noise);
  for (int i = 0; i < 60; ++i) {
    const double t = 0.1 * i;
    d.t.push_back(t);
    d.y.push_back(a * std::exp(-b * t) + c + (noise > 0 ? n(rng) : 0.0));
  }
  return d;
}

LeastSquaresProblem decay_problem(const DecayData& d, bool analytic) {
  LeastSquaresProblem p;
  p.n_params = 3;
  p.n_residuals = d.t.size();
  p.lower = {-10, 0, -10};
  p.upper = {10, 10, 10};
  p.residuals = [&d](std::span<const double> x, std::span<double> r) {
    for (std::size_t i = 0; i < d.t.size(); ++i) r[i] = x[0] * std::exp(-x[1] * d.t[i]) + x[2] - d.y[i];
  };
  if (analytic) {
    p.jacobian = [&d](std::span<const double> x, std::span<double> j) {
      for (std::size_t i = 0; i < d.t.size(); ++i) {
        const double e = std::exp(-x[1] * d.t[i]);
        j[3 * i + 0] = e;
        j[3 * i + 1] = -x[0] * d.t[i] * e;
        j[3 * i + 2] = 1.0;
      }
    };
  }
  return p;
}

}  // namespace

TEST(LevenbergMarquardt, RecoversNoiselessDecay) {
  for (bool analytic : {true, false}) {
    const auto d = decay(2.5, 1.3, 0.4, 0.0, 0);
    const auto rep = minimize_least_squares(decay_problem(d, analytic), {1.0, 0.5, 0.0});
    EXPECT_TRUE(rep.converged) << to_string(rep.stop);
    EXPECT_NEAR(rep.params[0], 2.5, 1e-7);
    EXPECT_NEAR(rep.params[1], 1.3, 1e-7);
    EXPECT_NEAR(rep.params[2], 0.4, 1e-7);
  }
}

TEST(LevenbergMarquardt, AcceptedCostNeverIncreases) {
  const auto d = decay(2.5, 1.3, 0.4, 0.05, 3);
  const auto rep = minimize_least_squares(decay_problem(d, true), {-3.0, 8.0, 2.0});
  ASSERT_GE(rep.cost_history.size(), 2u);
  for (std::size_t i = 1; i < rep.cost_history.size(); ++i)
    EXPECT_LE(rep.cost_history[i], rep.cost_history[i - 1]);
  EXPECT_EQ(rep.cost, rep.cost_history.back());
}

TEST(LevenbergMarquardt, RespectsBoundsAndFixedParameters) {
  const auto d = decay(2.5, 1.3, 0.4, 0.0, 0);
  auto p = decay_problem(d, true);
  p.upper[1] = 1.0;  // true rate lies outside
  const auto rep = minimize_least_squares(p, {1.0, 0.5, 0.0});
  EXPECT_EQ(rep.params[1], 1.0);
  EXPECT_TRUE(rep.converged) << to_string(rep.stop);

  auto fixed = decay_problem(d, true);
  fixed.lower[2] = fixed.upper[2] = 0.4;
  const auto rep2 = minimize_least_squares(fixed, {1.0, 0.5, 0.4});
  EXPECT_EQ(rep2.params[2], 0.4);
  EXPECT_EQ(rep2.standard_errors[2], 0.0);
  EXPECT_NEAR(rep2.params[1], 1.3, 1e-7);
}

TEST(LevenbergMarquardt, StandardErrorsMatchOrdinaryLeastSquares) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 0.2);
  std::vector<double> t, y;
  for (int i = 0; i < 40; ++i) {
    t.push_back(i * 0.25);
    y.push_back(1.5 + 0.7 * t.back() + n(rng));
  }
  LeastSquaresProblem p;
  p.n_params = 2;
  p.n_residuals = t.size();
  p.lower = {-100, -100};
  p.upper = {100, 100};
  p.residuals = [&](std::span<const double> x, std::span<double> r) {
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = x[0] + x[1] * t[i] - y[i];
  };
  const auto rep = minimize_least_squares(p, {0.0, 0.0});

  // Closed-form OLS.
  const double nn = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double det = nn * stt - st * st;
  const double b = (nn * sty - st * sy) / det;
  const double a = (sy - b * st) / nn;
  double rss = 0;
  for (std::size_t i = 0; i < t.size(); ++i) rss += std::pow(a + b * t[i] - y[i], 2);
  const double s2 = rss / (nn - 2);
  EXPECT_NEAR(rep.params[0], a, 1e-8);
  EXPECT_NEAR(rep.params[1], b, 1e-8);
  EXPECT_NEAR(rep.standard_errors[0], std::sqrt(s2 * stt / det), 1e-6);
  EXPECT_NEAR(rep.standard_errors[1], std::sqrt(s2 * nn / det), 1e-6);
  EXPECT_FALSE(rep.rank_deficient);
}

TEST(LevenbergMarquardt, FlagsUnidentifiableDirections) {
  std::vector<double> t = {1, 2, 3, 4, 5, 6, 7, 8};
  LeastSquaresProblem p;
  p.n_params = 3;
  p.n_residuals = t.size();
  p.lower = {-10, -10, -10};
  p.upper = {10, 10, 10};
  p.residuals = [&](std::span<const double> x, std::span<double> r) {
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = (x[0] + x[1]) * t[i] + x[2] - (2.0 * t[i] + 1.0 + 0.01 * std::sin(i));
  };
  const auto rep = minimize_least_squares(p, {0.3, 0.1, 0.0});
  EXPECT_TRUE(rep.rank_deficient);
  EXPECT_TRUE(std::isinf(rep.standard_errors[0]));
  EXPECT_TRUE(std::isinf(rep.standard_errors[1]));
  EXPECT_TRUE(std::isfinite(rep.standard_errors[2]));
  EXPECT_NEAR(rep.params[0] + rep.params[1], 2.0, 1e-2);
}

TEST(LevenbergMarquardt, IterationCapReturnsBestSoFar) {
  const auto d = decay(2.5, 1.3, 0.4, 0.0, 0);
  LmOptions opt;
  opt.max_iterations = 2;
  const auto rep = minimize_least_squares(decay_problem(d, true), {-3.0, 8.0, 2.0}, opt);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.stop, LmStop::MaxIterations);
  EXPECT_LE(rep.iterations, 2);
  EXPECT_LE(rep.cost, rep.cost_history.front());
}
