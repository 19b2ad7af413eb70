#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace upsq {

/// Box-constrained nonlinear least squares: minimize sum_i r_i(p)^2.
///
/// The Jacobian callback fills a row-major (n_residuals x n_params) buffer;
/// when absent, central differences are used. Parameters whose lower and
/// upper bounds coincide are held fixed.
struct LeastSquaresProblem {
  using ResidualFn = std::function<void(std::span<const double> params, std::span<double> residuals)>;
  using JacobianFn = std::function<void(std::span<const double> params, std::span<double> jacobian)>;

  std::size_t n_params = 0;
  std::size_t n_residuals = 0;
  ResidualFn residuals;
  JacobianFn jacobian;
  std::vector<double> lower;
  std::vector<double> upper;
  /// Typical magnitude of each parameter. Gradient tolerances and standard
  /// errors are evaluated in p / scale coordinates. Defaults to 1.
  std::vector<double> scale;
};

struct LmOptions {
  int max_iterations = 200;
  double rel_cost_tol = 1e-10;
  double gradient_tol = 1e-8;
  double initial_damping = 1e-3;
  /// Relative singular-value cutoff below which a direction counts as
  /// unidentifiable.
  double rank_tol = 1e-8;
};

enum class LmStop { GradientTolerance, CostTolerance, ZeroCost, MaxIterations, Stalled };

std::string_view to_string(LmStop stop) noexcept;

struct LmReport {
  std::vector<double> params;
  std::vector<double> residuals;
  double cost = 0.0;
  /// Projected gradient norm of the cost in scaled coordinates.
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  LmStop stop = LmStop::MaxIterations;
  /// Cost after every accepted step, starting with the initial cost.
  std::vector<double> cost_history;
  /// sqrt(diag(cov)) with cov = s^2 (J^T J)^+, s^2 = cost / (n - k). Infinite
  /// for parameters touching an unidentifiable direction, 0 for fixed ones.
  std::vector<double> standard_errors;
  bool rank_deficient = false;
};

/// Damped Gauss-Newton with Marquardt diagonal scaling. Trial points are
/// projected onto the bounds; a step is accepted only if it lowers the cost,
/// so the accepted cost sequence is non-increasing. Never throws on
/// non-convergence; returns the best point found.
LmReport minimize_least_squares(const LeastSquaresProblem& problem, std::vector<double> initial,
                                const LmOptions& options = {});

}  // namespace upsq
