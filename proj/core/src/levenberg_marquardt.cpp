#include "upsq/levenberg_marquardt.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "upsq/error.hpp"

namespace upsq {

std::string_view to_string(LmStop stop) noexcept {
  switch (stop) {
    case LmStop::GradientTolerance: return "gradient-tolerance";
    case LmStop::CostTolerance: return "relative-cost-tolerance";
    case LmStop::ZeroCost: return "zero-cost";
    case LmStop::MaxIterations: return "max-iterations";
    case LmStop::Stalled: return "stalled";
  }
  return "unknown";
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Evaluator {
 public:
  explicit Evaluator(const LeastSquaresProblem& p) : p_(p) {}

  Eigen::VectorXd residuals(const std::vector<double>& x) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(p_.n_residuals));
    p_.residuals(x, std::span<double>(r.data(), p_.n_residuals));
    return r;
  }

  RowMatrix jacobian(const std::vector<double>& x) const {
    RowMatrix j(static_cast<Eigen::Index>(p_.n_residuals), static_cast<Eigen::Index>(p_.n_params));
    if (p_.jacobian) {
      p_.jacobian(x, std::span<double>(j.data(), p_.n_residuals * p_.n_params));
      return j;
    }
    std::vector<double> xp = x;
    for (std::size_t c = 0; c < p_.n_params; ++c) {
      const double h = 1e-6 * std::max(std::abs(x[c]), scale(c));
      // One-sided at a bound so the probe stays feasible.
      const double hi = std::min(x[c] + h, p_.upper[c]);
      const double lo = std::max(x[c] - h, p_.lower[c]);
      if (hi <= lo) {
        j.col(static_cast<Eigen::Index>(c)).setZero();
        continue;
      }
      xp[c] = hi;
      const Eigen::VectorXd rp = residuals(xp);
      xp[c] = lo;
      const Eigen::VectorXd rm = residuals(xp);
      xp[c] = x[c];
      j.col(static_cast<Eigen::Index>(c)) = (rp - rm) / (hi - lo);
    }
    return j;
  }

  double scale(std::size_t i) const { return p_.scale.empty() ? 1.0 : p_.scale[i]; }

 private:
  const LeastSquaresProblem& p_;
};

// Gradient of sum r^2 in scaled coordinates with components that push into an
// active bound removed.
double projected_gradient_norm(const Eigen::VectorXd& grad, const std::vector<double>& x,
                               const LeastSquaresProblem& p, const std::vector<bool>& free,
                               const Evaluator& ev) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!free[i]) continue;
    const double g = grad[static_cast<Eigen::Index>(i)] * ev.scale(i);
    const bool at_lower = x[i] <= p.lower[i];
    const bool at_upper = x[i] >= p.upper[i];
    if ((at_lower && g > 0.0) || (at_upper && g < 0.0)) continue;
    sum += g * g;
  }
  return std::sqrt(sum);
}

void fill_standard_errors(LmReport& report, const RowMatrix& jac, const std::vector<bool>& free,
                          const Evaluator& ev, const LmOptions& options) {
  const std::size_t n_params = free.size();
  report.standard_errors.assign(n_params, 0.0);
  std::vector<Eigen::Index> cols;
  for (std::size_t i = 0; i < n_params; ++i)
    if (free[i]) cols.push_back(static_cast<Eigen::Index>(i));
  if (cols.empty()) return;

  const auto k = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd js(jac.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c)
    js.col(c) = jac.col(cols[static_cast<std::size_t>(c)]) * ev.scale(static_cast<std::size_t>(cols[static_cast<std::size_t>(c)]));

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(js, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  const double dof = std::max<double>(1.0, static_cast<double>(jac.rows()) - static_cast<double>(k));
  const double sigma2 = report.cost / dof;

  std::vector<bool> touches_null(static_cast<std::size_t>(k), false);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(k);
  for (Eigen::Index j = 0; j < sv.size(); ++j) {
    const bool singular = smax <= 0.0 || sv[j] <= options.rank_tol * smax;
    if (singular) {
      report.rank_deficient = true;
      for (Eigen::Index i = 0; i < k; ++i)
        if (std::abs(v(i, j)) > 1e-6) touches_null[static_cast<std::size_t>(i)] = true;
      continue;
    }
    var += v.col(j).cwiseAbs2() / (sv[j] * sv[j]);
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto col = static_cast<std::size_t>(cols[static_cast<std::size_t>(i)]);
    report.standard_errors[col] = touches_null[static_cast<std::size_t>(i)]
                                      ? std::numeric_limits<double>::infinity()
                                      : ev.scale(col) * std::sqrt(sigma2 * var[i]);
  }
}

}  // namespace

LmReport minimize_least_squares(const LeastSquaresProblem& problem, std::vector<double> x,
                                const LmOptions& options) {
  const std::size_t n = problem.n_params;
  require(n > 0, ErrorKind::InvalidArgument, "least squares: no parameters");
  require(problem.residuals != nullptr, ErrorKind::InvalidArgument, "least squares: no residual function");
  require(x.size() == n && problem.lower.size() == n && problem.upper.size() == n,
          ErrorKind::InvalidArgument, "least squares: parameter/bounds size mismatch");
  require(problem.scale.empty() || problem.scale.size() == n, ErrorKind::InvalidArgument,
          "least squares: scale size mismatch");

  std::vector<bool> free(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(problem.lower[i] <= problem.upper[i], ErrorKind::InvalidArgument,
            "least squares: lower bound above upper bound");
    free[i] = problem.lower[i] < problem.upper[i];
    x[i] = std::clamp(x[i], problem.lower[i], problem.upper[i]);
  }

  const Evaluator ev(problem);
  LmReport report;
  Eigen::VectorXd r = ev.residuals(x);
  double cost = r.squaredNorm();
  report.cost_history.push_back(cost);

  double damping = options.initial_damping;
  RowMatrix jac = ev.jacobian(x);
  bool need_jacobian = false;

  for (;;) {
    if (need_jacobian) {
      jac = ev.jacobian(x);
      need_jacobian = false;
    }
    for (std::size_t c = 0; c < n; ++c)
      if (!free[c]) jac.col(static_cast<Eigen::Index>(c)).setZero();

    const Eigen::VectorXd grad = 2.0 * jac.transpose() * r;
    report.gradient_norm = projected_gradient_norm(grad, x, problem, free, ev);

    if (cost <= std::numeric_limits<double>::min()) {
      report.converged = true;
      report.stop = LmStop::ZeroCost;
      break;
    }
    if (report.gradient_norm < options.gradient_tol) {
      report.converged = true;
      report.stop = LmStop::GradientTolerance;
      break;
    }
    if (report.iterations >= options.max_iterations) {
      report.stop = LmStop::MaxIterations;
      break;
    }

    // Parameters pinned at a bound with the gradient pushing outward sit out
    // this step.
    std::vector<bool> step_free = free;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = grad[static_cast<Eigen::Index>(i)];
      if ((x[i] <= problem.lower[i] && g > 0.0) || (x[i] >= problem.upper[i] && g < 0.0)) step_free[i] = false;
    }

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    Eigen::VectorXd diag = jtj.diagonal();
    const double diag_floor = std::max(diag.maxCoeff(), 1e-300) * 1e-12;
    for (Eigen::Index i = 0; i < diag.size(); ++i) diag[i] = std::max(diag[i], diag_floor);

    bool accepted = false;
    while (!accepted && report.iterations < options.max_iterations) {
      ++report.iterations;
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (step_free[static_cast<std::size_t>(i)]) {
          a(i, i) += damping * diag[i];
        } else {
          a.row(i).setZero();
          a.col(i).setZero();
          a(i, i) = 1.0;
        }
      }
      Eigen::VectorXd rhs = -jtr;
      for (std::size_t i = 0; i < n; ++i)
        if (!step_free[i]) rhs[static_cast<Eigen::Index>(i)] = 0.0;
      const Eigen::VectorXd step = a.ldlt().solve(rhs);

      std::vector<double> trial = x;
      bool moved = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!step_free[i] || !std::isfinite(step[static_cast<Eigen::Index>(i)])) continue;
        trial[i] = std::clamp(x[i] + step[static_cast<Eigen::Index>(i)], problem.lower[i], problem.upper[i]);
        moved = moved || trial[i] != x[i];
      }
      if (!moved) {
        damping *= 10.0;
        if (damping > 1e16) break;
        continue;
      }

      const Eigen::VectorXd r_trial = ev.residuals(trial);
      const double trial_cost = r_trial.allFinite() ? r_trial.squaredNorm()
                                                    : std::numeric_limits<double>::infinity();
      if (trial_cost < cost) {
        const double rel = (cost - trial_cost) / cost;
        const bool near_gauss_newton = damping < 1.0;
        x = std::move(trial);
        r = r_trial;
        cost = trial_cost;
        report.cost_history.push_back(cost);
        damping = std::max(damping / 10.0, 1e-12);
        accepted = true;
        need_jacobian = true;
        if (rel < options.rel_cost_tol && near_gauss_newton) {
          jac = ev.jacobian(x);
          need_jacobian = false;
          for (std::size_t c = 0; c < n; ++c)
            if (!free[c]) jac.col(static_cast<Eigen::Index>(c)).setZero();
          report.gradient_norm =
              projected_gradient_norm(2.0 * jac.transpose() * r, x, problem, free, ev);
          report.converged = true;
          report.stop = LmStop::CostTolerance;
        }
      } else {
        damping *= 10.0;
        if (damping > 1e16) break;
      }
    }
    if (report.converged) break;
    if (!accepted) {
      report.stop = report.iterations >= options.max_iterations ? LmStop::MaxIterations : LmStop::Stalled;
      break;
    }
  }

  if (need_jacobian) jac = ev.jacobian(x);
  for (std::size_t c = 0; c < n; ++c)
    if (!free[c]) jac.col(static_cast<Eigen::Index>(c)).setZero();
  report.params = x;
  report.residuals.assign(r.data(), r.data() + r.size());
  report.cost = cost;
  fill_standard_errors(report, jac, free, ev, options);
  return report;
}

}  // namespace upsq
