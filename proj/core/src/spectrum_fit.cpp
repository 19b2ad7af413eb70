#include "upsq/spectrum_fit.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "upsq/error.hpp"
#include "upsq/levenberg_marquardt.hpp"

namespace upsq {

FitBounds FitBounds::with_fixed(const ChainModel& at, bool eta, bool gamma, bool kappa, bool pump) {
  FitBounds b;
  if (eta) b.eta = {at.eta, at.eta};
  if (gamma) b.gamma_hz = {at.gamma_hwhm_hz, at.gamma_hwhm_hz};
  if (kappa) b.kappa_hz = {at.kappa_hwhm_hz, at.kappa_hwhm_hz};
  if (pump) b.pump_ratio = {at.pump_ratio, at.pump_ratio};
  return b;
}

namespace {

constexpr double kDb = 10.0 / std::numbers::ln10;

struct Sample {
  double f_hz;
  double target_db;
  double sign;  // -1 for S-, +1 for S+
};

bool masked(double f, const std::vector<FrequencyBand>& mask) {
  for (const auto& band : mask)
    if (f >= band.lo_hz && f <= band.hi_hz) return true;
  return false;
}

void collect(const SpectrumTrace& trace, double sign, const std::vector<FrequencyBand>& mask,
             std::vector<Sample>& out) {
  if (trace.unit() != PowerUnit::ShotRelative && trace.unit() != PowerUnit::DbRelShot) {
    raise(ErrorKind::Unit, std::string("fit_spectrum: traces must be normalized to shot noise, got ") +
                               std::string(to_string(trace.unit())));
  }
  const SpectrumTrace db = trace.to_db();
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (!db.is_valid(i) || masked(db.freqs_hz()[i], mask)) continue;
    out.push_back({db.freqs_hz()[i], db.power()[i], sign});
  }
}

void check_range(const ParameterRange& r, double v, const char* name) {
  if (!(r.lower <= r.upper)) {
    raise(ErrorKind::InvalidArgument, std::string("fit bounds for ") + name + " are inverted");
  }
  if (!r.contains(v)) {
    std::ostringstream os;
    os << "initial " << name << " = " << v << " lies outside its bounds [" << r.lower << ", "
       << r.upper << "]";
    raise(ErrorKind::InvalidArgument, os.str());
  }
}

ChainModel unpack(std::span<const double> p) { return {p[0], p[1], p[2], p[3]}; }

// d(10 log10 S)/d(eta, gamma, kappa, x) for one sample.
std::array<double, 4> model_gradient_db(const ChainModel& m, const Sample& s, double& value_db) {
  const double f2 = s.f_hz * s.f_hz;
  const double k = m.kappa_hwhm_hz;
  const double g = m.gamma_hwhm_hz;
  const double x = m.pump_ratio;
  const double k2 = k * k;
  const double l = k2 / (k2 + f2);
  const double c = 1.0 - s.sign * x;  // 1 - x for S+, 1 + x for S-
  const double d = g * g * c * c + f2;
  const double a = 4.0 * x * g * g / d;

  const auto v = evaluate_spectrum(m, s.f_hz);
  const double spec = s.sign > 0 ? v.s_plus : v.s_minus;
  value_db = kDb * std::log(spec);

  const double dl_dk = 2.0 * k * f2 / ((k2 + f2) * (k2 + f2));
  const double da_dg = 8.0 * x * g * f2 / (d * d);
  const double dd_dx = 2.0 * g * g * c * (-s.sign);
  const double da_dx = 4.0 * g * g / d - 4.0 * x * g * g * dd_dx / (d * d);

  const double scale = s.sign * kDb / spec;
  return {scale * l * a, scale * m.eta * l * da_dg, scale * m.eta * a * dl_dk,
          scale * m.eta * l * da_dx};
}

}  // namespace

FitResult fit_spectrum(const SpectrumTrace& s_minus, const SpectrumTrace& s_plus,
                       const ChainModel& initial, const FitBounds& bounds,
                       const FitOptions& options) {
  initial.validate();
  check_range(bounds.eta, initial.eta, "eta");
  check_range(bounds.gamma_hz, initial.gamma_hwhm_hz, "gamma");
  check_range(bounds.kappa_hz, initial.kappa_hwhm_hz, "kappa");
  check_range(bounds.pump_ratio, initial.pump_ratio, "pump ratio");
  require(bounds.eta.lower > 0.0 && bounds.eta.upper <= 1.0, ErrorKind::InvalidArgument,
          "eta bounds must lie in (0, 1]");
  require(bounds.gamma_hz.lower > 0.0 && bounds.kappa_hz.lower > 0.0, ErrorKind::InvalidArgument,
          "linewidth bounds must be > 0");
  require(bounds.pump_ratio.lower >= 0.0 && bounds.pump_ratio.upper < 1.0,
          ErrorKind::InvalidArgument, "pump ratio bounds must lie in [0, 1)");
  require(options.max_iterations > 0, ErrorKind::InvalidArgument, "max iterations must be > 0");

  std::vector<Sample> samples;
  collect(s_minus, -1.0, options.mask, samples);
  collect(s_plus, +1.0, options.mask, samples);
  require(samples.size() >= 8, ErrorKind::InvalidArgument,
          "fit_spectrum: need at least 8 valid unmasked samples");

  LeastSquaresProblem problem;
  problem.n_params = 4;
  problem.n_residuals = samples.size();
  problem.lower = {bounds.eta.lower, bounds.gamma_hz.lower, bounds.kappa_hz.lower,
                   bounds.pump_ratio.lower};
  problem.upper = {bounds.eta.upper, bounds.gamma_hz.upper, bounds.kappa_hz.upper,
                   bounds.pump_ratio.upper};
  problem.scale = {1.0, initial.gamma_hwhm_hz, initial.kappa_hwhm_hz, 1.0};
  problem.residuals = [&samples](std::span<const double> p, std::span<double> r) {
    const ChainModel m = unpack(p);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto v = evaluate_spectrum(m, samples[i].f_hz);
      const double spec = samples[i].sign > 0 ? v.s_plus : v.s_minus;
      r[i] = kDb * std::log(spec) - samples[i].target_db;
    }
  };
  problem.jacobian = [&samples](std::span<const double> p, std::span<double> j) {
    const ChainModel m = unpack(p);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double unused = 0.0;
      const auto row = model_gradient_db(m, samples[i], unused);
      for (std::size_t c = 0; c < 4; ++c) j[i * 4 + c] = row[c];
    }
  };

  LmOptions lm;
  lm.max_iterations = options.max_iterations;
  lm.rel_cost_tol = options.rel_cost_tol;
  lm.gradient_tol = options.gradient_tol;
  const auto report = minimize_least_squares(
      problem,
      {initial.eta, initial.gamma_hwhm_hz, initial.kappa_hwhm_hz, initial.pump_ratio}, lm);

  FitResult out;
  out.model = unpack(report.params);
  out.cost = report.cost;
  out.residual_rms_db = std::sqrt(report.cost / static_cast<double>(samples.size()));
  out.gradient_norm = report.gradient_norm;
  out.iterations = report.iterations;
  out.converged = report.converged;
  out.stop_reason = std::string(to_string(report.stop));
  out.n_samples = samples.size();
  for (std::size_t i = 0; i < 4; ++i) out.standard_errors[i] = report.standard_errors[i];
  out.rank_deficient = report.rank_deficient;
  if (out.rank_deficient) {
    out.warnings.emplace_back(
        "rank-deficient Jacobian at the optimum: some parameters are unidentifiable from these "
        "traces; their standard errors are reported as infinite");
  }
  if (!out.converged) {
    out.warnings.emplace_back("fit did not converge (" + out.stop_reason +
                              "); returning best parameters found");
  }
  return out;
}

}  // namespace upsq
