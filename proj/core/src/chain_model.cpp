#include "upsq/chain_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "upsq/error.hpp"

namespace upsq {

SidebandFrequency::SidebandFrequency(double f_hz) : f_hz_(f_hz) {
  require(std::isfinite(f_hz) && f_hz >= 0.0, ErrorKind::InvalidArgument,
          "sideband frequency must be finite and >= 0 Hz");
}

void ChainModel::validate() const {
  auto fail = [](const char* what, double value) {
    std::ostringstream os;
    os << what << " (got " << value << ")";
    raise(ErrorKind::InvalidArgument, os.str());
  };
  if (!(eta > 0.0 && eta <= 1.0)) fail("detection efficiency eta must satisfy 0 < eta <= 1", eta);
  if (!(gamma_hwhm_hz > 0.0) || !std::isfinite(gamma_hwhm_hz))
    fail("OPA half-width gamma must be > 0 Hz", gamma_hwhm_hz);
  if (!(kappa_hwhm_hz > 0.0) || !std::isfinite(kappa_hwhm_hz))
    fail("SFG half-width kappa must be > 0 Hz", kappa_hwhm_hz);
  if (!(pump_ratio >= 0.0)) fail("pump ratio x = eps/gamma must be >= 0", pump_ratio);
  if (!(pump_ratio < 1.0)) {
    std::ostringstream os;
    os << "pump ratio x = eps/gamma must be < 1 (below-threshold OPA), got " << pump_ratio;
    raise(ErrorKind::AboveThreshold, os.str());
  }
}

ChainModel ChainModel::make(double eta, double gamma_hwhm_hz, double kappa_hwhm_hz,
                            double pump_ratio) {
  ChainModel m{eta, gamma_hwhm_hz, kappa_hwhm_hz, pump_ratio};
  m.validate();
  return m;
}

SpectrumValues evaluate_spectrum(const ChainModel& model, double f_hz) noexcept {
  const double f2 = f_hz * f_hz;
  const double k2 = model.kappa_hwhm_hz * model.kappa_hwhm_hz;
  const double g = model.gamma_hwhm_hz;
  const double x = model.pump_ratio;
  const double eta = model.eta;

  const double sfg = k2 / (k2 + f2);
  const double numer = 4.0 * x * g * g;
  const double d_plus = g * g * (1.0 - x) * (1.0 - x) + f2;
  const double d_minus = g * g * (1.0 + x) * (1.0 + x) + f2;

  const double s_plus = 1.0 + eta * sfg * numer / d_plus;
  // 1 - eta*L*A written as a sum of non-negative terms so S- stays > 0 near
  // threshold instead of cancelling to zero.
  const double one_minus_eta_l = (k2 * (1.0 - eta) + f2) / (k2 + f2);
  const double one_minus_a = (g * g * (1.0 - x) * (1.0 - x) + f2) / d_minus;
  const double s_minus = one_minus_eta_l + eta * sfg * one_minus_a;
  if (x == 0.0) return {1.0, 1.0};
  return {std::min(s_minus, 1.0), s_plus};
}

QuadraturePair spectrum_at(const ChainModel& model, SidebandFrequency f) {
  model.validate();
  const auto v = evaluate_spectrum(model, f.hz());
  return QuadraturePair::from_linear(v.s_minus, v.s_plus);
}

std::vector<double> frequency_grid(double f_min_hz, double f_max_hz, std::size_t n_points,
                                   Spacing spacing) {
  require(std::isfinite(f_min_hz) && std::isfinite(f_max_hz), ErrorKind::InvalidArgument,
          "frequency range must be finite");
  require(f_min_hz >= 0.0, ErrorKind::InvalidArgument, "f_min must be >= 0 Hz");
  require(f_min_hz < f_max_hz, ErrorKind::InvalidArgument, "frequency range inverted: need f_min < f_max");
  require(n_points >= 2, ErrorKind::InvalidArgument, "need at least 2 points");
  if (spacing == Spacing::Log) {
    require(f_min_hz > 0.0, ErrorKind::InvalidArgument, "log spacing needs f_min > 0");
  }
  std::vector<double> f(n_points);
  const double last = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double t = static_cast<double>(i) / last;
    f[i] = spacing == Spacing::Linear
               ? f_min_hz + (f_max_hz - f_min_hz) * t
               : std::exp(std::log(f_min_hz) + (std::log(f_max_hz) - std::log(f_min_hz)) * t);
  }
  f.front() = f_min_hz;
  f.back() = f_max_hz;
  return f;
}

SpectrumPair spectrum_trace(const ChainModel& model, double f_min_hz, double f_max_hz,
                            std::size_t n_points, Spacing spacing) {
  model.validate();
  auto freqs = frequency_grid(f_min_hz, f_max_hz, n_points, spacing);
  std::vector<double> sm(n_points), sp(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const auto v = evaluate_spectrum(model, freqs[i]);
    sm[i] = v.s_minus;
    sp[i] = v.s_plus;
  }
  return {SpectrumTrace(freqs, std::move(sm), PowerUnit::ShotRelative),
          SpectrumTrace(std::move(freqs), std::move(sp), PowerUnit::ShotRelative)};
}

double pump_ratio_from_powers(double pump_power_w, double threshold_power_w) {
  require(std::isfinite(pump_power_w) && std::isfinite(threshold_power_w),
          ErrorKind::InvalidArgument, "powers must be finite");
  require(threshold_power_w > 0.0, ErrorKind::InvalidArgument, "threshold power must be > 0 W");
  require(pump_power_w >= 0.0, ErrorKind::InvalidArgument, "pump power must be >= 0 W");
  if (pump_power_w >= threshold_power_w) {
    std::ostringstream os;
    os << "pump power " << pump_power_w << " W at or above threshold " << threshold_power_w
       << " W: below-threshold model invalid";
    raise(ErrorKind::AboveThreshold, os.str());
  }
  return std::sqrt(pump_power_w / threshold_power_w);
}

}  // namespace upsq
