#pragma once

#include <cstddef>

#include "upsq/noise_level.hpp"
#include "upsq/spectrum_trace.hpp"

namespace upsq {

/// Sideband (Fourier) frequency omega/2pi in Hz.
class SidebandFrequency {
 public:
  explicit SidebandFrequency(double f_hz);
  double hz() const noexcept { return f_hz_; }

 private:
  double f_hz_;
};

/// Parameters of a below-threshold OPA followed by an SFG up-conversion
/// cavity and lossy detection.
///
/// Linewidths are half widths at half maximum in ordinary frequency (Hz),
/// i.e. gamma/2pi and kappa/2pi. The pump is the dimensionless ratio
/// x = |epsilon| / gamma, with threshold at x = 1.
struct ChainModel {
  double eta = 1.0;
  double gamma_hwhm_hz = 1.0;
  double kappa_hwhm_hz = 1.0;
  double pump_ratio = 0.0;

  /// Throws InvalidArgument (or AboveThreshold for pump_ratio >= 1) naming
  /// the violated bound.
  void validate() const;
  static ChainModel make(double eta, double gamma_hwhm_hz, double kappa_hwhm_hz, double pump_ratio);

  friend bool operator==(const ChainModel&, const ChainModel&) = default;
};

/// Squeezed/anti-squeezed variance at one sideband frequency:
///
///   S+- = 1 +- eta * k^2/(k^2 + w^2) * 4 g e / ((g -+ e)^2 + w^2)
///
/// with w = 2 pi f, g = 2 pi gamma, k = 2 pi kappa, e = x g. The 2 pi factors
/// cancel, so evaluation happens directly in Hz.
QuadraturePair spectrum_at(const ChainModel& model, SidebandFrequency f);

/// Raw S- and S+ values without constructing a QuadraturePair; used by the
/// fitter where trial parameters are already range-checked.
struct SpectrumValues {
  double s_minus;
  double s_plus;
};
SpectrumValues evaluate_spectrum(const ChainModel& model, double f_hz) noexcept;

enum class Spacing { Linear, Log };

struct SpectrumPair {
  SpectrumTrace squeezed;
  SpectrumTrace antisqueezed;
};

/// Sampled S- and S+ traces (shot-noise-relative linear units), endpoints
/// included. Log spacing needs f_min > 0.
SpectrumPair spectrum_trace(const ChainModel& model, double f_min_hz, double f_max_hz,
                            std::size_t n_points, Spacing spacing = Spacing::Linear);

/// Frequency grid used by spectrum_trace.
std::vector<double> frequency_grid(double f_min_hz, double f_max_hz, std::size_t n_points,
                                   Spacing spacing);

/// x = sqrt(P / P_threshold) for a below-threshold OPA.
double pump_ratio_from_powers(double pump_power_w, double threshold_power_w);

}  // namespace upsq
