#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace upsq {

/// Transmission of a cavity length scan with phase-modulation sidebands
/// acting as frequency markers.
struct AiryScan {
  std::vector<double> time_s;
  std::vector<double> transmission;
  double f_mod_hz = 0.0;

  /// Throws unless times are strictly increasing, samples are finite and
  /// non-negative, and f_mod_hz > 0.
  void validate() const;
};

struct Peak {
  std::size_t index = 0;
  double position = 0.0;  // fractional sample index after parabolic refinement
  double height = 0.0;    // parabola vertex value
  double prominence = 0.0;
};

/// Local maxima at or above `threshold_fraction` of the global maximum whose
/// topographic prominence is at least `min_prominence_fraction` of it,
/// refined with a three-point parabola. Sorted by index.
std::vector<Peak> find_peaks(std::span<const double> y, double threshold_fraction = 0.1,
                             double min_prominence_fraction = 0.05);

struct LinewidthResult {
  double hwhm_hz = 0.0;
  double carrier_time_s = 0.0;
  double lower_marker_time_s = 0.0;
  double upper_marker_time_s = 0.0;
  double hz_per_second = 0.0;  // mean calibration slope between the markers
  /// |left spacing - right spacing| / mean spacing of the markers.
  double spacing_asymmetry = 0.0;
  bool nonlinear_scan = false;
  bool fit_converged = false;
  std::vector<std::string> warnings;
};

/// Calibrates the scan axis from the two first-order sidebands (separated by
/// 2 f_mod) and returns the half width at half maximum of the carrier
/// resonance from a joint Lorentzian fit of carrier and sidebands.
///
/// Throws MarkerDetection when the carrier and both sidebands cannot be
/// resolved. Spacing asymmetry above 5% switches to a piecewise-linear
/// calibration through the three peaks and adds a warning.
LinewidthResult extract_linewidth(const AiryScan& scan);

}  // namespace upsq
