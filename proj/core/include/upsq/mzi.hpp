#pragma once

#include <cstddef>
#include <cstdint>

#include "upsq/noise_level.hpp"
#include "upsq/spectrum_trace.hpp"

namespace upsq {

/// Mach-Zehnder interferometer locked at mid-fringe, read out with a balanced
/// detector. The carrier enters one port; the other (signal) port sees either
/// vacuum or injected squeezed vacuum. An EOM in one arm writes a small phase
/// modulation at `signal_freq_hz`.
///
/// Powers are in shot-noise units per resolution bandwidth. The signal is
/// treated to first order in the modulation depth, giving a peak power of
/// carrier_power_rel * mod_depth^2 that does not depend on the dark-port
/// state.
struct MziConfig {
  QuadraturePair dark_port = QuadraturePair::vacuum();
  double signal_mod_depth = 1e-3;
  double signal_freq_hz = 5e6;
  double carrier_power_rel = 1e8;
  double rbw_hz = 300e3;
  /// Number of independent power estimates averaged per analyzer bin
  /// (RBW / VBW for a swept analyzer).
  std::size_t averages = 1000;

  void validate() const;
};

struct MziResult {
  NoiseLevel noise_floor = NoiseLevel::vacuum();
  double signal_power_rel = 0.0;
  /// 10 log10(signal / floor); -inf with no modulation.
  double signal_peak_db = 0.0;
  /// SNR gain over a vacuum dark port, 1 / S-.
  double snr_power_factor = 1.0;
  double snr_amplitude_factor = 1.0;
};

MziResult mzi_response(const MziConfig& config);

struct MziSpectrum {
  SpectrumTrace trace;  // shot-noise-relative linear
  double floor = 1.0;
  double peak_power_rel = 0.0;  // signal contribution at signal_freq_hz
};

/// Analyzer trace around the signal: flat floor at the dark-port squeezed
/// variance plus the signal peak shaped by a Gaussian RBW filter. With
/// Monte Carlo enabled each bin is a mean of `averages` exponential power
/// samples (Gamma distributed), drawn from per-bin substreams of `seed`.
MziSpectrum mzi_spectrum(const MziConfig& config, double f_min_hz, double f_max_hz,
                         std::size_t n_points, bool with_monte_carlo = false,
                         std::uint64_t seed = 0);

}  // namespace upsq
