#include "upsq/mzi.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "upsq/chain_model.hpp"
#include "upsq/error.hpp"
#include "upsq/rng.hpp"

namespace upsq {

void MziConfig::validate() const {
  require(std::isfinite(signal_freq_hz) && signal_freq_hz > 0.0, ErrorKind::InvalidArgument,
          "mzi: signal frequency must be > 0 Hz");
  require(std::isfinite(signal_mod_depth) && signal_mod_depth >= 0.0, ErrorKind::InvalidArgument,
          "mzi: modulation depth must be >= 0");
  require(std::isfinite(carrier_power_rel) && carrier_power_rel > 0.0, ErrorKind::InvalidArgument,
          "mzi: carrier power must be > 0");
  require(std::isfinite(rbw_hz) && rbw_hz > 0.0, ErrorKind::InvalidArgument,
          "mzi: resolution bandwidth must be > 0 Hz");
  require(averages >= 1, ErrorKind::InvalidArgument, "mzi: need at least one average per bin");
}

MziResult mzi_response(const MziConfig& config) {
  config.validate();
  MziResult r;
  r.noise_floor = config.dark_port.squeezed();
  r.signal_power_rel = config.carrier_power_rel * config.signal_mod_depth * config.signal_mod_depth;
  r.signal_peak_db = r.signal_power_rel > 0.0
                         ? 10.0 * std::log10(r.signal_power_rel / r.noise_floor.linear())
                         : -std::numeric_limits<double>::infinity();
  r.snr_power_factor = 1.0 / r.noise_floor.linear();
  r.snr_amplitude_factor = std::sqrt(r.snr_power_factor);
  return r;
}

MziSpectrum mzi_spectrum(const MziConfig& config, double f_min_hz, double f_max_hz,
                         std::size_t n_points, bool with_monte_carlo, std::uint64_t seed) {
  config.validate();
  auto freqs = frequency_grid(f_min_hz, f_max_hz, n_points, Spacing::Linear);
  require(config.signal_freq_hz >= f_min_hz && config.signal_freq_hz <= f_max_hz,
          ErrorKind::InvalidArgument, "mzi: signal frequency outside the requested span");

  const auto response = mzi_response(config);
  const double floor = response.noise_floor.linear();
  const double peak = response.signal_power_rel;
  // Gaussian RBW filter with FWHM rbw.
  const double inv_two_sigma2 = 4.0 * std::numbers::ln2 / (config.rbw_hz * config.rbw_hz);

  std::vector<double> power(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double df = freqs[i] - config.signal_freq_hz;
    double p = floor + peak * std::exp(-df * df * inv_two_sigma2);
    if (with_monte_carlo) {
      auto engine = substream(seed, i);
      const double k = static_cast<double>(config.averages);
      std::gamma_distribution<double> averaged(k, 1.0 / k);
      p *= averaged(engine);
    }
    power[i] = p;
  }
  return {SpectrumTrace(std::move(freqs), std::move(power), PowerUnit::ShotRelative), floor, peak};
}

}  // namespace upsq
