#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "upsq/noise_level.hpp"

namespace upsq {

struct FixedPhase {
  double theta_rad = 0.0;
};

/// theta(t) = start + rate * t for t in [0, duration).
struct LinearRamp {
  double start_rad = 0.0;
  double rate_rad_per_s = 0.0;
  double duration_s = 1.0;

  /// Ramp covering [start, end) over `duration_s`.
  static LinearRamp spanning(double start_rad, double end_rad, double duration_s = 1.0);
};

using PhaseProgram = std::variant<FixedPhase, LinearRamp>;

/// A homodyne measurement of one sideband-resolved Gaussian state.
/// Sample i is taken at t_i = i * duration / n_samples (duration 1 s for a
/// fixed phase).
struct HomodyneRun {
  QuadraturePair pair = QuadraturePair::vacuum();
  PhaseProgram phase = FixedPhase{};
  std::size_t n_samples = 1;
  std::uint64_t seed = 0;

  void validate() const;
  double duration_s() const;
  double time_at(std::size_t i) const;
  double phase_at(std::size_t i) const;
};

/// Samples per independent random substream. The sample sequence depends only
/// on (seed, block index), never on thread count.
inline constexpr std::size_t kSampleBlock = 1u << 16;

/// Zero-mean Gaussian quadrature samples with variance V(theta_i), in
/// shot-noise units (vacuum variance 1). Deterministic for a fixed run.
std::vector<double> sample_quadratures(const HomodyneRun& run, unsigned max_threads = 0);

struct ZeroSpanTrace {
  std::vector<double> time_s;     // window centers
  std::vector<double> theta_rad;  // phase at window centers
  std::vector<NoiseLevel> level;  // unbiased sample variance per window
};

/// Non-overlapping window variances (sample mean removed, n - 1 normalization)
/// of the run's samples. A trailing partial window is dropped.
ZeroSpanTrace zero_span_trace(const HomodyneRun& run, std::size_t window);
ZeroSpanTrace zero_span_trace(const HomodyneRun& run, std::span<const double> samples,
                              std::size_t window);

}  // namespace upsq
