#pragma once

#include <array>
#include <string>
#include <vector>

#include "upsq/chain_model.hpp"
#include "upsq/spectrum_trace.hpp"

namespace upsq {

struct ParameterRange {
  double lower;
  double upper;

  bool contains(double v) const noexcept { return v >= lower && v <= upper; }
  bool fixed() const noexcept { return lower == upper; }
};

/// Box constraints for the four chain parameters. A zero-width range
/// freezes the parameter at that value.
struct FitBounds {
  ParameterRange eta{1e-3, 1.0};
  ParameterRange gamma_hz{1e3, 1e11};
  ParameterRange kappa_hz{1e3, 1e11};
  ParameterRange pump_ratio{0.0, 0.999};

  /// Same defaults with the named parameters pinned to `at`'s values.
  static FitBounds with_fixed(const ChainModel& at, bool eta, bool gamma, bool kappa, bool pump);
};

struct FrequencyBand {
  double lo_hz;
  double hi_hz;
};

struct FitOptions {
  int max_iterations = 200;
  double rel_cost_tol = 1e-10;
  double gradient_tol = 1e-8;
  /// Samples inside any band are excluded (e.g. electronic pick-up spikes).
  std::vector<FrequencyBand> mask;
};

struct FitResult {
  ChainModel model;
  double residual_rms_db = 0.0;
  double cost = 0.0;  // sum of squared dB residuals
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::size_t n_samples = 0;
  /// Standard errors in the order eta, gamma (Hz), kappa (Hz), pump ratio.
  std::array<double, 4> standard_errors{};
  bool rank_deficient = false;
  std::vector<std::string> warnings;
};

/// Joint least-squares fit of one ChainModel to shot-noise-normalized S- and
/// S+ traces, residuals taken in dB. Traces may be ShotRelative or DbRelShot.
/// Invalid and masked samples are skipped.
FitResult fit_spectrum(const SpectrumTrace& s_minus, const SpectrumTrace& s_plus,
                       const ChainModel& initial, const FitBounds& bounds = {},
                       const FitOptions& options = {});

}  // namespace upsq
