#pragma once

#include <cmath>

namespace upsq {

/// Power-dB to linear variance ratio, 10^(db/10). Throws on non-finite input.
double db_to_linear(double db);

/// Linear variance ratio to power dB. Throws a domain error for v <= 0.
double linear_to_db(double v);

/// A quadrature variance normalized to shot noise (vacuum = 1).
class NoiseLevel {
 public:
  /// Throws unless `linear` is finite and strictly positive.
  static NoiseLevel from_linear(double linear);
  static NoiseLevel from_db(double db);
  static NoiseLevel vacuum() { return NoiseLevel(1.0); }

  double linear() const noexcept { return linear_; }
  double db() const { return linear_to_db(linear_); }

  friend bool operator==(const NoiseLevel&, const NoiseLevel&) = default;

 private:
  explicit NoiseLevel(double v) : linear_(v) {}
  double linear_;
};

/// Squeezed and anti-squeezed variances of a Gaussian state at one sideband
/// frequency. Construction enforces squeezed <= antisqueezed and the
/// uncertainty bound squeezed * antisqueezed >= 1.
class QuadraturePair {
 public:
  static constexpr double kUncertaintySlack = 1e-9;

  QuadraturePair(NoiseLevel squeezed, NoiseLevel antisqueezed);
  static QuadraturePair from_db(double squeezed_db, double antisqueezed_db);
  static QuadraturePair from_linear(double squeezed, double antisqueezed);
  static QuadraturePair vacuum() { return {NoiseLevel::vacuum(), NoiseLevel::vacuum()}; }
  /// Minimum-uncertainty state with the given squeezed variance (< 1).
  static QuadraturePair pure(double squeezed_linear);

  NoiseLevel squeezed() const noexcept { return squeezed_; }
  NoiseLevel antisqueezed() const noexcept { return antisqueezed_; }

  friend bool operator==(const QuadraturePair&, const QuadraturePair&) = default;

 private:
  NoiseLevel squeezed_;
  NoiseLevel antisqueezed_;
};

/// V(theta) = S- cos^2(theta) + S+ sin^2(theta), theta measured from the
/// squeezed quadrature.
NoiseLevel quadrature_variance_at_phase(const QuadraturePair& pair, double theta);

}  // namespace upsq
