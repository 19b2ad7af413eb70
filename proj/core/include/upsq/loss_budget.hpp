#pragma once

#include <string>
#include <vector>

#include "upsq/noise_level.hpp"

namespace upsq {

/// One optical efficiency in the path between source and photocurrent.
struct LossElement {
  std::string label;
  double efficiency = 1.0;

  /// Throws unless 0 < efficiency <= 1.
  static LossElement from_efficiency(std::string label, double efficiency);
  /// `loss_percent` = 100 * (1 - efficiency); must lie in [0, 100).
  static LossElement from_loss_percent(std::string label, double loss_percent);

  double loss_percent() const noexcept { return 100.0 * (1.0 - efficiency); }
};

/// Ordered list of uncorrelated beam-splitter losses in series.
class LossBudget {
 public:
  LossBudget() = default;
  explicit LossBudget(std::vector<LossElement> elements);

  void add(LossElement element);
  const std::vector<LossElement>& elements() const noexcept { return elements_; }
  bool empty() const noexcept { return elements_.empty(); }

 private:
  std::vector<LossElement> elements_;
};

/// Product of element efficiencies. Throws for an empty budget.
double compose(const LossBudget& budget);

/// Beam-splitter loss on both quadratures: V' = eta V + (1 - eta).
QuadraturePair apply_loss(const QuadraturePair& pair, double eta);

/// Pure squeezed state plus a single effective efficiency that reproduces a
/// measured (S-, S+) pair.
struct BudgetInversion {
  double eta_total;
  NoiseLevel initial_squeezing;

  double loss_percent() const noexcept { return 100.0 * (1.0 - eta_total); }
  QuadraturePair reconstruct() const;
};

/// Solves S- = 1 - eta + eta v, S+ = 1 - eta + eta / v for (eta, v).
/// Throws NoSqueezing when S- >= 1 or S+ <= 1, InconsistentPair when the
/// solution leaves eta in (0, 1] / v in (0, 1).
BudgetInversion invert_pair(const QuadraturePair& measured);

struct ExtraLoss {
  double eta;               // additional efficiency, 0 when the target is shot noise
  QuadraturePair result;    // state after the extra loss
  bool degenerate = false;  // eta == 0: full loss, result is vacuum
};

/// The single extra efficiency that degrades `from` to the requested squeezed
/// level. Throws Infeasible when the target is more squeezed than the source
/// or above shot noise.
ExtraLoss required_extra_loss(const QuadraturePair& from, double to_squeezed_db);

struct PhaseJitter {
  static constexpr double kSmallAngleLimit = 0.3;  // rad

  double theta_rms = 0.0;

  static PhaseJitter make(double theta_rms);
  bool beyond_small_angle() const noexcept { return theta_rms > kSmallAngleLimit; }
};

/// Averages the quadrature variances over a Gaussian phase distribution of
/// standard deviation theta_rms:
///   V-' = V- + (V+ - V-) (1 - exp(-2 theta^2)) / 2,  V+' symmetric.
QuadraturePair apply_phase_jitter(const QuadraturePair& pair, const PhaseJitter& jitter);

}  // namespace upsq
