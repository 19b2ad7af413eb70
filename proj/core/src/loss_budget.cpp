#include "upsq/loss_budget.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "upsq/error.hpp"

namespace upsq {

namespace {

void check_efficiency(double eta, const std::string& what) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    std::ostringstream os;
    os << what << ": efficiency must satisfy 0 < eta <= 1 (got " << eta << ")";
    raise(ErrorKind::InvalidArgument, os.str());
  }
}

}  // namespace

LossElement LossElement::from_efficiency(std::string label, double efficiency) {
  check_efficiency(efficiency, "loss element '" + label + "'");
  return {std::move(label), efficiency};
}

LossElement LossElement::from_loss_percent(std::string label, double loss_percent) {
  require(loss_percent >= 0.0 && loss_percent < 100.0, ErrorKind::InvalidArgument,
          "loss element '" + label + "': loss percent must lie in [0, 100)");
  return from_efficiency(std::move(label), 1.0 - loss_percent / 100.0);
}

LossBudget::LossBudget(std::vector<LossElement> elements) {
  for (auto& e : elements) add(std::move(e));
}

void LossBudget::add(LossElement element) {
  check_efficiency(element.efficiency, "loss element '" + element.label + "'");
  elements_.push_back(std::move(element));
}

double compose(const LossBudget& budget) {
  require(!budget.empty(), ErrorKind::InvalidArgument, "loss budget is empty");
  double total = 1.0;
  for (const auto& e : budget.elements()) total *= e.efficiency;
  return total;
}

QuadraturePair apply_loss(const QuadraturePair& pair, double eta) {
  check_efficiency(eta, "apply_loss");
  auto through = [eta](NoiseLevel v) {
    return NoiseLevel::from_linear(eta * v.linear() + (1.0 - eta));
  };
  return {through(pair.squeezed()), through(pair.antisqueezed())};
}

QuadraturePair BudgetInversion::reconstruct() const {
  return apply_loss(QuadraturePair::pure(initial_squeezing.linear()), eta_total);
}

BudgetInversion invert_pair(const QuadraturePair& measured) {
  const double s_minus = measured.squeezed().linear();
  const double s_plus = measured.antisqueezed().linear();
  if (!(s_minus < 1.0) || !(s_plus > 1.0)) {
    std::ostringstream os;
    os << "no squeezing to invert: need S- < 1 < S+ (got " << measured.squeezed().db()
       << " dB, " << measured.antisqueezed().db() << " dB)";
    raise(ErrorKind::NoSqueezing, os.str());
  }
  const double v = (1.0 - s_minus) / (s_plus - 1.0);
  if (!(v < 1.0)) {
    raise(ErrorKind::InconsistentPair,
          "inconsistent pair: anti-squeezing too small for the observed squeezing (v >= 1)");
  }
  double eta = (1.0 - s_minus) / (1.0 - v);
  // S- * S+ == 1 within rounding lands a hair above 1.
  constexpr double kEtaSlack = 1e-9;
  if (eta > 1.0 + kEtaSlack) {
    std::ostringstream os;
    os << "inconsistent pair: implied efficiency " << eta
       << " > 1 (S- * S+ below the uncertainty bound)";
    raise(ErrorKind::InconsistentPair, os.str());
  }
  eta = std::min(eta, 1.0);
  return {eta, NoiseLevel::from_linear(v)};
}

ExtraLoss required_extra_loss(const QuadraturePair& from, double to_squeezed_db) {
  const double source = from.squeezed().linear();
  const double target = db_to_linear(to_squeezed_db);
  constexpr double kRel = 1e-12;
  if (target > 1.0 * (1.0 + kRel)) {
    raise(ErrorKind::Infeasible, "target squeezed variance above shot noise is unreachable by loss");
  }
  if (target < source * (1.0 - kRel)) {
    std::ostringstream os;
    os << "target " << to_squeezed_db << " dB is more squeezed than the source "
       << from.squeezed().db() << " dB; loss cannot increase squeezing";
    raise(ErrorKind::Infeasible, os.str());
  }
  if (source >= 1.0) {
    // No squeezing in the source: any efficiency leaves it at shot noise.
    return {1.0, from, false};
  }
  const double eta = std::clamp((1.0 - target) / (1.0 - source), 0.0, 1.0);
  if (eta <= 0.0) return {0.0, QuadraturePair::vacuum(), true};
  return {eta, apply_loss(from, eta), false};
}

PhaseJitter PhaseJitter::make(double theta_rms) {
  require(std::isfinite(theta_rms) && theta_rms >= 0.0, ErrorKind::InvalidArgument,
          "phase jitter: theta_rms must be finite and >= 0 rad");
  return {theta_rms};
}

QuadraturePair apply_phase_jitter(const QuadraturePair& pair, const PhaseJitter& jitter) {
  require(std::isfinite(jitter.theta_rms) && jitter.theta_rms >= 0.0, ErrorKind::InvalidArgument,
          "phase jitter: theta_rms must be finite and >= 0 rad");
  const double lo = pair.squeezed().linear();
  const double hi = pair.antisqueezed().linear();
  const double mix = -std::expm1(-2.0 * jitter.theta_rms * jitter.theta_rms) / 2.0;
  double new_lo = lo + (hi - lo) * mix;
  double new_hi = hi - (hi - lo) * mix;
  if (new_lo > new_hi) new_lo = new_hi = 0.5 * (lo + hi);
  return QuadraturePair::from_linear(new_lo, new_hi);
}

}  // namespace upsq
