#include "upsq/noise_level.hpp"

#include <cmath>
#include <sstream>

#include "upsq/error.hpp"

namespace upsq {

double db_to_linear(double db) {
  require(std::isfinite(db), ErrorKind::InvalidArgument, "db_to_linear: input must be finite");
  return std::pow(10.0, db / 10.0);
}

double linear_to_db(double v) {
  require(std::isfinite(v), ErrorKind::InvalidArgument, "linear_to_db: input must be finite");
  require(v > 0.0, ErrorKind::Domain, "linear_to_db: variance ratio must be > 0");
  return 10.0 * std::log10(v);
}

NoiseLevel NoiseLevel::from_linear(double linear) {
  require(std::isfinite(linear), ErrorKind::InvalidArgument, "noise level must be finite");
  require(linear > 0.0, ErrorKind::Domain, "noise level must be > 0 (linear)");
  return NoiseLevel(linear);
}

NoiseLevel NoiseLevel::from_db(double db) { return NoiseLevel(db_to_linear(db)); }

QuadraturePair::QuadraturePair(NoiseLevel squeezed, NoiseLevel antisqueezed)
    : squeezed_(squeezed), antisqueezed_(antisqueezed) {
  if (squeezed.linear() > antisqueezed.linear()) {
    std::ostringstream os;
    os << "quadrature pair: squeezed variance " << squeezed.linear()
       << " exceeds anti-squeezed variance " << antisqueezed.linear();
    raise(ErrorKind::InvalidArgument, os.str());
  }
  if (squeezed.linear() * antisqueezed.linear() < 1.0 - kUncertaintySlack) {
    std::ostringstream os;
    os << "quadrature pair: product " << squeezed.linear() * antisqueezed.linear()
       << " violates the uncertainty bound (>= 1)";
    raise(ErrorKind::InvalidArgument, os.str());
  }
}

QuadraturePair QuadraturePair::from_db(double squeezed_db, double antisqueezed_db) {
  return {NoiseLevel::from_db(squeezed_db), NoiseLevel::from_db(antisqueezed_db)};
}

QuadraturePair QuadraturePair::from_linear(double squeezed, double antisqueezed) {
  return {NoiseLevel::from_linear(squeezed), NoiseLevel::from_linear(antisqueezed)};
}

QuadraturePair QuadraturePair::pure(double squeezed_linear) {
  require(squeezed_linear > 0.0 && squeezed_linear <= 1.0, ErrorKind::InvalidArgument,
          "pure state: squeezed variance must lie in (0, 1]");
  return from_linear(squeezed_linear, 1.0 / squeezed_linear);
}

NoiseLevel quadrature_variance_at_phase(const QuadraturePair& pair, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return NoiseLevel::from_linear(pair.squeezed().linear() * c * c +
                                 pair.antisqueezed().linear() * s * s);
}

}  // namespace upsq
