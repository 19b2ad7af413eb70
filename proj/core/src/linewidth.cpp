#include "upsq/linewidth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "upsq/error.hpp"
#include "upsq/levenberg_marquardt.hpp"

namespace upsq {

void AiryScan::validate() const {
  require(std::isfinite(f_mod_hz) && f_mod_hz > 0.0, ErrorKind::InvalidArgument,
          "airy scan: modulation frequency must be > 0 Hz");
  require(time_s.size() == transmission.size(), ErrorKind::InvalidArgument,
          "airy scan: time and transmission columns differ in length");
  require(time_s.size() >= 16, ErrorKind::InvalidArgument, "airy scan: need at least 16 samples");
  for (std::size_t i = 0; i < time_s.size(); ++i) {
    require(std::isfinite(time_s[i]), ErrorKind::InvalidArgument, "airy scan: non-finite time");
    require(std::isfinite(transmission[i]) && transmission[i] >= 0.0, ErrorKind::InvalidArgument,
            "airy scan: transmission must be finite and >= 0");
    if (i > 0) {
      require(time_s[i] > time_s[i - 1], ErrorKind::InvalidArgument,
              "airy scan: time axis must be strictly increasing");
    }
  }
}

std::vector<Peak> find_peaks(std::span<const double> y, double threshold_fraction,
                             double min_prominence_fraction) {
  std::vector<Peak> peaks;
  if (y.size() < 3) return peaks;
  const double ymax = *std::max_element(y.begin(), y.end());
  if (!(ymax > 0.0)) return peaks;
  const double threshold = threshold_fraction * ymax;
  const double min_prominence = min_prominence_fraction * ymax;

  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1]) || y[i] < threshold) continue;

    double left_min = y[i];
    for (std::size_t j = i; j-- > 0;) {
      if (y[j] > y[i]) break;
      left_min = std::min(left_min, y[j]);
    }
    double right_min = y[i];
    for (std::size_t j = i + 1; j < y.size(); ++j) {
      if (y[j] > y[i]) break;
      right_min = std::min(right_min, y[j]);
    }
    const double prominence = y[i] - std::max(left_min, right_min);
    if (prominence < min_prominence) continue;

    const double a = y[i - 1];
    const double b = y[i];
    const double c = y[i + 1];
    const double denom = a - 2.0 * b + c;
    double delta = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
    delta = std::clamp(delta, -0.5, 0.5);
    peaks.push_back({i, static_cast<double>(i) + delta, b - 0.25 * (a - c) * delta, prominence});
  }
  return peaks;
}

namespace {

double interpolate_at(std::span<const double> axis, double position) {
  const double clamped = std::clamp(position, 0.0, static_cast<double>(axis.size() - 1));
  const auto i = std::min(static_cast<std::size_t>(clamped), axis.size() - 2);
  const double frac = clamped - static_cast<double>(i);
  return axis[i] + frac * (axis[i + 1] - axis[i]);
}

// baseline + three Lorentzians with one shared half width.
// params: [baseline, a_lo, a_c, a_hi, c_lo, c_c, c_hi, width]
double triplet(std::span<const double> p, double u) {
  double sum = p[0];
  for (int j = 0; j < 3; ++j) {
    const double z = (u - p[4 + j]) / p[7];
    sum += p[1 + j] / (1.0 + z * z);
  }
  return sum;
}

struct TripletFit {
  std::vector<double> params;
  bool converged;
};

// Fits the triplet over (u, y) with initial centers/width in the same axis.
TripletFit fit_triplet(const std::vector<double>& u, const std::vector<double>& y,
                       std::array<double, 3> centers, std::array<double, 3> heights,
                       double baseline, double width) {
  const double span = centers[2] - centers[0];
  const double ymax = *std::max_element(y.begin(), y.end());

  LeastSquaresProblem problem;
  problem.n_params = 8;
  problem.n_residuals = u.size();
  problem.residuals = [&u, &y](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = triplet(p, u[i]) - y[i];
  };
  problem.jacobian = [&u](std::span<const double> p, std::span<double> jac) {
    const double w = p[7];
    for (std::size_t i = 0; i < u.size(); ++i) {
      double* row = &jac[i * 8];
      row[0] = 1.0;
      row[7] = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double z = (u[i] - p[4 + j]) / w;
        const double q = 1.0 / (1.0 + z * z);
        row[1 + j] = q;
        // d/dc of a/(1+z^2) = a q^2 2z / w ; d/dw = a q^2 2 z^2 / w
        row[4 + j] = p[1 + j] * q * q * 2.0 * z / w;
        row[7] += p[1 + j] * q * q * 2.0 * z * z / w;
      }
    }
  };
  const double amp_scale = std::max(ymax, 1e-300);
  problem.lower = {-amp_scale, 0.0, 0.0, 0.0, centers[0] - 0.25 * span, centers[1] - 0.25 * span,
                   centers[2] - 0.25 * span, 1e-6 * span};
  problem.upper = {amp_scale, 10 * amp_scale, 10 * amp_scale, 10 * amp_scale,
                   centers[0] + 0.25 * span, centers[1] + 0.25 * span, centers[2] + 0.25 * span,
                   span};
  problem.scale = {amp_scale, amp_scale, amp_scale, amp_scale, width, width, width, width};

  std::vector<double> x0 = {baseline,   heights[0], heights[1], heights[2],
                            centers[0], centers[1], centers[2], width};
  LmOptions options;
  options.max_iterations = 400;
  options.gradient_tol = 1e-12 * amp_scale * amp_scale;
  const auto report = minimize_least_squares(problem, std::move(x0), options);
  return {report.params, report.converged};
}

// Half width at half maximum of the peak at `index` in sample units, from
// linear interpolation of the half-height crossings.
double half_width_samples(std::span<const double> y, std::size_t index, double baseline) {
  const double half = baseline + 0.5 * (y[index] - baseline);
  auto crossing = [&](int dir) {
    std::size_t i = index;
    while (true) {
      const std::size_t next = dir < 0 ? i - 1 : i + 1;
      if ((dir < 0 && i == 0) || (dir > 0 && next >= y.size())) return static_cast<double>(i);
      if (y[next] <= half) {
        const double t = (y[i] - half) / (y[i] - y[next]);
        return static_cast<double>(i) + dir * t;
      }
      i = next;
    }
  };
  return 0.5 * (crossing(+1) - crossing(-1));
}

}  // namespace

LinewidthResult extract_linewidth(const AiryScan& scan) {
  scan.validate();
  const std::span<const double> y(scan.transmission);
  const std::span<const double> t(scan.time_s);

  const auto peaks = find_peaks(y);
  if (peaks.size() < 3) {
    std::ostringstream os;
    os << "marker detection: found " << peaks.size()
       << " resolvable peak(s); need a carrier and two modulation sidebands";
    raise(ErrorKind::MarkerDetection, os.str());
  }
  const auto carrier_it = std::max_element(peaks.begin(), peaks.end(),
                                           [](const Peak& a, const Peak& b) { return a.height < b.height; });
  if (carrier_it == peaks.begin() || std::next(carrier_it) == peaks.end()) {
    raise(ErrorKind::MarkerDetection,
          "marker detection: carrier lacks a sideband on one side of the scan");
  }
  // Sidebands: the most prominent peak on each side of the carrier, which
  // skips noise bumps and second-order sidebands.
  auto by_prominence = [](const Peak& a, const Peak& b) { return a.prominence < b.prominence; };
  const Peak& lower = *std::max_element(peaks.begin(), carrier_it, by_prominence);
  const Peak& carrier = *carrier_it;
  const Peak& upper = *std::max_element(std::next(carrier_it), peaks.end(), by_prominence);

  // Fit window: half a marker spacing beyond each sideband.
  const double left_pos = lower.position - 0.5 * (carrier.position - lower.position);
  const double right_pos = upper.position + 0.5 * (upper.position - carrier.position);
  const auto first = static_cast<std::size_t>(std::max(0.0, std::floor(left_pos)));
  const auto last = static_cast<std::size_t>(
      std::min(static_cast<double>(y.size() - 1), std::ceil(right_pos)));
  const double baseline = *std::min_element(y.begin() + static_cast<std::ptrdiff_t>(first),
                                            y.begin() + static_cast<std::ptrdiff_t>(last) + 1);

  // Work in a normalized axis u = (t - t_carrier) / (t_upper - t_lower) so the
  // fit sees O(1) numbers whatever the time origin and units.
  const double t_lo0 = interpolate_at(t, lower.position);
  const double t_c0 = interpolate_at(t, carrier.position);
  const double t_hi0 = interpolate_at(t, upper.position);
  const double t_span0 = t_hi0 - t_lo0;
  std::vector<double> u, yy;
  for (std::size_t i = first; i <= last; ++i) {
    u.push_back((t[i] - t_c0) / t_span0);
    yy.push_back(y[i]);
  }
  const double dt_local = (interpolate_at(t, carrier.position + 0.5) -
                           interpolate_at(t, carrier.position - 0.5)) / t_span0;
  const double width0 = std::max(half_width_samples(y, carrier.index, baseline) * dt_local, 1e-4);
  const std::array<double, 3> c0 = {(t_lo0 - t_c0) / t_span0, 0.0, (t_hi0 - t_c0) / t_span0};
  const std::array<double, 3> h0 = {lower.height - baseline, carrier.height - baseline,
                                    upper.height - baseline};
  const auto time_fit = fit_triplet(u, yy, c0, h0, baseline, width0);

  LinewidthResult out;
  const double t_lo = t_c0 + time_fit.params[4] * t_span0;
  const double t_c = t_c0 + time_fit.params[5] * t_span0;
  const double t_hi = t_c0 + time_fit.params[6] * t_span0;
  out.carrier_time_s = t_c;
  out.lower_marker_time_s = t_lo;
  out.upper_marker_time_s = t_hi;
  out.hz_per_second = 2.0 * scan.f_mod_hz / (t_hi - t_lo);
  const double left = t_c - t_lo;
  const double right = t_hi - t_c;
  out.spacing_asymmetry = std::abs(left - right) / (0.5 * (left + right));
  out.fit_converged = time_fit.converged;

  if (out.spacing_asymmetry <= 0.05) {
    out.hwhm_hz = time_fit.params[7] * t_span0 * out.hz_per_second;
  } else {
    out.nonlinear_scan = true;
    std::ostringstream os;
    os << "nonlinear scan: sideband spacings differ by " << 100.0 * out.spacing_asymmetry
       << "%; using piecewise-linear calibration between markers";
    out.warnings.push_back(os.str());

    // Piecewise-linear time -> frequency map through the three markers,
    // outer segments extended linearly.
    const double f_mod = scan.f_mod_hz;
    auto to_freq = [&](double time) {
      if (time <= t_c) return (time - t_c) * f_mod / left;
      return (time - t_c) * f_mod / right;
    };
    std::vector<double> nu;
    nu.reserve(u.size());
    for (std::size_t i = first; i <= last; ++i) nu.push_back(to_freq(t[i]) / (2.0 * f_mod));
    const double w_nu0 = time_fit.params[7] * t_span0 * out.hz_per_second / (2.0 * f_mod);
    const auto freq_fit = fit_triplet(nu, yy, {-0.5, 0.0, 0.5},
                                      {time_fit.params[1], time_fit.params[2], time_fit.params[3]},
                                      time_fit.params[0], w_nu0);
    out.hwhm_hz = freq_fit.params[7] * 2.0 * f_mod;
    out.fit_converged = freq_fit.converged;
  }
  if (!out.fit_converged) out.warnings.emplace_back("Lorentzian fit did not fully converge");
  return out;
}

}  // namespace upsq
