#include "upsq/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "upsq/error.hpp"
#include "upsq/rng.hpp"

namespace upsq {

LinearRamp LinearRamp::spanning(double start_rad, double end_rad, double duration_s) {
  require(duration_s > 0.0, ErrorKind::InvalidArgument, "ramp duration must be > 0 s");
  return {start_rad, (end_rad - start_rad) / duration_s, duration_s};
}

void HomodyneRun::validate() const {
  require(n_samples >= 1, ErrorKind::InvalidArgument, "homodyne run: need at least one sample");
  if (const auto* ramp = std::get_if<LinearRamp>(&phase)) {
    require(std::isfinite(ramp->duration_s) && ramp->duration_s > 0.0, ErrorKind::InvalidArgument,
            "homodyne run: ramp duration must be > 0 s");
    require(std::isfinite(ramp->start_rad) && std::isfinite(ramp->rate_rad_per_s),
            ErrorKind::InvalidArgument, "homodyne run: ramp parameters must be finite");
  } else {
    require(std::isfinite(std::get<FixedPhase>(phase).theta_rad), ErrorKind::InvalidArgument,
            "homodyne run: phase must be finite");
  }
}

double HomodyneRun::duration_s() const {
  if (const auto* ramp = std::get_if<LinearRamp>(&phase)) return ramp->duration_s;
  return 1.0;
}

double HomodyneRun::time_at(std::size_t i) const {
  return duration_s() * static_cast<double>(i) / static_cast<double>(n_samples);
}

double HomodyneRun::phase_at(std::size_t i) const {
  if (const auto* ramp = std::get_if<LinearRamp>(&phase))
    return ramp->start_rad + ramp->rate_rad_per_s * time_at(i);
  return std::get<FixedPhase>(phase).theta_rad;
}

namespace {

void fill_block(const HomodyneRun& run, std::size_t block, std::span<double> out) {
  auto engine = substream(run.seed, block);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double lo = run.pair.squeezed().linear();
  const double hi = run.pair.antisqueezed().linear();
  const std::size_t offset = block * kSampleBlock;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double theta = run.phase_at(offset + k);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    out[k] = std::sqrt(lo * c * c + hi * s * s) * normal(engine);
  }
}

}  // namespace

std::vector<double> sample_quadratures(const HomodyneRun& run, unsigned max_threads) {
  run.validate();
  std::vector<double> samples(run.n_samples);
  const std::size_t n_blocks = (run.n_samples + kSampleBlock - 1) / kSampleBlock;
  auto block_span = [&](std::size_t b) {
    const std::size_t begin = b * kSampleBlock;
    const std::size_t end = std::min(begin + kSampleBlock, run.n_samples);
    return std::span<double>(samples.data() + begin, end - begin);
  };

  unsigned threads = max_threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : max_threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_blocks));
  if (threads <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fill_block(run, b, block_span(b));
    return samples;
  }
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t b = w; b < n_blocks; b += threads) fill_block(run, b, block_span(b));
      });
    }
  }
  return samples;
}

ZeroSpanTrace zero_span_trace(const HomodyneRun& run, std::span<const double> samples,
                              std::size_t window) {
  run.validate();
  require(window >= 100, ErrorKind::InvalidArgument, "zero-span window must be >= 100 samples");
  require(window <= samples.size(), ErrorKind::InvalidArgument,
          "zero-span window exceeds the number of samples");
  const std::size_t n_windows = samples.size() / window;
  ZeroSpanTrace trace;
  trace.time_s.reserve(n_windows);
  trace.theta_rad.reserve(n_windows);
  trace.level.reserve(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    const auto chunk = samples.subspan(w * window, window);
    double mean = 0.0;
    for (double v : chunk) mean += v;
    mean /= static_cast<double>(window);
    double ss = 0.0;
    for (double v : chunk) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(window - 1);

    const double center_index = static_cast<double>(w * window) + 0.5 * static_cast<double>(window - 1);
    const double t = run.duration_s() * center_index / static_cast<double>(run.n_samples);
    double theta = 0.0;
    if (const auto* ramp = std::get_if<LinearRamp>(&run.phase)) {
      theta = ramp->start_rad + ramp->rate_rad_per_s * t;
    } else {
      theta = std::get<FixedPhase>(run.phase).theta_rad;
    }
    trace.time_s.push_back(t);
    trace.theta_rad.push_back(theta);
    trace.level.push_back(NoiseLevel::from_linear(var));
  }
  return trace;
}

ZeroSpanTrace zero_span_trace(const HomodyneRun& run, std::size_t window) {
  run.validate();
  require(window <= run.n_samples, ErrorKind::InvalidArgument,
          "zero-span window exceeds the number of samples");
  const auto samples = sample_quadratures(run);
  return zero_span_trace(run, samples, window);
}

}  // namespace upsq
