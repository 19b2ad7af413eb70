#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "upsq/error.hpp"
#include "upsq/loss_budget.hpp"
#include "upsq/mzi.hpp"

using namespace upsq;

namespace {

MziConfig with_squeezing(double db) {
  MziConfig c;
  c.dark_port = db == 0.0 ? QuadraturePair::vacuum() : QuadraturePair::pure(std::pow(10.0, db / 10.0));
  return c;
}

double max_power(const SpectrumTrace& t) { return *std::max_element(t.power().begin(), t.power().end()); }

}  // namespace

TEST(MziResponse, InterferometerEnhancement) {
  const auto r = mzi_response(with_squeezing(-3.3));
  EXPECT_NEAR(r.snr_power_factor, 2.14, 0.01);
  EXPECT_NEAR(r.snr_amplitude_factor, 1.462, 0.005);
  EXPECT_DOUBLE_EQ(r.snr_amplitude_factor, std::sqrt(r.snr_power_factor));
  EXPECT_NEAR(r.noise_floor.db(), -3.3, 1e-12);
}

TEST(MziResponse, VacuumAndUndegradedState) {
  EXPECT_EQ(mzi_response(with_squeezing(0.0)).snr_power_factor, 1.0);
  // 10^0.55 = 3.5481...
  EXPECT_NEAR(mzi_response(with_squeezing(-5.5)).snr_power_factor, 3.55, 0.02);
}

TEST(MziResponse, SignalUnaffectedBySqueezing) {
  const auto vac = mzi_response(with_squeezing(0.0));
  const auto sqz = mzi_response(with_squeezing(-3.3));
  EXPECT_EQ(vac.signal_power_rel, sqz.signal_power_rel);
  EXPECT_NEAR(sqz.signal_peak_db - vac.signal_peak_db, 3.3, 1e-12);
  MziConfig off = with_squeezing(-3.3);
  off.signal_mod_depth = 0.0;
  EXPECT_TRUE(std::isinf(mzi_response(off).signal_peak_db));
}

TEST(MziResponse, EnhancementDecaysWithLoss) {
  const auto source = QuadraturePair::pure(std::pow(10.0, -0.55));
  double prev = 1e9;
  for (double eta = 1.0; eta > 0.0; eta -= 0.05) {
    MziConfig c;
    c.dark_port = apply_loss(source, eta);
    const double factor = mzi_response(c).snr_power_factor;
    EXPECT_LT(factor, prev);
    EXPECT_GE(factor, 1.0);
    prev = factor;
  }
  MziConfig c;
  c.dark_port = apply_loss(source, 1e-12);
  EXPECT_NEAR(mzi_response(c).snr_power_factor, 1.0, 1e-9);
}

TEST(MziSpectrum, FloorDropsPeakStays) {
  const auto vac = mzi_spectrum(with_squeezing(0.0), 4e6, 6e6, 401);
  const auto sqz = mzi_spectrum(with_squeezing(-3.3), 4e6, 6e6, 401);
  const double floor_drop = 10 * std::log10(vac.trace.power()[0] / sqz.trace.power()[0]);
  EXPECT_NEAR(floor_drop, 3.3, 0.05);
  EXPECT_NEAR(10 * std::log10(max_power(vac.trace) / max_power(sqz.trace)), 0.0, 0.05);
  EXPECT_EQ(vac.peak_power_rel, sqz.peak_power_rel);
  // Peak height above each trace's own floor grows by the squeezing level.
  const double rise_vac = 10 * std::log10(vac.peak_power_rel / vac.floor);
  const double rise_sqz = 10 * std::log10(sqz.peak_power_rel / sqz.floor);
  EXPECT_NEAR(rise_sqz - rise_vac, 3.3, 1e-9);
}

TEST(MziSpectrum, NoModulationNoPeak) {
  MziConfig c = with_squeezing(-3.3);
  c.signal_mod_depth = 0.0;
  const auto s = mzi_spectrum(c, 4e6, 6e6, 101);
  for (double v : s.trace.power()) EXPECT_DOUBLE_EQ(v, s.floor);
}

TEST(MziSpectrum, PeakQuadraticInModulationDepth) {
  MziConfig c = with_squeezing(-3.3);
  const auto a = mzi_spectrum(c, 4e6, 6e6, 401);
  c.signal_mod_depth *= 2.0;
  const auto b = mzi_spectrum(c, 4e6, 6e6, 401);
  EXPECT_NEAR(10 * std::log10(b.peak_power_rel / a.peak_power_rel), 6.02, 0.05);
}

TEST(MziSpectrum, MonteCarloFluctuationsMatchAveraging) {
  MziConfig c = with_squeezing(-3.3);
  c.signal_mod_depth = 0.0;
  c.averages = 400;
  const auto s = mzi_spectrum(c, 1e6, 9e6, 4001, true, 77);
  double mean = 0.0;
  for (double v : s.trace.power()) mean += v;
  mean /= 4001.0;
  double var = 0.0;
  for (double v : s.trace.power()) var += (v - mean) * (v - mean);
  var /= 4000.0;
  EXPECT_NEAR(mean / s.floor, 1.0, 0.01);
  EXPECT_NEAR(std::sqrt(var) / s.floor, 1.0 / std::sqrt(400.0), 0.1 / std::sqrt(400.0));
  const auto again = mzi_spectrum(c, 1e6, 9e6, 4001, true, 77);
  EXPECT_TRUE(std::equal(s.trace.power().begin(), s.trace.power().end(), again.trace.power().begin()));
}

TEST(MziSpectrum, RejectsSignalOutsideSpan) {
  EXPECT_THROW(mzi_spectrum(with_squeezing(-3.3), 6e6, 9e6, 11), Error);
  MziConfig bad;
  bad.signal_freq_hz = 0.0;
  EXPECT_THROW(mzi_response(bad), Error);
}
