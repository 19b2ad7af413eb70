#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "upsq/error.hpp"
#include "upsq/preprocess.hpp"

using namespace upsq;

namespace {

std::vector<double> grid(std::size_t n) {
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = 1e6 + 1e5 * static_cast<double>(i);
  return f;
}

SpectrumTrace flat(std::size_t n, double value, TraceKind kind = TraceKind::Signal) {
  return SpectrumTrace(grid(n), std::vector<double>(n, value), PowerUnit::Linear, kind);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an upsq::Error";
  return ErrorKind::Io;
}

}  // namespace

TEST(SubtractDark, LinearHalvingAndIdentity) {
  const auto dark = flat(20, 3e-9, TraceKind::Dark);
  const auto out = subtract_dark(flat(20, 6e-9), dark);
  for (double v : out.power()) EXPECT_DOUBLE_EQ(v, 3e-9);
  EXPECT_EQ(out.valid_count(), 20u);

  const auto signal = flat(20, 4.5e-9);
  const auto same = subtract_dark(signal, flat(20, 0.0, TraceKind::Dark));
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(same.power()[i], signal.power()[i]);
}

TEST(SubtractDark, DarkDominatedSampleFlaggedNotClipped) {
  std::vector<double> s(10, 2.0), d(10, 1.0);
  d[3] = 2.0;
  d[7] = 2.5;
  const auto out = subtract_dark(SpectrumTrace(grid(10), s, PowerUnit::Linear),
                                 SpectrumTrace(grid(10), d, PowerUnit::Linear, TraceKind::Dark));
  EXPECT_FALSE(out.is_valid(3));
  EXPECT_FALSE(out.is_valid(7));
  EXPECT_EQ(out.power()[7], -0.5);
  EXPECT_EQ(out.valid_count(), 8u);
}

TEST(SubtractDark, RejectsUnitsAndGridMismatch) {
  const auto dbm = SpectrumTrace(grid(5), std::vector<double>(5, -80.0), PowerUnit::Dbm);
  EXPECT_EQ(kind_of([&] { subtract_dark(dbm, flat(5, 1.0)); }), ErrorKind::Unit);
  EXPECT_EQ(kind_of([&] { subtract_dark(flat(5, 1.0), flat(6, 0.5)); }), ErrorKind::InvalidArgument);
  auto shifted = grid(5);
  shifted[2] *= 1.0 + 1e-6;
  EXPECT_EQ(kind_of([&] {
              subtract_dark(flat(5, 1.0), SpectrumTrace(shifted, std::vector<double>(5, 0.1), PowerUnit::Linear));
            }),
            ErrorKind::InvalidArgument);
  // dBm converted explicitly is accepted.
  EXPECT_NO_THROW(subtract_dark(dbm.to_linear(), flat(5, 1e-9)));
}

TEST(NormalizeToShot, UnityAndMeasuredLevel) {
  const auto shot = flat(30, 2e-8, TraceKind::Shot);
  const auto ones = normalize_to_shot(flat(30, 2e-8), shot);
  for (double v : ones.power()) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_EQ(ones.unit(), PowerUnit::ShotRelative);

  const auto sq = normalize_to_shot(flat(30, 0.2786 * 2e-8), shot).to_db();
  for (double v : sq.power()) EXPECT_NEAR(v, -5.55, 1e-3);
  EXPECT_EQ(sq.unit(), PowerUnit::DbRelShot);
}

TEST(NormalizeToShot, InvalidSamplesPropagate) {
  std::vector<bool> valid(10, true);
  valid[4] = false;
  const SpectrumTrace signal(grid(10), std::vector<double>(10, 1.0), valid, PowerUnit::Linear, TraceKind::Signal);
  const auto out = normalize_to_shot(signal, flat(10, 2.0, TraceKind::Shot));
  EXPECT_FALSE(out.is_valid(4));
  EXPECT_EQ(out.valid_count(), 9u);
}

TEST(NormalizeToShot, NonPositiveShotIsDomainError) {
  std::vector<double> shot(10, 1.0);
  shot[2] = 0.0;
  EXPECT_EQ(kind_of([&] {
              normalize_to_shot(flat(10, 1.0), SpectrumTrace(grid(10), shot, PowerUnit::Linear));
            }),
            ErrorKind::Domain);
}

TEST(Preprocess, AnalyzerGainInvariance) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const std::size_t n = 50;
  std::vector<double> s(n), d(n), shot(n), shot_dark(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = 0.1 * u(rng);
    s[i] = d[i] + u(rng);
    shot_dark[i] = d[i];
    shot[i] = d[i] + 2.0 * u(rng);
  }
  const SpectrumTrace sig(grid(n), s, PowerUnit::Linear);
  const SpectrumTrace dark(grid(n), d, PowerUnit::Linear, TraceKind::Dark);
  const SpectrumTrace sh(grid(n), shot, PowerUnit::Linear, TraceKind::Shot);
  const auto base = normalize_to_shot(subtract_dark(sig, dark), subtract_dark(sh, dark));
  for (double gain : {1e-6, 0.37, 42.0, 3e5}) {
    const auto scaled = normalize_to_shot(subtract_dark(sig.scaled(gain), dark.scaled(gain)),
                                          subtract_dark(sh.scaled(gain), dark.scaled(gain)));
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(scaled.power()[i] / base.power()[i], 1.0, 1e-12);
  }
}

TEST(SpectrumTraceType, Invariants) {
  EXPECT_THROW(SpectrumTrace({1.0, 1.0}, {1.0, 1.0}, PowerUnit::Linear), Error);
  EXPECT_THROW(SpectrumTrace({1.0, 2.0}, {1.0}, PowerUnit::Linear), Error);
  EXPECT_THROW(SpectrumTrace({1.0, 2.0}, {1.0, std::nan("")}, PowerUnit::Linear), Error);
  const SpectrumTrace dbm({1.0, 2.0}, {-30.0, 0.0}, PowerUnit::Dbm);
  const auto lin = dbm.to_linear();
  EXPECT_EQ(lin.unit(), PowerUnit::Linear);
  EXPECT_NEAR(lin.power()[0], 1e-3, 1e-15);
  EXPECT_NEAR(lin.to_db().power()[0], -30.0, 1e-12);
}
