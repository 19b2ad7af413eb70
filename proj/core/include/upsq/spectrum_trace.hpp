#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace upsq {

enum class TraceKind { Signal, Shot, Dark };

/// Units a trace's power column may carry.
///   Linear       absolute linear power (any consistent scale, e.g. mW)
///   Dbm          absolute power in dBm
///   DbRelShot    power in dB relative to the shot-noise reference
///   ShotRelative linear ratio to the shot-noise reference
enum class PowerUnit { Linear, Dbm, DbRelShot, ShotRelative };

std::string_view to_string(TraceKind kind) noexcept;
std::string_view to_string(PowerUnit unit) noexcept;
TraceKind parse_trace_kind(std::string_view text);
PowerUnit parse_power_unit(std::string_view text);

/// Noise power sampled against sideband frequency. Samples can be flagged
/// invalid (e.g. dark noise dominating); flagged samples keep their raw value
/// and are skipped by downstream statistics and fitting.
class SpectrumTrace {
 public:
  SpectrumTrace(std::vector<double> freqs_hz, std::vector<double> power, PowerUnit unit,
                TraceKind kind = TraceKind::Signal);
  SpectrumTrace(std::vector<double> freqs_hz, std::vector<double> power, std::vector<bool> valid,
                PowerUnit unit, TraceKind kind);

  std::size_t size() const noexcept { return freqs_.size(); }
  std::span<const double> freqs_hz() const noexcept { return freqs_; }
  std::span<const double> power() const noexcept { return power_; }
  const std::vector<bool>& valid() const noexcept { return valid_; }
  bool is_valid(std::size_t i) const { return valid_.at(i); }
  std::size_t valid_count() const noexcept;
  PowerUnit unit() const noexcept { return unit_; }
  TraceKind kind() const noexcept { return kind_; }

  /// dBm -> Linear (mW), DbRelShot -> ShotRelative; linear units unchanged.
  SpectrumTrace to_linear() const;
  /// Linear -> Dbm (values taken as mW), ShotRelative -> DbRelShot.
  /// Invalid samples with non-positive power are carried through unconverted.
  SpectrumTrace to_db() const;

  SpectrumTrace with_kind(TraceKind kind) const;
  /// Multiplies every linear power sample by `factor` (> 0).
  SpectrumTrace scaled(double factor) const;

  /// True when both traces share a frequency grid within `rel_tol`.
  bool same_grid(const SpectrumTrace& other, double rel_tol = 1e-9) const;

 private:
  std::vector<double> freqs_;
  std::vector<double> power_;
  std::vector<bool> valid_;
  PowerUnit unit_;
  TraceKind kind_;
};

bool is_db_unit(PowerUnit unit) noexcept;

}  // namespace upsq
