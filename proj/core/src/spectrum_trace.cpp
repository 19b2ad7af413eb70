#include "upsq/spectrum_trace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "upsq/error.hpp"

namespace upsq {

std::string_view to_string(TraceKind kind) noexcept {
  switch (kind) {
    case TraceKind::Signal: return "signal";
    case TraceKind::Shot: return "shot";
    case TraceKind::Dark: return "dark";
  }
  return "signal";
}

std::string_view to_string(PowerUnit unit) noexcept {
  switch (unit) {
    case PowerUnit::Linear: return "linear";
    case PowerUnit::Dbm: return "dbm";
    case PowerUnit::DbRelShot: return "db_rel_shot";
    case PowerUnit::ShotRelative: return "rel_shot";
  }
  return "linear";
}

TraceKind parse_trace_kind(std::string_view text) {
  if (text == "signal") return TraceKind::Signal;
  if (text == "shot") return TraceKind::Shot;
  if (text == "dark") return TraceKind::Dark;
  raise(ErrorKind::InvalidArgument, "unknown trace kind '" + std::string(text) + "'");
}

PowerUnit parse_power_unit(std::string_view text) {
  if (text == "linear") return PowerUnit::Linear;
  if (text == "dbm") return PowerUnit::Dbm;
  if (text == "db_rel_shot") return PowerUnit::DbRelShot;
  if (text == "rel_shot") return PowerUnit::ShotRelative;
  raise(ErrorKind::InvalidArgument, "unknown power unit '" + std::string(text) + "'");
}

bool is_db_unit(PowerUnit unit) noexcept {
  return unit == PowerUnit::Dbm || unit == PowerUnit::DbRelShot;
}

SpectrumTrace::SpectrumTrace(std::vector<double> freqs_hz, std::vector<double> power,
                             PowerUnit unit, TraceKind kind)
    : SpectrumTrace(std::move(freqs_hz), std::move(power), {}, unit, kind) {}

SpectrumTrace::SpectrumTrace(std::vector<double> freqs_hz, std::vector<double> power,
                             std::vector<bool> valid, PowerUnit unit, TraceKind kind)
    : freqs_(std::move(freqs_hz)),
      power_(std::move(power)),
      valid_(std::move(valid)),
      unit_(unit),
      kind_(kind) {
  require(freqs_.size() == power_.size(), ErrorKind::InvalidArgument,
          "spectrum trace: frequency and power columns differ in length");
  if (valid_.empty()) valid_.assign(freqs_.size(), true);
  require(valid_.size() == freqs_.size(), ErrorKind::InvalidArgument,
          "spectrum trace: validity mask length mismatch");
  for (std::size_t i = 0; i < freqs_.size(); ++i) {
    require(std::isfinite(freqs_[i]) && freqs_[i] >= 0.0, ErrorKind::InvalidArgument,
            "spectrum trace: frequencies must be finite and >= 0");
    require(std::isfinite(power_[i]), ErrorKind::InvalidArgument,
            "spectrum trace: power samples must be finite");
    if (i > 0) {
      require(freqs_[i] > freqs_[i - 1], ErrorKind::InvalidArgument,
              "spectrum trace: frequencies must be strictly increasing");
    }
  }
}

std::size_t SpectrumTrace::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), true));
}

SpectrumTrace SpectrumTrace::to_linear() const {
  if (!is_db_unit(unit_)) return *this;
  std::vector<double> out(power_.size());
  std::transform(power_.begin(), power_.end(), out.begin(),
                 [](double db) { return std::pow(10.0, db / 10.0); });
  const PowerUnit target = unit_ == PowerUnit::Dbm ? PowerUnit::Linear : PowerUnit::ShotRelative;
  return SpectrumTrace(freqs_, std::move(out), valid_, target, kind_);
}

SpectrumTrace SpectrumTrace::to_db() const {
  if (is_db_unit(unit_)) return *this;
  std::vector<double> out(power_.size());
  for (std::size_t i = 0; i < power_.size(); ++i) {
    if (power_[i] > 0.0) {
      out[i] = 10.0 * std::log10(power_[i]);
    } else {
      require(!valid_[i], ErrorKind::Domain,
              "spectrum trace: cannot express non-positive valid sample in dB");
      out[i] = power_[i];
    }
  }
  const PowerUnit target = unit_ == PowerUnit::Linear ? PowerUnit::Dbm : PowerUnit::DbRelShot;
  return SpectrumTrace(freqs_, std::move(out), valid_, target, kind_);
}

SpectrumTrace SpectrumTrace::with_kind(TraceKind kind) const {
  SpectrumTrace copy = *this;
  copy.kind_ = kind;
  return copy;
}

SpectrumTrace SpectrumTrace::scaled(double factor) const {
  require(factor > 0.0 && std::isfinite(factor), ErrorKind::InvalidArgument,
          "spectrum trace: scale factor must be finite and > 0");
  require(!is_db_unit(unit_), ErrorKind::Unit, "spectrum trace: scaling requires linear units");
  std::vector<double> out(power_);
  for (double& p : out) p *= factor;
  return SpectrumTrace(freqs_, std::move(out), valid_, unit_, kind_);
}

bool SpectrumTrace::same_grid(const SpectrumTrace& other, double rel_tol) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    const double a = freqs_[i];
    const double b = other.freqs_[i];
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    if (std::abs(a - b) > rel_tol * scale) return false;
  }
  return true;
}

}  // namespace upsq
