#include "upsq/preprocess.hpp"

#include <sstream>

#include "upsq/error.hpp"

namespace upsq {

namespace {

void require_linear(const SpectrumTrace& t, const char* op, const char* name) {
  if (t.unit() == PowerUnit::Linear) return;
  std::ostringstream os;
  os << op << ": " << name << " trace is in " << to_string(t.unit())
     << "; convert to linear power first";
  raise(ErrorKind::Unit, os.str());
}

}  // namespace

SpectrumTrace subtract_dark(const SpectrumTrace& signal, const SpectrumTrace& dark) {
  require_linear(signal, "subtract_dark", "signal");
  require_linear(dark, "subtract_dark", "dark");
  require(signal.same_grid(dark), ErrorKind::InvalidArgument,
          "subtract_dark: signal and dark traces are on different frequency grids");

  const auto s = signal.power();
  const auto d = dark.power();
  std::vector<double> out(signal.size());
  std::vector<bool> valid(signal.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = s[i] - d[i];
    valid[i] = signal.is_valid(i) && dark.is_valid(i) && d[i] < s[i];
  }
  const auto f = signal.freqs_hz();
  return SpectrumTrace({f.begin(), f.end()}, std::move(out), std::move(valid), PowerUnit::Linear,
                       signal.kind());
}

SpectrumTrace normalize_to_shot(const SpectrumTrace& signal, const SpectrumTrace& shot) {
  require_linear(signal, "normalize_to_shot", "signal");
  require_linear(shot, "normalize_to_shot", "shot");
  require(signal.same_grid(shot), ErrorKind::InvalidArgument,
          "normalize_to_shot: signal and shot traces are on different frequency grids");

  const auto s = signal.power();
  const auto n = shot.power();
  std::vector<double> out(signal.size());
  std::vector<bool> valid(signal.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool shot_ok = shot.is_valid(i);
    if (shot_ok && !(n[i] > 0.0)) {
      std::ostringstream os;
      os << "normalize_to_shot: shot-noise power " << n[i] << " at " << shot.freqs_hz()[i]
         << " Hz is not > 0";
      raise(ErrorKind::Domain, os.str());
    }
    valid[i] = signal.is_valid(i) && shot_ok;
    out[i] = shot_ok ? s[i] / n[i] : s[i];
  }
  const auto f = signal.freqs_hz();
  return SpectrumTrace({f.begin(), f.end()}, std::move(out), std::move(valid),
                       PowerUnit::ShotRelative, TraceKind::Signal);
}

}  // namespace upsq
