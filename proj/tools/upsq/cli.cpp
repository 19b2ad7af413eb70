#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "svg_plot.hpp"
#include "upsq/chain_model.hpp"
#include "upsq/homodyne.hpp"
#include "upsq/io.hpp"
#include "upsq/linewidth.hpp"
#include "upsq/loss_budget.hpp"
#include "upsq/mzi.hpp"
#include "upsq/preprocess.hpp"
#include "upsq/spectrum_fit.hpp"

#ifndef UPSQ_VERSION
#define UPSQ_VERSION "unknown"
#endif

namespace upsq::cli {

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Domain:
    case ErrorKind::AboveThreshold:
    case ErrorKind::Unit:
    case ErrorKind::Infeasible:
      return kExitUsage;
    case ErrorKind::NoSqueezing:
    case ErrorKind::InconsistentPair:
    case ErrorKind::MarkerDetection:
      return kExitInconsistent;
    case ErrorKind::Io:
      return kExitIo;
  }
  return kExitUsage;
}

namespace {

namespace fs = std::filesystem;

constexpr double kMHz = 1e6;
constexpr const char* kOutputDirEnv = "UPSQ_OUTPUT_DIR";

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Files written by one command. Every file opens with the run header: the
// effective parameters, enough to repeat the run. The output directory and
// thread count are left out since they do not change any result.
class Run {
 public:
  Run(std::string command, fs::path dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {
    header_.set("tool", std::string("upsq"));
    header_.set("version", std::string(UPSQ_VERSION));
    header_.set("command", std::move(command));
  }

  void param(const std::string& key, double v) { header_.set(key, v); }
  void param(const std::string& key, std::string v) { header_.set(key, std::move(v)); }
  void param(const std::string& key, std::uint64_t v) { header_.set(key, v); }
  void param(const std::string& key, bool v) { header_.set(key, v); }

  std::vector<std::string> header_lines() const {
    std::vector<std::string> lines;
    for (const auto& [k, v] : header_.entries()) lines.push_back(k + " = " + v);
    return lines;
  }

  fs::path path(const std::string& name) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) raise(ErrorKind::Io, "cannot create output directory '" + dir_.string() + "': " + ec.message());
    return dir_ / name;
  }

  std::ofstream open(const std::string& name, std::ios::openmode mode = std::ios::out) {
    const auto p = path(name);
    std::ofstream f(p, mode);
    if (!f) raise(ErrorKind::Io, "cannot open '" + p.string() + "' for writing");
    written_.push_back(p);
    return f;
  }

  void close(std::ofstream& f) {
    f.flush();
    if (!f) raise(ErrorKind::Io, "write to '" + written_.back().string() + "' failed");
  }

  void trace(const std::string& name, const SpectrumTrace& t) {
    auto f = open(name);
    io::write_trace_csv(f, t, header_lines());
    close(f);
  }

  void svg(const std::string& name, const PlotSpec& spec, const std::vector<Series>& series) {
    auto f = open(name);
    write_svg(f, spec, series);
    close(f);
  }

  // Report file plus the same entries on stdout.
  void report(const std::string& name, const io::KeyValueDocument& results) {
    io::KeyValueDocument doc;
    for (const auto& line : header_lines()) doc.comment(line);
    for (const auto& [k, v] : results.entries()) doc.set(k, v);
    auto f = open(name);
    doc.write(f);
    close(f);
    for (const auto& [k, v] : results.entries()) out_ << k << " = " << v << '\n';
  }

  void summary(const std::string& line) { out_ << line << '\n'; }

  void finish() {
    for (const auto& p : written_) out_ << "wrote " << p.string() << '\n';
  }

 private:
  io::KeyValueDocument header_;
  fs::path dir_;
  std::ostream& out_;
  std::vector<fs::path> written_;
};

// Squeezing flags are read by magnitude: the squeezed level is -|v| dB, the
// anti-squeezed +|v| dB. A missing anti-squeezing level means a pure state.
QuadraturePair pair_from_flags(double sqz_db, std::optional<double> antisqz_db) {
  const double s = -std::abs(sqz_db);
  if (antisqz_db) return QuadraturePair::from_db(s, std::abs(*antisqz_db));
  if (s == 0.0) return QuadraturePair::vacuum();
  return QuadraturePair::pure(db_to_linear(s));
}

std::vector<double> to_mhz(std::span<const double> hz) {
  std::vector<double> v(hz.begin(), hz.end());
  for (double& x : v) x /= kMHz;
  return v;
}

std::vector<double> to_db_values(std::span<const double> linear) {
  std::vector<double> v(linear.begin(), linear.end());
  for (double& x : v) x = x > 0.0 ? linear_to_db(x) : -std::numeric_limits<double>::infinity();
  return v;
}

std::vector<double> values_in_db(const SpectrumTrace& t) {
  if (is_db_unit(t.unit())) return {t.power().begin(), t.power().end()};
  return to_db_values(t.power());
}

// ---------------------------------------------------------------------------

struct Common {
  std::string out_dir;
  std::string plot = "none";

  bool svg() const { return plot == "svg"; }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out-dir", c.out_dir,
                  std::string("Output directory (default: $") + kOutputDirEnv + " or .)");
  cmd->add_option("--plot", c.plot, "Plot files to emit")->check(CLI::IsMember({"none", "svg"}));
}

fs::path output_dir(const Common& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return ".";
}

// --- spectrum --------------------------------------------------------------

struct SpectrumArgs {
  Common common;
  std::string params;
  double eta = 0, gamma_mhz = 0, kappa_mhz = 0, pump_ratio = 0;
  CLI::Option *eta_opt = nullptr, *gamma_opt = nullptr, *kappa_opt = nullptr, *pump_opt = nullptr;
  double fmin_mhz = 1.0, fmax_mhz = 50.0;
  std::size_t points = 500;
  bool log = false;
};

void cmd_spectrum(const SpectrumArgs& a, std::ostream& out) {
  std::optional<ChainModel> base;
  if (!a.params.empty()) base = io::get_model(io::KeyValueDocument::read(a.params));
  auto pick = [&](CLI::Option* opt, double flag, double from_file, const char* name) {
    if (opt->count() > 0) return flag;
    if (base) return from_file;
    raise(ErrorKind::InvalidArgument, std::string("spectrum: missing ") + name + " (or give --params)");
  };
  ChainModel m;
  m.eta = pick(a.eta_opt, a.eta, base ? base->eta : 0, "--eta");
  m.gamma_hwhm_hz = pick(a.gamma_opt, a.gamma_mhz * kMHz, base ? base->gamma_hwhm_hz : 0, "--gamma-mhz");
  m.kappa_hwhm_hz = pick(a.kappa_opt, a.kappa_mhz * kMHz, base ? base->kappa_hwhm_hz : 0, "--kappa-mhz");
  m.pump_ratio = pick(a.pump_opt, a.pump_ratio, base ? base->pump_ratio : 0, "--pump-ratio");
  m.validate();

  const auto spacing = a.log ? Spacing::Log : Spacing::Linear;
  const auto pair = spectrum_trace(m, a.fmin_mhz * kMHz, a.fmax_mhz * kMHz, a.points, spacing);

  Run run("spectrum", output_dir(a.common), out);
  run.param("eta", m.eta);
  run.param("gamma_hz", m.gamma_hwhm_hz);
  run.param("kappa_hz", m.kappa_hwhm_hz);
  run.param("pump_ratio", m.pump_ratio);
  run.param("f_min_hz", a.fmin_mhz * kMHz);
  run.param("f_max_hz", a.fmax_mhz * kMHz);
  run.param("points", static_cast<std::uint64_t>(a.points));
  run.param("spacing", std::string(a.log ? "log" : "linear"));

  const auto f = pair.squeezed.freqs_hz();
  const auto sm = to_db_values(pair.squeezed.power());
  const auto sp = to_db_values(pair.antisqueezed.power());
  {
    auto file = run.open("spectrum.csv");
    for (const auto& line : run.header_lines()) file << "# " << line << '\n';
    file << "frequency_hz,s_minus_db,s_plus_db\n";
    for (std::size_t i = 0; i < f.size(); ++i)
      file << io::format_double(f[i]) << ',' << io::format_double(sm[i]) << ',' << io::format_double(sp[i]) << '\n';
    run.close(file);
  }
  run.trace("spectrum_sqz.csv", pair.squeezed.to_db());
  run.trace("spectrum_antisqz.csv", pair.antisqueezed.to_db());
  if (a.common.svg()) {
    const auto mhz = to_mhz(f);
    run.svg("spectrum.svg", {"Quadrature noise spectra", "Sideband frequency (MHz)", "Noise power rel. shot noise (dB)", a.log},
            {{"anti-squeezed", mhz, sp, "#c0392b"}, {"squeezed", mhz, sm, "#1f4e9c"}, {"shot noise", {mhz.front(), mhz.back()}, {0.0, 0.0}, "#555555"}});
  }
  const auto at5 = evaluate_spectrum(m, 5e6);
  run.summary("at 5 MHz: squeezing " + fixed(linear_to_db(at5.s_minus), 2) + " dB, anti-squeezing " +
              fixed(linear_to_db(at5.s_plus), 2) + " dB");
  run.finish();
}

// --- fit -------------------------------------------------------------------

struct FitArgs {
  Common common;
  std::string sqz, antisqz, shot, dark;
  double init_eta = 0.73, init_gamma_mhz = 60.0, init_kappa_mhz = 40.0, init_pump_ratio = 0.77;
  std::vector<std::string> fix;
  std::vector<std::string> mask_mhz;
  double fmin_mhz = 0.0, fmax_mhz = 0.0;
  int max_iterations = 200;
};

FrequencyBand parse_band_mhz(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) raise(ErrorKind::InvalidArgument, "mask band must look like LO:HI (MHz), got '" + text + "'");
  const double lo = io::parse_double(std::string_view(text).substr(0, colon), "mask band start");
  const double hi = io::parse_double(std::string_view(text).substr(colon + 1), "mask band end");
  if (!(lo < hi)) raise(ErrorKind::InvalidArgument, "mask band '" + text + "' is empty");
  return {lo * kMHz, hi * kMHz};
}

SpectrumTrace prepare(const std::string& path, const FitArgs& a) {
  auto t = io::read_trace_csv(path, TraceKind::Signal);
  if (!a.dark.empty()) t = subtract_dark(t.to_linear(), io::read_trace_csv(a.dark, TraceKind::Dark).to_linear());
  if (!a.shot.empty()) t = normalize_to_shot(t.to_linear(), io::read_trace_csv(a.shot, TraceKind::Shot).to_linear());
  return t;
}

void cmd_fit(const FitArgs& a, std::ostream& out) {
  const auto sm = prepare(a.sqz, a);
  const auto sp = prepare(a.antisqz, a);
  const auto init = ChainModel::make(a.init_eta, a.init_gamma_mhz * kMHz, a.init_kappa_mhz * kMHz, a.init_pump_ratio);

  bool fix[4] = {false, false, false, false};
  for (const auto& name : a.fix) {
    if (name == "eta") fix[0] = true;
    else if (name == "gamma") fix[1] = true;
    else if (name == "kappa") fix[2] = true;
    else if (name == "pump") fix[3] = true;
    else raise(ErrorKind::InvalidArgument, "--fix takes eta, gamma, kappa or pump, got '" + name + "'");
  }
  const auto bounds = FitBounds::with_fixed(init, fix[0], fix[1], fix[2], fix[3]);
  FitOptions options;
  options.max_iterations = a.max_iterations;
  for (const auto& band : a.mask_mhz) options.mask.push_back(parse_band_mhz(band));
  if (a.fmin_mhz > 0.0) options.mask.push_back({0.0, std::nextafter(a.fmin_mhz * kMHz, 0.0)});
  if (a.fmax_mhz > 0.0) options.mask.push_back({std::nextafter(a.fmax_mhz * kMHz, HUGE_VAL), HUGE_VAL});

  const auto r = fit_spectrum(sm, sp, init, bounds, options);

  Run run("fit", output_dir(a.common), out);
  run.param("sqz", a.sqz);
  run.param("antisqz", a.antisqz);
  if (!a.shot.empty()) run.param("shot", a.shot);
  if (!a.dark.empty()) run.param("dark", a.dark);
  run.param("init_eta", init.eta);
  run.param("init_gamma_hz", init.gamma_hwhm_hz);
  run.param("init_kappa_hz", init.kappa_hwhm_hz);
  run.param("init_pump_ratio", init.pump_ratio);
  std::string fixed_list;
  for (const auto& name : a.fix) fixed_list += (fixed_list.empty() ? "" : ",") + name;
  run.param("fixed", fixed_list.empty() ? std::string("none") : fixed_list);
  std::string mask_list;
  for (const auto& b : options.mask)
    mask_list += (mask_list.empty() ? "" : ";") + io::format_double(b.lo_hz) + ":" + io::format_double(b.hi_hz);
  run.param("mask_hz", mask_list.empty() ? std::string("none") : mask_list);
  run.param("max_iterations", static_cast<std::uint64_t>(a.max_iterations));

  io::KeyValueDocument res;
  io::put_model(res, r.model);
  const char* names[4] = {"eta_stderr", "gamma_hz_stderr", "kappa_hz_stderr", "pump_ratio_stderr"};
  for (int k = 0; k < 4; ++k) res.set(names[k], r.standard_errors[static_cast<std::size_t>(k)]);
  res.set("residual_rms_db", r.residual_rms_db);
  res.set("cost", r.cost);
  res.set("gradient_norm", r.gradient_norm);
  res.set("iterations", static_cast<std::int64_t>(r.iterations));
  res.set("converged", r.converged);
  res.set("stop_reason", r.stop_reason);
  res.set("n_samples", static_cast<std::uint64_t>(r.n_samples));
  res.set("rank_deficient", r.rank_deficient);
  for (std::size_t i = 0; i < r.warnings.size(); ++i) res.set("warning_" + std::to_string(i + 1), r.warnings[i]);
  run.report("fit.txt", res);

  if (a.common.svg()) {
    const auto mhz_m = to_mhz(sm.freqs_hz());
    const auto mhz_p = to_mhz(sp.freqs_hz());
    const auto grid = frequency_grid(sm.freqs_hz().front(), sm.freqs_hz().back(), 400, Spacing::Linear);
    const auto model = spectrum_trace(r.model, grid.front(), grid.back(), grid.size());
    const auto mhz_grid = to_mhz(grid);
    run.svg("fit.svg", {"Spectrum fit", "Sideband frequency (MHz)", "Noise power rel. shot noise (dB)", false},
            {{"anti-squeezed data", mhz_p, values_in_db(sp.to_db()), "#e59a92"},
             {"squeezed data", mhz_m, values_in_db(sm.to_db()), "#8fb0e0"},
             {"model", mhz_grid, to_db_values(model.antisqueezed.power()), "#c0392b"},
             {"", mhz_grid, to_db_values(model.squeezed.power()), "#1f4e9c"}});
  }
  run.summary("eta " + fixed(r.model.eta, 3) + ", gamma " + fixed(r.model.gamma_hwhm_hz / kMHz, 2) +
              " MHz, kappa " + fixed(r.model.kappa_hwhm_hz / kMHz, 2) + " MHz, pump ratio " +
              fixed(r.model.pump_ratio, 3) + ", rms " + fixed(r.residual_rms_db, 3) + " dB" +
              (r.converged ? "" : " (not converged)"));
  for (const auto& w : r.warnings) run.summary("warning: " + w);
  run.finish();
}

// --- budget ----------------------------------------------------------------

struct BudgetArgs {
  Common common;
  double sqz_db = 0.0, antisqz_db = 0.0, target_db = 0.0, theta_mrad = 0.0;
  std::string file;
};

QuadraturePair measured_pair(const BudgetArgs& a) {
  try {
    return QuadraturePair::from_db(-std::abs(a.sqz_db), std::abs(a.antisqz_db));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidArgument) throw;
    raise(ErrorKind::InconsistentPair, std::string("inconsistent pair: ") + e.what());
  }
}

void cmd_budget_invert(const BudgetArgs& a, std::ostream& out) {
  const auto inv = invert_pair(measured_pair(a));
  Run run("budget invert", output_dir(a.common), out);
  run.param("sqz_db", -std::abs(a.sqz_db));
  run.param("antisqz_db", std::abs(a.antisqz_db));
  io::KeyValueDocument res;
  res.set("eta_total", inv.eta_total);
  res.set("loss_percent", inv.loss_percent());
  res.set("initial_squeezing_db", inv.initial_squeezing.db());
  res.set("initial_antisqueezing_db", -inv.initial_squeezing.db());
  run.report("budget.txt", res);
  run.summary("eta " + fixed(inv.eta_total, 3) + ", loss " + fixed(inv.loss_percent(), 1) +
              "%, initial squeezing " + fixed(inv.initial_squeezing.db(), 1) + " dB");
  run.finish();
}

void cmd_budget_compose(const BudgetArgs& a, std::ostream& out) {
  const auto budget = io::read_budget_file(a.file);
  const double eta = compose(budget);
  Run run("budget compose", output_dir(a.common), out);
  run.param("file", a.file);
  io::KeyValueDocument res;
  for (const auto& e : budget.elements()) res.set("element." + e.label, e.efficiency);
  res.set("eta_total", eta);
  res.set("loss_percent", 100.0 * (1.0 - eta));
  run.report("budget.txt", res);
  run.summary("total efficiency " + fixed(eta, 3) + ", loss " + fixed(100.0 * (1.0 - eta), 1) + "%");
  run.finish();
}

void cmd_budget_extra(const BudgetArgs& a, std::ostream& out) {
  const auto extra = required_extra_loss(measured_pair(a), -std::abs(a.target_db));
  Run run("budget extra", output_dir(a.common), out);
  run.param("sqz_db", -std::abs(a.sqz_db));
  run.param("antisqz_db", std::abs(a.antisqz_db));
  run.param("target_db", -std::abs(a.target_db));
  io::KeyValueDocument res;
  res.set("extra_eta", extra.eta);
  res.set("extra_loss_percent", 100.0 * (1.0 - extra.eta));
  res.set("result_squeezing_db", extra.result.squeezed().db());
  res.set("result_antisqueezing_db", extra.result.antisqueezed().db());
  res.set("degenerate", extra.degenerate);
  run.report("budget.txt", res);
  run.summary("extra efficiency " + fixed(extra.eta, 3) + ", leaving " + fixed(extra.result.squeezed().db(), 2) +
              " / +" + fixed(extra.result.antisqueezed().db(), 2) + " dB");
  run.finish();
}

void cmd_budget_jitter(const BudgetArgs& a, std::ostream& out) {
  const auto jitter = PhaseJitter::make(a.theta_mrad * 1e-3);
  const auto after = apply_phase_jitter(measured_pair(a), jitter);
  Run run("budget jitter", output_dir(a.common), out);
  run.param("sqz_db", -std::abs(a.sqz_db));
  run.param("antisqz_db", std::abs(a.antisqz_db));
  run.param("theta_rms_rad", jitter.theta_rms);
  io::KeyValueDocument res;
  res.set("squeezing_db", after.squeezed().db());
  res.set("antisqueezing_db", after.antisqueezed().db());
  res.set("beyond_small_angle", jitter.beyond_small_angle());
  run.report("budget.txt", res);
  run.summary("with phase jitter: " + fixed(after.squeezed().db(), 2) + " / +" + fixed(after.antisqueezed().db(), 2) + " dB");
  if (jitter.beyond_small_angle()) run.summary("warning: jitter beyond the small-angle regime");
  run.finish();
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  Common common;
  double sqz_db = 5.55, antisqz_db = 17.94;
  std::size_t samples = 1'000'000;
  std::size_t window = 10'000;
  double phase_rad = 0.0;
  CLI::Option* phase_opt = nullptr;
  // Half a default window before 0, so that windows are centered on 0 and pi/2.
  double ramp_start_rad = -std::numbers::pi / 200.0;
  double ramp_end_rad = std::numbers::pi - std::numbers::pi / 200.0;
  double duration_s = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool dump = false;
};

void cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  HomodyneRun hr;
  hr.pair = pair_from_flags(a.sqz_db, a.antisqz_db);
  const bool fixed_phase = a.phase_opt->count() > 0;
  if (fixed_phase) {
    hr.phase = FixedPhase{a.phase_rad};
  } else {
    hr.phase = LinearRamp::spanning(a.ramp_start_rad, a.ramp_end_rad, a.duration_s);
  }
  hr.n_samples = a.samples;
  hr.seed = a.seed;
  hr.validate();

  const auto samples = sample_quadratures(hr, a.threads);
  const auto trace = zero_span_trace(hr, samples, a.window);

  Run run("simulate", output_dir(a.common), out);
  run.param("sqz_db", -std::abs(a.sqz_db));
  run.param("antisqz_db", std::abs(a.antisqz_db));
  run.param("samples", static_cast<std::uint64_t>(a.samples));
  run.param("window", static_cast<std::uint64_t>(a.window));
  if (fixed_phase) {
    run.param("phase", std::string("fixed"));
    run.param("phase_rad", a.phase_rad);
  } else {
    run.param("phase", std::string("ramp"));
    run.param("ramp_start_rad", a.ramp_start_rad);
    run.param("ramp_end_rad", a.ramp_end_rad);
    run.param("duration_s", a.duration_s);
  }
  run.param("seed", a.seed);
  run.param("prng", std::string("mt19937_64 per 65536-sample block, seeded by splitmix64(seed, block)"));

  std::vector<double> db(trace.level.size());
  for (std::size_t i = 0; i < db.size(); ++i) db[i] = trace.level[i].db();
  {
    auto file = run.open("zero_span.csv");
    for (const auto& line : run.header_lines()) file << "# " << line << '\n';
    file << "time_s,theta_rad,variance,level_db\n";
    for (std::size_t i = 0; i < db.size(); ++i)
      file << io::format_double(trace.time_s[i]) << ',' << io::format_double(trace.theta_rad[i]) << ','
           << io::format_double(trace.level[i].linear()) << ',' << io::format_double(db[i]) << '\n';
    run.close(file);
  }
  if (a.dump) {
    auto file = run.open("samples.bin", std::ios::out | std::ios::binary);
    io::write_sample_dump(file, samples);
    run.close(file);
  }

  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double variance = samples.size() > 1 ? ss / static_cast<double>(samples.size() - 1) : 0.0;

  io::KeyValueDocument res;
  res.set("windows", static_cast<std::uint64_t>(db.size()));
  res.set("min_level_db", *std::min_element(db.begin(), db.end()));
  res.set("max_level_db", *std::max_element(db.begin(), db.end()));
  res.set("sample_variance", variance);
  run.report("simulate.txt", res);

  if (a.common.svg()) {
    run.svg("zero_span.svg", {"Zero-span homodyne trace", "Time (s)", "Noise power rel. shot noise (dB)", false},
            {{"quadrature noise", trace.time_s, db, "#2e8b57"},
             {"shot noise", {trace.time_s.front(), trace.time_s.back()}, {0.0, 0.0}, "#555555"}});
  }
  run.summary("zero-span levels between " + fixed(*std::min_element(db.begin(), db.end()), 2) + " and " +
              fixed(*std::max_element(db.begin(), db.end()), 2) + " dB over " + std::to_string(db.size()) + " windows");
  run.finish();
}

// --- mzi -------------------------------------------------------------------

struct MziArgs {
  Common common;
  double sqz_db = 3.3;
  double antisqz_db = 0.0;
  CLI::Option* antisqz_opt = nullptr;
  double mod_depth = 1e-3;
  double signal_mhz = 5.0;
  double carrier_rel = 1e8;
  double rbw_khz = 300.0;
  std::size_t averages = 1000;
  double fmin_mhz = 4.0, fmax_mhz = 6.0;
  std::size_t points = 401;
  bool monte_carlo = false;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void cmd_mzi(const MziArgs& a, std::ostream& out) {
  if (a.monte_carlo && a.seed_opt->count() == 0)
    raise(ErrorKind::InvalidArgument, "mzi: --monte-carlo needs --seed");
  MziConfig c;
  c.dark_port = pair_from_flags(a.sqz_db, a.antisqz_opt->count() > 0 ? std::optional(a.antisqz_db) : std::nullopt);
  c.signal_mod_depth = a.mod_depth;
  c.signal_freq_hz = a.signal_mhz * kMHz;
  c.carrier_power_rel = a.carrier_rel;
  c.rbw_hz = a.rbw_khz * 1e3;
  c.averages = a.averages;
  c.validate();
  MziConfig vac = c;
  vac.dark_port = QuadraturePair::vacuum();

  const auto r = mzi_response(c);
  const double f0 = a.fmin_mhz * kMHz, f1 = a.fmax_mhz * kMHz;
  // The vacuum reference uses its own substream so the two traces are independent.
  const auto sqz = mzi_spectrum(c, f0, f1, a.points, a.monte_carlo, a.seed);
  const auto ref = mzi_spectrum(vac, f0, f1, a.points, a.monte_carlo, a.seed + 1);

  Run run("mzi", output_dir(a.common), out);
  run.param("sqz_db", -std::abs(a.sqz_db));
  if (a.antisqz_opt->count() > 0) run.param("antisqz_db", std::abs(a.antisqz_db));
  else run.param("antisqz_db", std::string("pure"));
  run.param("signal_mod_depth", c.signal_mod_depth);
  run.param("signal_freq_hz", c.signal_freq_hz);
  run.param("carrier_power_rel", c.carrier_power_rel);
  run.param("rbw_hz", c.rbw_hz);
  run.param("averages", static_cast<std::uint64_t>(c.averages));
  run.param("f_min_hz", f0);
  run.param("f_max_hz", f1);
  run.param("points", static_cast<std::uint64_t>(a.points));
  run.param("monte_carlo", a.monte_carlo);
  if (a.monte_carlo) run.param("seed", a.seed);

  io::KeyValueDocument res;
  res.set("noise_floor_db", r.noise_floor.db());
  res.set("signal_power_rel", r.signal_power_rel);
  res.set("signal_peak_db", r.signal_peak_db);
  res.set("snr_power_factor", r.snr_power_factor);
  res.set("snr_amplitude_factor", r.snr_amplitude_factor);
  run.report("mzi.txt", res);
  run.trace("mzi_squeezed.csv", sqz.trace);
  run.trace("mzi_vacuum.csv", ref.trace);
  if (a.common.svg()) {
    const auto mhz = to_mhz(sqz.trace.freqs_hz());
    run.svg("mzi.svg", {"Interferometer output spectrum", "Frequency (MHz)", "Noise power rel. shot noise (dB)", false},
            {{"vacuum dark port", mhz, to_db_values(ref.trace.power()), "#555555"},
             {"squeezed dark port", mhz, to_db_values(sqz.trace.power()), "#1f4e9c"}});
  }
  run.summary("SNR gain " + fixed(r.snr_power_factor, 2) + "x in power, " + fixed(r.snr_amplitude_factor, 2) +
              "x in amplitude");
  run.finish();
}

// --- linewidth ---------------------------------------------------------------

struct LinewidthArgs {
  Common common;
  std::string scan;
  double fmod_mhz = 0.0;
};

void cmd_linewidth(const LinewidthArgs& a, std::ostream& out) {
  const auto scan = io::read_scan_csv(a.scan, a.fmod_mhz * kMHz);
  const auto r = extract_linewidth(scan);

  Run run("linewidth", output_dir(a.common), out);
  run.param("scan", a.scan);
  run.param("f_mod_hz", scan.f_mod_hz);
  io::KeyValueDocument res;
  res.set("hwhm_hz", r.hwhm_hz);
  res.set("carrier_time_s", r.carrier_time_s);
  res.set("lower_marker_time_s", r.lower_marker_time_s);
  res.set("upper_marker_time_s", r.upper_marker_time_s);
  res.set("hz_per_second", r.hz_per_second);
  res.set("spacing_asymmetry", r.spacing_asymmetry);
  res.set("nonlinear_scan", r.nonlinear_scan);
  res.set("fit_converged", r.fit_converged);
  for (std::size_t i = 0; i < r.warnings.size(); ++i) res.set("warning_" + std::to_string(i + 1), r.warnings[i]);
  run.report("linewidth.txt", res);
  if (a.common.svg()) {
    const double peak = *std::max_element(scan.transmission.begin(), scan.transmission.end());
    run.svg("linewidth.svg", {"Cavity scan", "Time (s)", "Transmission", false},
            {{"scan", scan.time_s, scan.transmission, "#1f4e9c"},
             {"markers", {r.lower_marker_time_s, r.lower_marker_time_s}, {0.0, peak}, "#c0392b"},
             {"", {r.carrier_time_s, r.carrier_time_s}, {0.0, peak}, "#c0392b"},
             {"", {r.upper_marker_time_s, r.upper_marker_time_s}, {0.0, peak}, "#c0392b"}});
  }
  run.summary("linewidth (HWHM) " + fixed(r.hwhm_hz / kMHz, 2) + " MHz");
  for (const auto& w : r.warnings) run.summary("warning: " + w);
  run.finish();
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Squeezed-light modelling toolkit", "upsq"};
  app.set_version_flag("--version", std::string("upsq ") + UPSQ_VERSION);
  app.require_subcommand(1);

  SpectrumArgs sa;
  auto* spectrum = app.add_subcommand("spectrum", "Model squeezing and anti-squeezing spectra");
  add_common(spectrum, sa.common);
  spectrum->add_option("--params", sa.params, "Model parameter file (keys eta, gamma_hz, kappa_hz, pump_ratio)");
  sa.eta_opt = spectrum->add_option("--eta", sa.eta, "Total detection efficiency");
  sa.gamma_opt = spectrum->add_option("--gamma-mhz", sa.gamma_mhz, "Squeezer cavity half linewidth (MHz)");
  sa.kappa_opt = spectrum->add_option("--kappa-mhz", sa.kappa_mhz, "Conversion cavity half linewidth (MHz)");
  sa.pump_opt = spectrum->add_option("--pump-ratio", sa.pump_ratio, "Pump parameter x = sqrt(P/Pth), below 1");
  spectrum->add_option("--fmin-mhz", sa.fmin_mhz, "Lowest sideband frequency (MHz)")->capture_default_str();
  spectrum->add_option("--fmax-mhz", sa.fmax_mhz, "Highest sideband frequency (MHz)")->capture_default_str();
  spectrum->add_option("--points", sa.points, "Number of frequencies")->capture_default_str();
  spectrum->add_flag("--log", sa.log, "Logarithmic frequency spacing");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit the model to measured spectra");
  add_common(fit, fa.common);
  fit->add_option("--sqz", fa.sqz, "Squeezed-quadrature trace CSV")->required();
  fit->add_option("--antisqz", fa.antisqz, "Anti-squeezed-quadrature trace CSV")->required();
  fit->add_option("--shot", fa.shot, "Shot-noise trace CSV for normalization");
  fit->add_option("--dark", fa.dark, "Dark-noise trace CSV to subtract");
  fit->add_option("--init-eta", fa.init_eta, "Initial efficiency")->capture_default_str();
  fit->add_option("--init-gamma-mhz", fa.init_gamma_mhz, "Initial squeezer half linewidth (MHz)")->capture_default_str();
  fit->add_option("--init-kappa-mhz", fa.init_kappa_mhz, "Initial converter half linewidth (MHz)")->capture_default_str();
  fit->add_option("--init-pump-ratio", fa.init_pump_ratio, "Initial pump parameter")->capture_default_str();
  fit->add_option("--fix", fa.fix, "Hold parameters at their initial values: eta, gamma, kappa, pump")->delimiter(',');
  fit->add_option("--mask-mhz", fa.mask_mhz, "Exclude a band LO:HI (MHz); repeatable");
  fit->add_option("--fmin-mhz", fa.fmin_mhz, "Ignore samples below this frequency (MHz)");
  fit->add_option("--fmax-mhz", fa.fmax_mhz, "Ignore samples above this frequency (MHz)");
  fit->add_option("--max-iterations", fa.max_iterations, "Iteration limit")->capture_default_str();

  BudgetArgs ba;
  auto* budget = app.add_subcommand("budget", "Loss budget calculations");
  budget->require_subcommand(1);
  auto* invert = budget->add_subcommand("invert", "Efficiency and initial squeezing from a measured pair");
  add_common(invert, ba.common);
  invert->add_option("--sqz-db", ba.sqz_db, "Measured squeezing (dB below shot noise)")->required();
  invert->add_option("--antisqz-db", ba.antisqz_db, "Measured anti-squeezing (dB above shot noise)")->required();
  auto* compose_cmd = budget->add_subcommand("compose", "Total efficiency of an itemized budget");
  add_common(compose_cmd, ba.common);
  compose_cmd->add_option("--file", ba.file, "Budget file")->required();
  auto* extra = budget->add_subcommand("extra", "Extra efficiency that degrades a pair to a target squeezing");
  add_common(extra, ba.common);
  extra->add_option("--sqz-db", ba.sqz_db, "Squeezing (dB)")->required();
  extra->add_option("--antisqz-db", ba.antisqz_db, "Anti-squeezing (dB)")->required();
  extra->add_option("--target-db", ba.target_db, "Target squeezing (dB)")->required();
  auto* jitter = budget->add_subcommand("jitter", "Effect of Gaussian phase jitter on a pair");
  add_common(jitter, ba.common);
  jitter->add_option("--sqz-db", ba.sqz_db, "Squeezing (dB)")->required();
  jitter->add_option("--antisqz-db", ba.antisqz_db, "Anti-squeezing (dB)")->required();
  jitter->add_option("--theta-mrad", ba.theta_mrad, "RMS phase jitter (mrad)")->required();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo homodyne samples and zero-span trace");
  add_common(simulate, sim.common);
  simulate->add_option("--sqz-db", sim.sqz_db, "Squeezing (dB)")->capture_default_str();
  simulate->add_option("--antisqz-db", sim.antisqz_db, "Anti-squeezing (dB)")->capture_default_str();
  simulate->add_option("--samples", sim.samples, "Number of samples")->capture_default_str();
  simulate->add_option("--window", sim.window, "Samples per zero-span variance estimate")->capture_default_str();
  sim.phase_opt = simulate->add_option("--phase-rad", sim.phase_rad, "Fixed local-oscillator phase (rad); default is a ramp");
  simulate->add_option("--ramp-start-rad", sim.ramp_start_rad, "Ramp start phase (rad)")->capture_default_str()->excludes(sim.phase_opt);
  simulate->add_option("--ramp-end-rad", sim.ramp_end_rad, "Ramp end phase (rad)")->capture_default_str()->excludes(sim.phase_opt);
  simulate->add_option("--duration-s", sim.duration_s, "Ramp duration (s)")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "PRNG seed")->required();
  simulate->add_option("--threads", sim.threads, "Worker threads (0: hardware concurrency)");
  simulate->add_flag("--dump", sim.dump, "Also write the raw samples to samples.bin");

  MziArgs ma;
  auto* mzi = app.add_subcommand("mzi", "Interferometer with squeezed light at the dark port");
  add_common(mzi, ma.common);
  mzi->add_option("--sqz-db", ma.sqz_db, "Dark-port squeezing (dB); 0 for vacuum")->capture_default_str();
  ma.antisqz_opt = mzi->add_option("--antisqz-db", ma.antisqz_db, "Dark-port anti-squeezing (dB); default pure state");
  mzi->add_option("--mod-depth", ma.mod_depth, "Phase modulation depth (rad)")->capture_default_str();
  mzi->add_option("--signal-mhz", ma.signal_mhz, "Modulation frequency (MHz)")->capture_default_str();
  mzi->add_option("--carrier-rel", ma.carrier_rel, "Carrier power in shot-noise units")->capture_default_str();
  mzi->add_option("--rbw-khz", ma.rbw_khz, "Resolution bandwidth (kHz)")->capture_default_str();
  mzi->add_option("--averages", ma.averages, "Power estimates averaged per bin")->capture_default_str();
  mzi->add_option("--fmin-mhz", ma.fmin_mhz, "Trace start (MHz)")->capture_default_str();
  mzi->add_option("--fmax-mhz", ma.fmax_mhz, "Trace stop (MHz)")->capture_default_str();
  mzi->add_option("--points", ma.points, "Trace points")->capture_default_str();
  mzi->add_flag("--monte-carlo", ma.monte_carlo, "Add analyzer fluctuations (needs --seed)");
  ma.seed_opt = mzi->add_option("--seed", ma.seed, "PRNG seed");

  LinewidthArgs la;
  auto* linewidth = app.add_subcommand("linewidth", "Cavity linewidth from a scan with modulation sidebands");
  add_common(linewidth, la.common);
  linewidth->add_option("--scan", la.scan, "Scan CSV (time_s,transmission)")->required();
  linewidth->add_option("--fmod-mhz", la.fmod_mhz, "Sideband modulation frequency (MHz)")->required();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("upsq");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "upsq: error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (spectrum->parsed()) cmd_spectrum(sa, out);
    else if (fit->parsed()) cmd_fit(fa, out);
    else if (invert->parsed()) cmd_budget_invert(ba, out);
    else if (compose_cmd->parsed()) cmd_budget_compose(ba, out);
    else if (extra->parsed()) cmd_budget_extra(ba, out);
    else if (jitter->parsed()) cmd_budget_jitter(ba, out);
    else if (simulate->parsed()) cmd_simulate(sim, out);
    else if (mzi->parsed()) cmd_mzi(ma, out);
    else if (linewidth->parsed()) cmd_linewidth(la, out);
  } catch (const Error& e) {
    err << "upsq: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "upsq: io: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace upsq::cli
