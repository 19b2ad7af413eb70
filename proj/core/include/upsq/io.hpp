#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "upsq/chain_model.hpp"
#include "upsq/linewidth.hpp"
#include "upsq/loss_budget.hpp"
#include "upsq/spectrum_trace.hpp"

namespace upsq::io {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);
/// Strict parse of a full token; throws InvalidArgument naming `what`.
double parse_double(std::string_view text, std::string_view what);

// ---------------------------------------------------------------------------
// Trace CSV
//
//   # optional comment lines
//   frequency_hz,power[,unit[,valid]]
//   1000000,0.2786,rel_shot
//
// `unit` is linear | dbm | db_rel_shot | rel_shot (default linear) and must
// be the same on every row. `valid` (1/0) marks flagged samples; the writer
// emits it only when a trace has any.

SpectrumTrace parse_trace_csv(std::istream& in, TraceKind kind = TraceKind::Signal);
SpectrumTrace read_trace_csv(const std::filesystem::path& path, TraceKind kind = TraceKind::Signal);
void write_trace_csv(std::ostream& out, const SpectrumTrace& trace,
                     std::span<const std::string> comments = {});
void write_trace_csv(const std::filesystem::path& path, const SpectrumTrace& trace,
                     std::span<const std::string> comments = {});

// ---------------------------------------------------------------------------
// Scan CSV: header `time_s,transmission`.

AiryScan parse_scan_csv(std::istream& in, double f_mod_hz);
AiryScan read_scan_csv(const std::filesystem::path& path, double f_mod_hz);
void write_scan_csv(std::ostream& out, const AiryScan& scan, std::span<const std::string> comments = {});

// ---------------------------------------------------------------------------
// Budget files: one `label = value` per line, `#` starts a comment. Values:
//   0.975          efficiency
//   97.5%          efficiency in percent
//   2.5% loss      loss in percent

LossBudget parse_budget(std::istream& in);
LossBudget read_budget_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Key-value documents: `key = value` lines and `#` comments, order preserved.
// Used for reports, run headers, and model parameter files.

class KeyValueDocument {
 public:
  void comment(std::string text);
  void set(std::string key, std::string value);
  void set(std::string key, double value);
  void set(std::string key, std::int64_t value);
  void set(std::string key, std::uint64_t value);
  void set(std::string key, int value) { set(std::move(key), static_cast<std::int64_t>(value)); }
  void set(std::string key, bool value);

  std::optional<std::string> get(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool contains(std::string_view key) const { return get(key).has_value(); }

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
  const std::vector<std::string>& comments() const noexcept { return comments_; }

  void write(std::ostream& out) const;
  std::string str() const;
  static KeyValueDocument parse(std::istream& in);
  static KeyValueDocument read(const std::filesystem::path& path);

 private:
  std::vector<std::string> comments_;
  std::vector<std::pair<std::string, std::string>> entries_;
  // Interleaving of comments and entries for faithful output.
  std::vector<std::pair<bool, std::size_t>> order_;
};

/// Writes the four chain parameters under keys eta, gamma_hz, kappa_hz,
/// pump_ratio.
void put_model(KeyValueDocument& doc, const ChainModel& model);
/// Reads a model written by put_model; validates it.
ChainModel get_model(const KeyValueDocument& doc);

// ---------------------------------------------------------------------------
// Sample dumps: 16-byte little-endian header then raw float64 samples.
//   bytes 0-3   magic "UPSQ"
//   bytes 4-7   uint32 format version (1)
//   bytes 8-15  uint64 sample count

inline constexpr std::uint32_t kSampleDumpVersion = 1;

void write_sample_dump(std::ostream& out, std::span<const double> samples);
void write_sample_dump(const std::filesystem::path& path, std::span<const double> samples);
std::vector<double> read_sample_dump(std::istream& in);
std::vector<double> read_sample_dump(const std::filesystem::path& path);

}  // namespace upsq::io
