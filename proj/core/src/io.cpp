#include "upsq/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "upsq/error.hpp"

namespace upsq::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) raise(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) raise(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) raise(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  raise(ErrorKind::Io, "line " + std::to_string(line_no) + ": " + what);
}

// Reads non-blank, non-comment lines with their line numbers.
std::vector<std::pair<std::size_t, std::string>> content_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    lines.emplace_back(n, std::string(t));
  }
  return lines;
}

void write_comments(std::ostream& out, std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  const auto t = trim(text);
  double v = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (t.empty() || res.ec != std::errc() || res.ptr != end) {
    raise(ErrorKind::InvalidArgument,
          "cannot parse " + std::string(what) + " from '" + std::string(t) + "'");
  }
  return v;
}

// --- traces ----------------------------------------------------------------

SpectrumTrace parse_trace_csv(std::istream& in, TraceKind kind) {
  const auto lines = content_lines(in);
  if (lines.empty()) raise(ErrorKind::Io, "trace file is empty");
  const auto header = split(lines.front().second, ',');
  if (header.size() < 2 || header[0] != "frequency_hz" || header[1] != "power" ||
      (header.size() >= 3 && header[2] != "unit") || (header.size() >= 4 && header[3] != "valid") ||
      header.size() > 4) {
    parse_error(lines.front().first, "expected header 'frequency_hz,power[,unit[,valid]]'");
  }
  std::vector<double> f, p;
  std::vector<bool> valid;
  std::optional<PowerUnit> unit;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [line_no, text] = lines[k];
    const auto cols = split(text, ',');
    if (cols.size() != header.size()) parse_error(line_no, "column count differs from header");
    try {
      f.push_back(parse_double(cols[0], "frequency_hz"));
      p.push_back(parse_double(cols[1], "power"));
      const PowerUnit row_unit = header.size() >= 3 ? parse_power_unit(cols[2]) : PowerUnit::Linear;
      if (unit && *unit != row_unit) parse_error(line_no, "mixed units within one trace");
      unit = row_unit;
      if (header.size() == 4) {
        if (cols[3] != "0" && cols[3] != "1") parse_error(line_no, "valid column must be 0 or 1");
        valid.push_back(cols[3] == "1");
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Io) throw;
      parse_error(line_no, e.what());
    }
  }
  if (f.empty()) raise(ErrorKind::Io, "trace file has a header but no samples");
  try {
    return SpectrumTrace(std::move(f), std::move(p), std::move(valid), unit.value_or(PowerUnit::Linear), kind);
  } catch (const Error& e) {
    raise(ErrorKind::Io, std::string("malformed trace: ") + e.what());
  }
}

SpectrumTrace read_trace_csv(const std::filesystem::path& path, TraceKind kind) {
  auto in = open_in(path);
  try {
    return parse_trace_csv(in, kind);
  } catch (const Error& e) {
    raise(e.kind(), path.string() + ": " + e.what());
  }
}

void write_trace_csv(std::ostream& out, const SpectrumTrace& trace, std::span<const std::string> comments) {
  write_comments(out, comments);
  const bool with_valid = trace.valid_count() != trace.size();
  out << "frequency_hz,power,unit" << (with_valid ? ",valid" : "") << '\n';
  const auto unit = to_string(trace.unit());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << format_double(trace.freqs_hz()[i]) << ',' << format_double(trace.power()[i]) << ',' << unit;
    if (with_valid) out << ',' << (trace.is_valid(i) ? '1' : '0');
    out << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const SpectrumTrace& trace,
                     std::span<const std::string> comments) {
  auto out = open_out(path);
  write_trace_csv(out, trace, comments);
  finish(out, path);
}

// --- scans -----------------------------------------------------------------

AiryScan parse_scan_csv(std::istream& in, double f_mod_hz) {
  const auto lines = content_lines(in);
  if (lines.empty()) raise(ErrorKind::Io, "scan file is empty");
  const auto header = split(lines.front().second, ',');
  if (header.size() != 2 || header[0] != "time_s" || header[1] != "transmission") {
    parse_error(lines.front().first, "expected header 'time_s,transmission'");
  }
  AiryScan scan;
  scan.f_mod_hz = f_mod_hz;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [line_no, text] = lines[k];
    const auto cols = split(text, ',');
    if (cols.size() != 2) parse_error(line_no, "expected two columns");
    try {
      scan.time_s.push_back(parse_double(cols[0], "time_s"));
      scan.transmission.push_back(parse_double(cols[1], "transmission"));
    } catch (const Error& e) {
      parse_error(line_no, e.what());
    }
  }
  return scan;
}

AiryScan read_scan_csv(const std::filesystem::path& path, double f_mod_hz) {
  auto in = open_in(path);
  try {
    return parse_scan_csv(in, f_mod_hz);
  } catch (const Error& e) {
    raise(e.kind(), path.string() + ": " + e.what());
  }
}

void write_scan_csv(std::ostream& out, const AiryScan& scan, std::span<const std::string> comments) {
  write_comments(out, comments);
  out << "time_s,transmission\n";
  for (std::size_t i = 0; i < scan.time_s.size(); ++i)
    out << format_double(scan.time_s[i]) << ',' << format_double(scan.transmission[i]) << '\n';
}

// --- budgets ---------------------------------------------------------------

LossBudget parse_budget(std::istream& in) {
  LossBudget budget;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = std::string_view(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) parse_error(line_no, "expected 'label = value'");
    const auto label = std::string(trim(text.substr(0, eq)));
    auto value = trim(text.substr(eq + 1));
    if (label.empty()) parse_error(line_no, "empty label");

    bool loss = false;
    bool percent = false;
    if (value.size() >= 4 && value.substr(value.size() - 4) == "loss") {
      loss = true;
      value = trim(value.substr(0, value.size() - 4));
    }
    if (!value.empty() && value.back() == '%') {
      percent = true;
      value = trim(value.substr(0, value.size() - 1));
    }
    if (loss && !percent) parse_error(line_no, "loss values must be given in percent, e.g. '2.5% loss'");
    double number = 0.0;
    try {
      number = parse_double(value, "efficiency of '" + label + "'");
    } catch (const Error& e) {
      parse_error(line_no, e.what());
    }
    if (loss) {
      budget.add(LossElement::from_loss_percent(label, number));
    } else {
      budget.add(LossElement::from_efficiency(label, percent ? number / 100.0 : number));
    }
  }
  return budget;
}

LossBudget read_budget_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_budget(in);
}

// --- key-value documents -----------------------------------------------------

void KeyValueDocument::comment(std::string text) {
  order_.emplace_back(false, comments_.size());
  comments_.push_back(std::move(text));
}

void KeyValueDocument::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  order_.emplace_back(true, entries_.size());
  entries_.emplace_back(std::move(key), std::move(value));
}

void KeyValueDocument::set(std::string key, double value) { set(std::move(key), format_double(value)); }
void KeyValueDocument::set(std::string key, std::int64_t value) { set(std::move(key), std::to_string(value)); }
void KeyValueDocument::set(std::string key, std::uint64_t value) { set(std::move(key), std::to_string(value)); }
void KeyValueDocument::set(std::string key, bool value) {
  set(std::move(key), std::string(value ? "true" : "false"));
}

std::optional<std::string> KeyValueDocument::get(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

double KeyValueDocument::get_double(std::string_view key) const {
  const auto v = get(key);
  if (!v) raise(ErrorKind::InvalidArgument, "missing key '" + std::string(key) + "'");
  return parse_double(*v, key);
}

void KeyValueDocument::write(std::ostream& out) const {
  for (const auto& [is_entry, idx] : order_) {
    if (is_entry) {
      out << entries_[idx].first << " = " << entries_[idx].second << '\n';
    } else {
      out << "# " << comments_[idx] << '\n';
    }
  }
}

std::string KeyValueDocument::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

KeyValueDocument KeyValueDocument::parse(std::istream& in) {
  KeyValueDocument doc;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      doc.comment(std::string(trim(t.substr(1))));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) parse_error(line_no, "expected 'key = value'");
    doc.set(std::string(trim(t.substr(0, eq))), std::string(trim(t.substr(eq + 1))));
  }
  return doc;
}

KeyValueDocument KeyValueDocument::read(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse(in);
}

void put_model(KeyValueDocument& doc, const ChainModel& model) {
  doc.set("eta", model.eta);
  doc.set("gamma_hz", model.gamma_hwhm_hz);
  doc.set("kappa_hz", model.kappa_hwhm_hz);
  doc.set("pump_ratio", model.pump_ratio);
}

ChainModel get_model(const KeyValueDocument& doc) {
  return ChainModel::make(doc.get_double("eta"), doc.get_double("gamma_hz"),
                          doc.get_double("kappa_hz"), doc.get_double("pump_ratio"));
}

// --- sample dumps ----------------------------------------------------------

namespace {

constexpr std::array<char, 4> kMagic = {'U', 'P', 'S', 'Q'};

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) raise(ErrorKind::Io, "sample dump truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void write_sample_dump(std::ostream& out, std::span<const double> samples) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kSampleDumpVersion);
  put_le<std::uint64_t>(out, samples.size());
  for (double v : samples) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
}

void write_sample_dump(const std::filesystem::path& path, std::span<const double> samples) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  write_sample_dump(out, samples);
  finish(out, path);
}

std::vector<double> read_sample_dump(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) raise(ErrorKind::Io, "not a sample dump (bad magic)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kSampleDumpVersion)
    raise(ErrorKind::Io, "unsupported sample dump version " + std::to_string(version));
  const auto count = get_le<std::uint64_t>(in);
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t i = 0; i < count; ++i) samples.push_back(std::bit_cast<double>(get_le<std::uint64_t>(in)));
  return samples;
}

std::vector<double> read_sample_dump(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  return read_sample_dump(in);
}

}  // namespace upsq::io
