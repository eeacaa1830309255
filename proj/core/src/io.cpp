#include "flsa/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "flsa/errors.hpp"

namespace flsa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && !s.empty();
}

bool parse_size(std::string_view s, std::size_t& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && !s.empty();
}

[[noreturn]] void fail_line(const char* what, std::size_t line_no) {
  throw InvalidInput(std::string(what) + " at line " + std::to_string(line_no));
}

// Collects non-empty lines; reports whether the first looks like a
// header (leading field not numeric).
std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (trim(line).empty()) {
      lines.push_back("");  // keep numbering aligned with the file
      continue;
    }
    lines.push_back(line);
  }
  return lines;
}

bool looks_like_header(const std::string& line) {
  const auto fields = split_fields(line);
  double v;
  return !fields.empty() && !parse_double(fields[0], v);
}

std::ifstream open_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput("cannot open '" + path + "'");
  }
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<Block> read_blocks_csv(std::istream& in) {
  const auto lines = read_lines(in);
  std::vector<Block> blocks;
  bool first_data = true;
  for (std::size_t t = 0; t < lines.size(); ++t) {
    if (lines[t].empty()) {
      continue;
    }
    if (first_data && looks_like_header(lines[t])) {
      first_data = false;
      continue;
    }
    first_data = false;
    const auto fields = split_fields(lines[t]);
    if (fields.size() != 3) {
      fail_line("expected 3 fields (L,U,level)", t + 1);
    }
    Block b;
    if (!parse_size(fields[0], b.lo) || !parse_size(fields[1], b.hi)) {
      fail_line("bad block bounds", t + 1);
    }
    if (!parse_double(fields[2], b.level)) {
      fail_line("bad block level", t + 1);
    }
    blocks.push_back(b);
  }
  if (blocks.empty()) {
    throw InvalidInput("blocks file contains no data rows");
  }
  return blocks;
}

std::vector<Block> read_blocks_file(const std::string& path) {
  auto in = open_file(path);
  return read_blocks_csv(in);
}

void write_blocks_csv(std::ostream& out, const std::vector<Block>& blocks) {
  out << "L,U,level\n";
  for (const Block& b : blocks) {
    out << b.lo << ',' << b.hi << ',' << format_double(b.level) << '\n';
  }
}

std::vector<double> read_sequence_csv(std::istream& in) {
  const auto lines = read_lines(in);
  std::vector<double> values;
  bool first_data = true;
  for (std::size_t t = 0; t < lines.size(); ++t) {
    if (lines[t].empty()) {
      continue;
    }
    if (first_data && looks_like_header(lines[t])) {
      first_data = false;
      continue;
    }
    first_data = false;
    const auto fields = split_fields(lines[t]);
    if (fields.size() != 2) {
      fail_line("expected 2 fields (index,value)", t + 1);
    }
    std::size_t index;
    double value;
    if (!parse_size(fields[0], index)) {
      fail_line("bad index", t + 1);
    }
    if (index != values.size() + 1) {
      fail_line("indices must run 1..n consecutively", t + 1);
    }
    if (!parse_double(fields[1], value)) {
      fail_line("bad value", t + 1);
    }
    values.push_back(value);
  }
  if (values.empty()) {
    throw InvalidInput("sequence file contains no data rows");
  }
  return values;
}

std::vector<double> read_sequence_file(const std::string& path) {
  auto in = open_file(path);
  return read_sequence_csv(in);
}

void write_sequence_csv(std::ostream& out, std::span<const double> values) {
  out << "index,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << (i + 1) << ',' << format_double(values[i]) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "sigma,probability,stderr\n";
  for (const SweepPoint& p : points) {
    out << format_double(p.sigma) << ',' << format_double(p.probability) << ','
        << format_double(p.std_error) << '\n';
  }
}

void write_breakpoints_csv(std::ostream& out, std::span<const double> breakpoints) {
  out << "rank,lambda\n";
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    out << (i + 1) << ',' << format_double(breakpoints[i]) << '\n';
  }
}

void write_events_csv(std::ostream& out, const FusionPath& path) {
  out << "lambda,boundary\n";
  for (const auto& event : path.events()) {
    for (std::size_t b : event.boundaries) {
      out << format_double(event.lam) << ',' << b << '\n';
    }
  }
}

nlohmann::json to_json(const ICReport& report) {
  nlohmann::json j;
  j["n"] = report.jumps.n;
  j["jump_columns"] = report.jumps.columns;
  j["jump_signs"] = report.jumps.signs;
  j["holds"] = report.holds;
  j["strong_holds"] = report.strong_holds;
  j["structural_weak"] = report.structural_weak;
  j["structural_strong"] = report.structural_strong;
  j["max_abs_signed"] = report.max_abs_signed;
  j["max_l1"] = report.max_l1;
  j["argmax_column"] = report.argmax_column;
  j["columns"] = report.columns;
  j["signed_value"] = report.signed_value;
  j["l1_norm"] = report.l1_norm;
  return j;
}

nlohmann::json to_json(const StepwiseSignal& signal) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const Block& b : signal.blocks()) {
    blocks.push_back({{"lo", b.lo}, {"hi", b.hi}, {"level", b.level}});
  }
  return {{"n", signal.size()}, {"blocks", blocks}};
}

nlohmann::json to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["signal"] = to_json(config.signal);
  j["sigmas"] = config.sigmas;
  j["replicates"] = config.replicates;
  j["seed"] = config.seed;
  j["method"] = method_name(config.method);
  j["sign_tol"] = config.sign_tol;
  return j;
}

nlohmann::json to_json(const RecoveryResult& result) {
  nlohmann::json per_sigma = nlohmann::json::array();
  for (const SigmaRecovery& rec : result.per_sigma) {
    nlohmann::json r;
    r["sigma"] = rec.sigma;
    r["successes"] = rec.successes;
    r["probability"] = rec.probability;
    r["std_error"] = rec.std_error;
    std::string flags(rec.flags.size(), '0');
    for (std::size_t i = 0; i < rec.flags.size(); ++i) {
      if (rec.flags[i]) {
        flags[i] = '1';
      }
    }
    r["flags"] = flags;
    per_sigma.push_back(std::move(r));
  }
  nlohmann::json j;
  j["method"] = method_name(result.method);
  j["replicates"] = result.replicates;
  j["seed"] = result.seed;
  j["per_sigma"] = std::move(per_sigma);
  j["wall_seconds"] = result.wall_seconds;
  return j;
}

}  // namespace flsa
