#include "plcurate/config.hpp"

#include <charconv>
#include <cmath>

namespace plcurate::config {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

struct Value {
  enum class Kind { Number, Boolean, String, NumberArray } kind;
  double number = 0;
  bool boolean = false;
  std::string text;
  std::vector<double> array;
};

double parse_number(std::string_view raw, std::size_t line_no) {
  const std::string_view s = trim(raw);
  double v = 0;
  const auto* begin = s.data();
  if (begin != s.data() + s.size() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("config line " + std::to_string(line_no) + ": cannot parse number '" +
                      std::string(s) + "'");
  return v;
}

Value parse_value(std::string_view raw, std::size_t line_no) {
  const std::string_view s = trim(raw);
  if (s.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty value");
  Value v;
  v.kind = Value::Kind::Number;
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      throw ConfigError("config line " + std::to_string(line_no) + ": unterminated string");
    v.kind = Value::Kind::String;
    v.text = std::string(s.substr(1, s.size() - 2));
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = Value::Kind::Boolean;
    v.boolean = s == "true";
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']')
      throw ConfigError("config line " + std::to_string(line_no) + ": unterminated array");
    v.kind = Value::Kind::NumberArray;
    std::string_view body = s.substr(1, s.size() - 2);
    while (!body.empty()) {
      const std::size_t comma = body.find(',');
      const std::string_view item =
          comma == std::string_view::npos ? body : body.substr(0, comma);
      if (!trim(item).empty()) v.array.push_back(parse_number(item, line_no));
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
    return v;
  }
  v.number = parse_number(s, line_no);
  return v;
}

}  // namespace

void PipelineConfig::validate() const {
  auto in_unit = [](const char* name, double v) {
    if (v < 0.0 || v > 1.0)
      throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  in_unit("confidence_threshold", confidence_threshold);
  in_unit("tanimoto_cutoff", tanimoto_cutoff);
  in_unit("failure_exit_fraction", failure_exit_fraction);
  if (pocket_rmsd_threshold <= 0) throw ConfigError("pocket_rmsd_threshold must be positive");
  if (hybrid_low > hybrid_high) throw ConfigError("hybrid_low must not exceed hybrid_high");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (similarity_bins.size() < 2) throw ConfigError("similarity_bins needs at least two edges");
  for (std::size_t i = 1; i < similarity_bins.size(); ++i)
    if (similarity_bins[i] <= similarity_bins[i - 1])
      throw ConfigError("similarity_bins must be strictly ascending");
  if (bond_tolerance <= 0 || bond_tolerance >= 1)
    throw ConfigError("bond_tolerance must lie in (0, 1)");
  if (clash_factor <= 0 || clash_factor >= 1)
    throw ConfigError("clash_factor must lie in (0, 1)");
  if (bootstrap_samples < 1) throw ConfigError("bootstrap_samples must be positive");
  if (ci_level <= 0 || ci_level >= 1) throw ConfigError("ci_level must lie in (0, 1)");
  if (min_series_size < 1) throw ConfigError("min_series_size must be positive");
}

PipelineConfig load_config_toml(std::string_view text, PipelineConfig base) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line =
        nl == std::string_view::npos ? text.substr(start) : text.substr(start, nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section");
      continue;  // sections are organisational only
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key{trim(line.substr(0, eq))};
    const Value value = parse_value(line.substr(eq + 1), line_no);

    auto number = [&]() {
      if (value.kind != Value::Kind::Number)
        throw ConfigError("config line " + std::to_string(line_no) + ": '" + key +
                          "' expects a number");
      return value.number;
    };
    auto integer = [&]() {
      const double v = number();
      if (v != std::floor(v))
        throw ConfigError("config line " + std::to_string(line_no) + ": '" + key +
                          "' expects an integer");
      return v;
    };

    if (key == "confidence_threshold") base.confidence_threshold = number();
    else if (key == "pocket_rmsd_threshold") base.pocket_rmsd_threshold = number();
    else if (key == "tanimoto_cutoff") base.tanimoto_cutoff = number();
    else if (key == "hybrid_low") base.hybrid_low = number();
    else if (key == "hybrid_high") base.hybrid_high = number();
    else if (key == "similarity_bins") {
      if (value.kind != Value::Kind::NumberArray)
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": similarity_bins expects an array");
      base.similarity_bins = value.array;
    } else if (key == "workers") base.workers = static_cast<int>(integer());
    else if (key == "seed") base.seed = static_cast<std::uint64_t>(integer());
    else if (key == "failure_exit_fraction") base.failure_exit_fraction = number();
    else if (key == "compute_plausibility") {
      if (value.kind != Value::Kind::Boolean)
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": compute_plausibility expects true/false");
      base.compute_plausibility = value.boolean;
    } else if (key == "bond_tolerance") base.bond_tolerance = number();
    else if (key == "clash_factor") base.clash_factor = number();
    else if (key == "radius_table_path") {
      if (value.kind != Value::Kind::String)
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": radius_table_path expects a string");
      base.radius_table_path = value.text;
    } else if (key == "bootstrap_samples") base.bootstrap_samples = static_cast<int>(integer());
    else if (key == "ci_level") base.ci_level = number();
    else if (key == "min_series_size") base.min_series_size = static_cast<int>(integer());
    else
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  base.validate();
  return base;
}

}  // namespace plcurate::config
