#include "metroscope/sweep_config.hpp"

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>

namespace metroscope {

namespace {

std::string trim(const std::string& s) {
  const std::size_t begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const std::size_t end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(int line, const std::string& message) {
  raise(ErrorCode::InvalidArgument,
        "config line " + std::to_string(line) + ": " + message);
}

double parse_finite(int line, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (value.empty()) fail(line, "empty value for '" + key + "'");
  char* end = nullptr;
  const double parsed = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size())
    fail(line, "value '" + value + "' for '" + key + "' is not a number");
  if (!std::isfinite(parsed))
    fail(line, "value for '" + key + "' must be finite");
  return parsed;
}

std::vector<double> parse_list(int line, const std::string& key,
                               const std::string& value) {
  std::vector<double> values;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ','))
    values.push_back(parse_finite(line, key, item));
  if (values.empty()) fail(line, "empty list for '" + key + "'");
  return values;
}

std::vector<int> parse_int_list(int line, const std::string& key,
                                const std::string& value) {
  std::vector<int> values;
  for (double v : parse_list(line, key, value)) {
    if (v != std::floor(v) || v < 1.0 || v > 1e9)
      fail(line, "'" + key + "' entries must be positive integers");
    values.push_back(static_cast<int>(v));
  }
  return values;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text,
                                         double default_epsilon) {
  ExperimentConfig config;
  config.spec.budget.epsilon = default_epsilon;

  bool in_sweep_section = false;
  bool family_set = false;
  std::set<std::string> seen;

  std::stringstream stream(text);
  std::string raw;
  int line_number = 0;
  while (std::getline(stream, raw)) {
    ++line_number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_number, "unterminated section header");
      const std::string section = trim(line.substr(1, line.size() - 2));
      if (section != "sweep")
        fail(line_number, "unknown section '" + section + "' (expected [sweep])");
      in_sweep_section = true;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(line_number, "expected 'key = value', got '" + line + "'");
    if (!in_sweep_section)
      fail(line_number, "key outside the [sweep] section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_number, "missing key before '='");
    if (!seen.insert(key).second)
      fail(line_number, "duplicate key '" + key + "'");

    if (key == "family") {
      try {
        config.spec.family = parse_family(value);
      } catch (const Error& e) {
        fail(line_number, e.what());
      }
      family_set = true;
    } else if (key == "k") {
      config.spec.k_values = parse_list(line_number, key, value);
    } else if (key == "N") {
      config.spec.n_values = parse_int_list(line_number, key, value);
    } else if (key == "nbar") {
      config.spec.nbar_values = parse_list(line_number, key, value);
    } else if (key == "alpha") {
      config.spec.alpha_values = parse_list(line_number, key, value);
    } else if (key == "scenario") {
      try {
        config.spec.scenario = parse_scenario(value);
      } catch (const Error& e) {
        fail(line_number, e.what());
      }
    } else if (key == "delta") {
      config.spec.delta = parse_finite(line_number, key, value);
    } else if (key == "epsilon") {
      config.spec.budget.epsilon = parse_finite(line_number, key, value);
    } else if (key == "theta_max") {
      config.spec.theta_max = parse_finite(line_number, key, value);
    } else if (key == "output") {
      if (value.empty()) fail(line_number, "empty output path");
      config.output_path = value;
    } else {
      fail(line_number,
           "unknown key '" + key +
               "' (valid: family, k, N, nbar, alpha, scenario, delta, "
               "epsilon, theta_max, output)");
    }
  }

  if (!in_sweep_section)
    raise(ErrorCode::InvalidArgument, "config is missing the [sweep] section");
  if (!family_set)
    raise(ErrorCode::InvalidArgument, "config is missing the family key");
  validate_sweep_spec(config.spec);
  return config;
}

}  // namespace metroscope
