#pragma once

#include <string>

#include "metroscope/scaling.hpp"

namespace metroscope {

/// A parsed experiment config: the sweep grid plus the output path.
struct ExperimentConfig {
  SweepSpec spec;
  std::string output_path;
};

/// Parses the line-oriented `key = value` config format with a single
/// [sweep] section header. Accepted keys: family, k, N, nbar, alpha,
/// scenario, delta, epsilon, theta_max, output. Lists are comma-separated;
/// blank lines and #-comments are ignored. Unknown keys, malformed values,
/// and grid violations are rejected with the offending line number.
/// `default_epsilon` seeds the series budget when the config has no epsilon
/// key.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         double default_epsilon = 1e-12);

}  // namespace metroscope
