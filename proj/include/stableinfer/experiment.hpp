#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stableinfer/bayes_engine.hpp"
#include "stableinfer/series_sampler.hpp"

namespace stableinfer {

enum class ExperimentKind {
  figure2,
  radial_demo,
  ratio_demo,
  three_series,
  summability,
  flom,
  bayes_run,
  data_sweep,
  likelihood_sweep,
  kl_table,
};

const char* to_string(ExperimentKind k);

/// A validated experiment: the full parameter object with every default
/// filled in.  `to_text` and `validate_config` round-trip it exactly.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::figure2;
  nlohmann::json params;

  std::uint64_t seed() const { return params.at("seed").get<std::uint64_t>(); }
  std::filesystem::path output_dir() const { return params.at("output_dir").get<std::string>(); }
  void set_seed(std::uint64_t seed) { params["seed"] = seed; }
  void set_output_dir(const std::string& dir) { params["output_dir"] = dir; }

  /// Canonical text (sorted keys, two-space indent).
  std::string to_text() const;
  /// FNV-1a of the compact canonical dump without output_dir.
  std::uint64_t hash() const;

  bool operator==(const ExperimentConfig& other) const {
    return kind == other.kind && params == other.params;
  }
};

/// Parses and cross-checks a configuration.  Throws ConfigParse naming the
/// field and, when it can be located, the line.
ExperimentConfig validate_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builders shared with tests; `where` prefixes error field names.
CoefficientSequence sequence_from_json(const nlohmann::json& j, const std::string& where = "");
StableFieldSpec prior_from_json(const nlohmann::json& j, const std::string& where = "prior");
GaussianAdditivePotential likelihood_from_json(const nlohmann::json& j,
                                               const std::string& where = "likelihood");

struct RunManifest {
  std::filesystem::path directory;
  std::vector<std::pair<std::string, std::uint64_t>> files;  // name, FNV-1a of the bytes
  double wall_seconds = 0.0;
  std::uint64_t config_hash = 0;
};

/// Runs the experiment into config.output_dir() and writes manifest.json
/// there.  Module errors are rethrown as NumericError carrying the
/// experiment kind; file problems raise IoFailure.
RunManifest run(const ExperimentConfig& config);

/// FNV-1a of a file's bytes.  Throws IoFailure.
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace stableinfer
