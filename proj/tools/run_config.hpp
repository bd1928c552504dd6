#pragma once

// Run configuration of the mcsadapt command line: file paths, pipeline
// options, model hyperparameters and seeds, plus the config hash embedded in
// every output.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcsadapt/ingest.hpp"
#include "mcsadapt/regress/model.hpp"

namespace mcsadapt::cli {

namespace fs = std::filesystem;

struct RunSpec {
  regress::ModelKind kind;
  regress::LossMode::Kind loss;
};

struct RunConfig {
  nlohmann::json raw = nlohmann::json::object();

  std::optional<fs::path> trace, gps, polygons, rounds, tbs_table, dataset;
  fs::path output_dir = "out";

  ingest::TraceSchema schema;
  ingest::PipelineOptions pipeline;

  double distance_bin_m = 25.0;
  std::optional<double> kde_bandwidth;
  std::size_t kde_grid_points = 256;

  /// Restricts the learning features, in this order, when non-empty.
  std::vector<std::string> features;
  double tau = 0.3;
  /// Per-kind hyperparameter overrides, keyed by kind name.
  nlohmann::json models = nlohmann::json::object();

  int importance_repeats = 5;
  std::string importance_model = "gbt";
  std::vector<std::string> sweep_models = {"linear", "qrf", "gbt", "mlp"};
  std::vector<std::size_t> sweep_sizes;
  int sweep_repeats = 5;
  int hyperopt_iterations = 100;
  nlohmann::json spaces = nlohmann::json::object();
  std::vector<RunSpec> report_runs;

  std::uint64_t seed = 1;
};

/// Parses a config document; relative paths resolve against `base_dir`.
/// Throws ConfigError on unknown keys or malformed values.
RunConfig parse_run_config(const nlohmann::json& j, const fs::path& base_dir);
RunConfig load_run_config(const fs::path& path);

/// Canonical description of the effective configuration.
nlohmann::json effective_json(const RunConfig& c);
/// fnv1a64 of the canonical description, as 16 hex digits.
std::string config_hash(const RunConfig& c);

/// Model config of `kind` with `loss`, the configured tau and the per-kind
/// overrides of the run config.
regress::ModelConfig model_config(const RunConfig& c, regress::ModelKind kind,
                                  regress::LossMode::Kind loss);

regress::LossMode::Kind loss_kind_from_string(const std::string& s);
std::string loss_kind_name(regress::LossMode::Kind k);

/// Throws ConfigError naming `what` unless `p` is set and exists.
const fs::path& require_file(const std::optional<fs::path>& p, const std::string& what);

}  // namespace mcsadapt::cli
