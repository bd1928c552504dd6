#pragma once

// Random hyperparameter search scored by leave-one-round-out goodput.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcsadapt/goodput.hpp"
#include "mcsadapt/ingest.hpp"
#include "mcsadapt/random.hpp"
#include "mcsadapt/regress/model.hpp"

namespace mcsadapt::hyperopt {

struct Distribution {
  enum class Kind { kUniform, kLogUniform, kIntUniform, kChoice };
  Kind kind = Kind::kUniform;
  double lo = 0.0;
  /// Exclusive for integer-uniform: int-uniform(3, 4) always draws 3.
  double hi = 1.0;
  nlohmann::json choices = nlohmann::json::array();

  static Distribution uniform(double lo, double hi) { return {Kind::kUniform, lo, hi, {}}; }
  static Distribution log_uniform(double lo, double hi) { return {Kind::kLogUniform, lo, hi, {}}; }
  static Distribution int_uniform(long long lo, long long hi) {
    return {Kind::kIntUniform, static_cast<double>(lo), static_cast<double>(hi), {}};
  }
  static Distribution choice(nlohmann::json options) {
    return {Kind::kChoice, 0.0, 0.0, std::move(options)};
  }
};

/// Parameter name -> distribution; iteration (and sampling) in name order.
struct ParamSpace {
  std::map<std::string, Distribution> entries;
  /// Throws ConfigError: lo < hi, log-uniform lo > 0, integer bounds
  /// integral, non-empty choices, "tau" confined to (0, 1).
  void validate() const;
};

/// {"name": {"type": "uniform|log-uniform|int-uniform|choice", "lo", "hi",
/// "values": [...]}, ...}
ParamSpace space_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParamSpace& space);
ParamSpace load_space(const std::string& path);

/// One draw per entry in name order.
nlohmann::json sample_config(const ParamSpace& space, Rng& rng);

/// Default search space of a model kind for a dataset with `dim` features.
ParamSpace default_space(regress::ModelKind kind, std::size_t dim);

/// Model config from sampled parameters. "tau" sets the quantile of a
/// quantile loss (ignored otherwise); for MLPs, n_layers and width_1.. build
/// the layer list and learning_rate sets Adam's step size. Other names must
/// be hyperparameters of the kind. Throws ConfigError.
regress::ModelConfig apply_params(regress::ModelKind kind, const regress::LossMode& loss,
                                  const nlohmann::json& params);

struct TrialResult {
  int trial = 0;
  nlohmann::json params;
  std::optional<double> score_bps;  // nullopt when the trial failed
  std::uint64_t seed = 0;
  std::string error;
};

struct SearchResult {
  std::vector<TrialResult> trials;
  std::size_t best = 0;
  const TrialResult& best_trial() const { return trials.at(best); }
};

/// Seed and parameter stream of trial `index`.
std::uint64_t trial_seed(std::uint64_t master, int index);

/// Trial i draws its parameters from its own substream, so each trial can be
/// re-evaluated alone. The best trial is the earliest with the highest score.
/// Failed trials are logged and skipped; throws NumericalError if all fail
/// and ConfigError when n_iter < 1.
SearchResult random_search(const ingest::Dataset& ds, regress::ModelKind kind,
                           const regress::LossMode& loss, const ParamSpace& space, int n_iter,
                           const goodput::TbsTable& table, std::uint64_t master_seed,
                           unsigned threads = 1);

/// trial,params-json,score_bps,seed
void write_trial_log(std::ostream& out, const SearchResult& result);

}  // namespace mcsadapt::hyperopt
