#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace mcsadapt::cli {

struct Context {
  RunConfig config;
  std::string hash;
  unsigned threads = 1;
  std::ostream* out = nullptr;
};

/// Model selection shared by train, evaluate, importance, the sweeps and
/// hyperopt.
struct ModelChoice {
  std::string kind;
  std::string loss = "quantile";
  std::optional<double> tau;
  std::string model_config;  // path to a frozen config, overrides kind/loss
};

struct EvaluateOptions {
  ModelChoice model;
  bool oracle = false;
  std::optional<int> fixed_mcs;
};

struct SweepOptions {
  std::string loss = "quantile";
  std::string order_from;            // importance CSV; empty = output dir or recompute
  std::vector<std::size_t> sizes;    // overrides the configured sizes
};

struct HyperoptOptions {
  ModelChoice model;
  std::optional<int> iterations;
  std::string space;
};

struct SynthOptions {
  std::string dir;
  int rounds = 3;
  int sweeps_per_round = 400;
};

// Each returns the process exit code; errors propagate as exceptions.
int cmd_ingest(const Context& ctx);
int cmd_stats(const Context& ctx);
int cmd_train(const Context& ctx, const ModelChoice& model);
int cmd_evaluate(const Context& ctx, const EvaluateOptions& opt);
int cmd_importance(const Context& ctx, const ModelChoice& model);
int cmd_sweep_features(const Context& ctx, const SweepOptions& opt);
int cmd_sweep_samples(const Context& ctx, const SweepOptions& opt);
int cmd_hyperopt(const Context& ctx, const HyperoptOptions& opt);
int cmd_report(const Context& ctx);
int cmd_synth(const Context& ctx, const SynthOptions& opt);

}  // namespace mcsadapt::cli
