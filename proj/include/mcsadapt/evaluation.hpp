#pragma once

// Leave-one-round-out evaluation of MCS predictors, permutation importance,
// feature correlation and the feature-count / training-size sweeps.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcsadapt/goodput.hpp"
#include "mcsadapt/ingest.hpp"
#include "mcsadapt/matrix.hpp"
#include "mcsadapt/regress/model.hpp"

namespace mcsadapt::evaluation {

using ingest::Dataset;

struct CvFold {
  int test_round = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// One fold per distinct round, ordered by round id. Throws ConfigError with
/// fewer than two rounds.
std::vector<CvFold> logo_folds(const Dataset& ds);

// A learner sees only the training split; the predictor it returns sees only
// test features.
using Predictor = std::function<std::vector<double>(const Matrix&)>;
using Learner =
    std::function<Predictor(const FeatureMatrix& train, std::uint64_t seed, unsigned threads)>;

Learner model_learner(const regress::ModelConfig& config);
/// Predicts `mcs` for every row.
Learner constant_learner(double mcs);

struct FoldScore {
  int round_id = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double mean_goodput_bps = 0.0;
};

struct ImportanceEntry {
  std::string feature;
  double delta_bps = 0.0;
};

struct CorrelationEntry {
  std::string feature;
  std::optional<double> r;  // nullopt for zero-variance columns
};

struct CurvePoint {
  double x = 0.0;
  std::string series;
  double mean = 0.0;
  double sdom = 0.0;
};

struct EvalReport {
  std::vector<FoldScore> per_fold;
  double aggregate_bps = 0.0;  // unweighted mean over folds
  goodput::GoodputReport baseline;
  /// Out-of-fold prediction of every sample, in dataset order.
  std::vector<double> predictions;
  std::vector<ImportanceEntry> importance;
  std::vector<CorrelationEntry> correlation;
  std::vector<CurvePoint> curves;
};

/// Seed handed to the learner of the fold testing `round`.
std::uint64_t fold_seed(std::uint64_t seed, int round);

/// Fits on each fold's training rounds and scores the held-out round. Folds
/// run in parallel. A numerical failure is rethrown naming the fold.
EvalReport evaluate_model(const Dataset& ds, const Learner& learner,
                          const goodput::TbsTable& table, std::uint64_t seed,
                          unsigned threads = 1);
EvalReport evaluate_model(const Dataset& ds, const regress::ModelConfig& config,
                          const goodput::TbsTable& table, std::uint64_t seed,
                          unsigned threads = 1);

/// Reorders test rows of one column; the default is a seeded Fisher-Yates
/// shuffle. Tests may pass an identity permutation.
using Permuter = std::function<void(std::span<std::size_t> order, Rng& rng)>;

/// Mean goodput drop when one feature is shuffled within the test round,
/// averaged over folds and repeats, sorted by decreasing drop (ties keep
/// column order). Throws ConfigError when n_repeats < 1.
std::vector<ImportanceEntry> permutation_importance(const Dataset& ds, const Learner& learner,
                                                    const goodput::TbsTable& table,
                                                    int n_repeats, std::uint64_t seed,
                                                    unsigned threads = 1,
                                                    const Permuter& permute = {});

/// Pearson r of every feature column against target_mcs.
std::vector<CorrelationEntry> pearson_correlation(const Dataset& ds);
double pearson(std::span<const double> a, std::span<const double> b);

struct NamedLearner {
  std::string name;
  Learner learner;
};

/// For N = 1..|order|, evaluates every learner on the N leading features of
/// `order`. x = N, mean = aggregate, sdom over folds. Throws ConfigError on an
/// empty order or unknown feature names.
std::vector<CurvePoint> feature_count_sweep(const Dataset& ds,
                                            std::span<const NamedLearner> learners,
                                            std::span<const std::string> order,
                                            const goodput::TbsTable& table,
                                            std::uint64_t seed, unsigned threads = 1);

/// For every size, subsamples each fold's training split without replacement
/// (`repeats` times), fits and scores the untouched test round. mean and sdom
/// run over folds x repeats. Throws ConfigError when a size is < 1 or exceeds
/// the smallest training split.
std::vector<CurvePoint> training_size_sweep(const Dataset& ds,
                                            std::span<const NamedLearner> learners,
                                            std::span<const std::size_t> sizes,
                                            const goodput::TbsTable& table,
                                            std::uint64_t seed, unsigned threads = 1,
                                            int repeats = 5);

/// Mean and standard deviation of the mean (sample std / sqrt(n); 0 if n < 2).
std::pair<double, double> mean_sdom(std::span<const double> values);

void write_curves_csv(std::ostream& out, std::span<const CurvePoint> curves);
void write_correlation_csv(std::ostream& out, std::span<const CorrelationEntry> entries);
void write_importance_csv(std::ostream& out, std::span<const ImportanceEntry> entries);

nlohmann::json to_json(const EvalReport& report);

}  // namespace mcsadapt::evaluation
