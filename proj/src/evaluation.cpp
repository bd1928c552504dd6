#include "mcsadapt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "mcsadapt/csv.hpp"
#include "mcsadapt/error.hpp"
#include "mcsadapt/parallel.hpp"
#include "mcsadapt/random.hpp"

namespace mcsadapt::evaluation {

namespace {

Matrix test_features(const Dataset& ds, std::span<const std::size_t> rows) {
  Matrix x(rows.size(), ds.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = ds.features.row(rows[i]);
    std::copy(src.begin(), src.end(), x.row(i).begin());
  }
  return x;
}

std::vector<int> targets_of(const Dataset& ds, std::span<const std::size_t> rows) {
  std::vector<int> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) y[i] = ds.target_mcs[rows[i]];
  return y;
}

[[noreturn]] void rethrow_with_fold(int round) {
  const std::string prefix = "fold (test round " + std::to_string(round) + "): ";
  try {
    throw;
  } catch (const TrainingError& e) {
    throw TrainingError(prefix + e.what(), e.last_stable_epoch());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  }
}

struct FittedFold {
  Predictor predict;
  Matrix test_x;
  std::vector<int> test_y;
};

FittedFold fit_fold(const Dataset& ds, const CvFold& fold, const Learner& learner,
                    std::uint64_t seed) {
  const FeatureMatrix train = ds.to_feature_matrix(fold.train_indices);
  FittedFold out;
  try {
    out.predict = learner(train, fold_seed(seed, fold.test_round), 1);
  } catch (...) {
    rethrow_with_fold(fold.test_round);
  }
  out.test_x = test_features(ds, fold.test_indices);
  out.test_y = targets_of(ds, fold.test_indices);
  return out;
}

double score(const Predictor& predict, const Matrix& x, std::span<const int> y,
             const goodput::TbsTable& table) {
  const auto pred = predict(x);
  return goodput::mean_goodput(pred, y, table).mean_bps;
}

}  // namespace

std::vector<CvFold> logo_folds(const Dataset& ds) {
  const auto rounds = ds.rounds();
  if (rounds.size() < 2) {
    throw ConfigError("leave-one-round-out needs at least 2 rounds, found " +
                      std::to_string(rounds.size()));
  }
  std::vector<CvFold> folds;
  folds.reserve(rounds.size());
  for (int r : rounds) {
    CvFold f;
    f.test_round = r;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      (ds.round_id[i] == r ? f.test_indices : f.train_indices).push_back(i);
    }
    folds.push_back(std::move(f));
  }
  return folds;
}

Learner model_learner(const regress::ModelConfig& config) {
  return [config](const FeatureMatrix& train, std::uint64_t seed, unsigned threads) -> Predictor {
    auto model = std::make_shared<const regress::TrainedModel>(
        regress::fit(config, train, seed, threads));
    return [model](const Matrix& x) { return regress::predict(*model, x); };
  };
}

Learner constant_learner(double mcs) {
  return [mcs](const FeatureMatrix&, std::uint64_t, unsigned) -> Predictor {
    return [mcs](const Matrix& x) { return std::vector<double>(x.rows(), mcs); };
  };
}

std::uint64_t fold_seed(std::uint64_t seed, int round) {
  return derive_seed(seed, "fold", static_cast<std::uint64_t>(round));
}

EvalReport evaluate_model(const Dataset& ds, const Learner& learner,
                          const goodput::TbsTable& table, std::uint64_t seed,
                          unsigned threads) {
  ds.validate();
  const auto folds = logo_folds(ds);
  EvalReport report;
  report.per_fold.resize(folds.size());
  report.predictions.assign(ds.size(), 0.0);

  parallel_for(folds.size(), threads, [&](std::size_t k) {
    const CvFold& fold = folds[k];
    const FittedFold fitted = fit_fold(ds, fold, learner, seed);
    const auto pred = fitted.predict(fitted.test_x);
    if (pred.size() != fold.test_indices.size()) {
      throw ContractError("predictor returned the wrong number of predictions");
    }
    for (std::size_t i = 0; i < pred.size(); ++i) report.predictions[fold.test_indices[i]] = pred[i];
    report.per_fold[k] = {fold.test_round, fold.train_indices.size(), fold.test_indices.size(),
                          goodput::mean_goodput(pred, fitted.test_y, table).mean_bps};
  });

  double sum = 0.0;
  for (const auto& f : report.per_fold) sum += f.mean_goodput_bps;
  report.aggregate_bps = sum / static_cast<double>(report.per_fold.size());
  report.baseline = goodput::make_report(report.predictions, ds.target_mcs, table);
  return report;
}

EvalReport evaluate_model(const Dataset& ds, const regress::ModelConfig& config,
                          const goodput::TbsTable& table, std::uint64_t seed,
                          unsigned threads) {
  return evaluate_model(ds, model_learner(config), table, seed, threads);
}

std::vector<ImportanceEntry> permutation_importance(const Dataset& ds, const Learner& learner,
                                                    const goodput::TbsTable& table,
                                                    int n_repeats, std::uint64_t seed,
                                                    unsigned threads, const Permuter& permute) {
  if (n_repeats < 1) throw ConfigError("permutation importance: n_repeats must be >= 1");
  ds.validate();
  const auto folds = logo_folds(ds);
  const std::size_t d = ds.dim();
  std::vector<std::vector<double>> fold_delta(folds.size(), std::vector<double>(d, 0.0));

  parallel_for(folds.size(), threads, [&](std::size_t k) {
    const CvFold& fold = folds[k];
    const FittedFold fitted = fit_fold(ds, fold, learner, seed);
    const double base = score(fitted.predict, fitted.test_x, fitted.test_y, table);
    const std::size_t n = fitted.test_x.rows();
    const std::uint64_t fseed = derive_seed(seed, "importance", static_cast<std::uint64_t>(fold.test_round));
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int r = 0; r < n_repeats; ++r) {
        Rng rng(derive_seed(fseed, ds.feature_names[j], static_cast<std::uint64_t>(r)));
        std::iota(order.begin(), order.end(), 0);
        if (permute) {
          permute(order, rng);
        } else {
          shuffle(std::span<std::size_t>(order), rng);
        }
        Matrix shuffled = fitted.test_x;
        for (std::size_t i = 0; i < n; ++i) shuffled(i, j) = fitted.test_x(order[i], j);
        acc += base - score(fitted.predict, shuffled, fitted.test_y, table);
      }
      fold_delta[k][j] = acc / n_repeats;
    }
  });

  std::vector<ImportanceEntry> out(d);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (const auto& fd : fold_delta) s += fd[j];
    out[j] = {ds.feature_names[j], s / static_cast<double>(folds.size())};
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.delta_bps > b.delta_bps; });
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ContractError("pearson: need two equally long series of length >= 2");
  }
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  if (*amin == *amax || *bmin == *bmax) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<CorrelationEntry> pearson_correlation(const Dataset& ds) {
  ds.validate();
  std::vector<double> y(ds.target_mcs.begin(), ds.target_mcs.end());
  std::vector<double> col(ds.size());
  std::vector<CorrelationEntry> out;
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    for (std::size_t i = 0; i < ds.size(); ++i) col[i] = ds.features(i, j);
    const double r = ds.size() < 2 ? std::numeric_limits<double>::quiet_NaN() : pearson(col, y);
    out.push_back({ds.feature_names[j], std::isnan(r) ? std::nullopt : std::optional<double>(r)});
  }
  return out;
}

std::pair<double, double> mean_sdom(std::span<const double> values) {
  if (values.empty()) throw ContractError("mean_sdom: empty input");
  const double n = static_cast<double>(values.size());
  const double m = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

std::vector<CurvePoint> feature_count_sweep(const Dataset& ds,
                                            std::span<const NamedLearner> learners,
                                            std::span<const std::string> order,
                                            const goodput::TbsTable& table,
                                            std::uint64_t seed, unsigned threads) {
  if (order.empty()) throw ConfigError("feature sweep: empty importance order");
  std::vector<CurvePoint> out;
  for (std::size_t n = 1; n <= order.size(); ++n) {
    const Dataset sub = ds.select_features(order.subspan(0, n));
    for (const auto& nl : learners) {
      const EvalReport r = evaluate_model(sub, nl.learner, table, seed, threads);
      std::vector<double> per;
      for (const auto& f : r.per_fold) per.push_back(f.mean_goodput_bps);
      out.push_back({static_cast<double>(n), nl.name, r.aggregate_bps, mean_sdom(per).second});
    }
  }
  return out;
}

std::vector<CurvePoint> training_size_sweep(const Dataset& ds,
                                            std::span<const NamedLearner> learners,
                                            std::span<const std::size_t> sizes,
                                            const goodput::TbsTable& table,
                                            std::uint64_t seed, unsigned threads, int repeats) {
  if (repeats < 1) throw ConfigError("training-size sweep: repeats must be >= 1");
  ds.validate();
  const auto folds = logo_folds(ds);
  std::size_t smallest = folds.front().train_indices.size();
  for (const auto& f : folds) smallest = std::min(smallest, f.train_indices.size());
  for (std::size_t s : sizes) {
    if (s < 1 || s > smallest) {
      throw ConfigError("training-size sweep: size " + std::to_string(s) +
                        " outside [1, " + std::to_string(smallest) + "]");
    }
  }
  std::vector<Matrix> test_x;
  std::vector<std::vector<int>> test_y;
  for (const auto& f : folds) {
    test_x.push_back(test_features(ds, f.test_indices));
    test_y.push_back(targets_of(ds, f.test_indices));
  }

  const std::size_t reps = static_cast<std::size_t>(repeats);
  std::vector<CurvePoint> out;
  for (std::size_t size : sizes) {
    for (const auto& nl : learners) {
      std::vector<double> scores(folds.size() * reps);
      parallel_for(scores.size(), threads, [&](std::size_t item) {
        const std::size_t k = item / reps;
        const CvFold& fold = folds[k];
        std::vector<std::size_t> rows = fold.train_indices;
        if (size < rows.size()) {
          Rng rng(derive_seed(derive_seed(seed, "subsample", size), "fold-repeat", item));
          for (std::size_t i = 0; i < size; ++i) {
            std::swap(rows[i], rows[i + uniform_index(rng, rows.size() - i)]);
          }
          rows.resize(size);
          std::sort(rows.begin(), rows.end());
        }
        Predictor predict;
        try {
          predict = nl.learner(ds.to_feature_matrix(rows), fold_seed(seed, fold.test_round), 1);
        } catch (...) {
          rethrow_with_fold(fold.test_round);
        }
        scores[item] = score(predict, test_x[k], test_y[k], table);
      });
      const auto [m, e] = mean_sdom(scores);
      out.push_back({static_cast<double>(size), nl.name, m, e});
    }
  }
  return out;
}

void write_curves_csv(std::ostream& out, std::span<const CurvePoint> curves) {
  out << "x,series,mean,sdom\n";
  for (const auto& c : curves) {
    out << csv::format_double(c.x) << ',' << csv::quote(c.series) << ','
        << csv::format_double(c.mean) << ',' << csv::format_double(c.sdom) << '\n';
  }
}

void write_correlation_csv(std::ostream& out, std::span<const CorrelationEntry> entries) {
  out << "feature,r\n";
  for (const auto& e : entries) {
    out << csv::quote(e.feature) << ',' << (e.r ? csv::format_double(*e.r) : "undefined") << '\n';
  }
}

void write_importance_csv(std::ostream& out, std::span<const ImportanceEntry> entries) {
  out << "rank,feature,delta_bps\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out << i + 1 << ',' << csv::quote(entries[i].feature) << ','
        << csv::format_double(entries[i].delta_bps) << '\n';
  }
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : report.per_fold) {
    folds.push_back({{"round_id", f.round_id},
                     {"train_size", f.train_size},
                     {"test_size", f.test_size},
                     {"mean_goodput_bps", f.mean_goodput_bps}});
  }
  nlohmann::json j = {{"per_fold", folds},
                      {"aggregate_bps", report.aggregate_bps},
                      {"baseline", goodput::to_json(report.baseline)}};
  if (!report.importance.empty()) {
    nlohmann::json imp = nlohmann::json::array();
    for (const auto& e : report.importance) imp.push_back({{"feature", e.feature}, {"delta_bps", e.delta_bps}});
    j["importance"] = imp;
  }
  if (!report.correlation.empty()) {
    nlohmann::json cor = nlohmann::json::array();
    for (const auto& e : report.correlation) {
      cor.push_back({{"feature", e.feature}, {"r", e.r ? nlohmann::json(*e.r) : nlohmann::json()}});
    }
    j["correlation"] = cor;
  }
  if (!report.curves.empty()) {
    nlohmann::json cur = nlohmann::json::array();
    for (const auto& c : report.curves) {
      cur.push_back({{"x", c.x}, {"series", c.series}, {"mean", c.mean}, {"sdom", c.sdom}});
    }
    j["curves"] = cur;
  }
  return j;
}

}  // namespace mcsadapt::evaluation
