#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

#include "mcsadapt/error.hpp"
#include "mcsadapt/evaluation.hpp"
#include "mcsadapt/random.hpp"
#include "mcsadapt/regress/model.hpp"
#include "mcsadapt/synthetic.hpp"
#include "test_util.hpp"

using namespace mcsadapt;
using namespace mcsadapt::evaluation;
using ingest::Area;

namespace {

Dataset rounds_of_sizes(const std::vector<int>& sizes, std::uint64_t seed = 1) {
  Dataset ds;
  ds.feature_names = {"a", "b"};
  ds.features = Matrix(0, 2);
  Rng rng(seed);
  std::int64_t t = 0;
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    for (int i = 0; i < sizes[r]; ++i) {
      const int y = static_cast<int>(uniform_index(rng, 21)) - 1;
      const std::vector<double> row = {static_cast<double>(y), uniform01(rng)};
      ds.append(row, y, static_cast<int>(r), Area::kUnlabeled, t += 20);
    }
  }
  return ds;
}

// Predicts feature 0, which carries the target.
Predictor column0(const Matrix& x) {
  std::vector<double> p(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) p[i] = x(i, 0);
  return [p](const Matrix&) { return p; };
}

Learner oracle_learner() {
  return [](const FeatureMatrix&, std::uint64_t, unsigned) -> Predictor {
    return [](const Matrix& x) {
      std::vector<double> p(x.rows());
      for (std::size_t i = 0; i < x.rows(); ++i) p[i] = x(i, 0);
      return p;
    };
  };
}

regress::ModelConfig small_gbt() {
  auto c = regress::ModelConfig::defaults(regress::ModelKind::kGbt, regress::LossMode::quantile(0.3));
  auto& p = std::get<regress::GbtParams>(c.params);
  p.n_rounds = 30;
  p.max_depth = 2;
  return c;
}

}  // namespace

TEST_CASE("leave-one-round-out folds") {
  const Dataset six = rounds_of_sizes({5, 5, 5, 5, 5, 5});
  CHECK(logo_folds(six).size() == 6);

  const Dataset two = rounds_of_sizes({10, 20});
  const auto folds = logo_folds(two);
  REQUIRE(folds.size() == 2);
  CHECK(folds[0].test_round == 0);
  CHECK(folds[0].test_indices.size() == 10);
  CHECK(folds[0].train_indices.size() == 20);
  CHECK(folds[1].test_indices.size() == 20);
  CHECK(folds[1].train_indices.size() == 10);

  const Dataset uneven = rounds_of_sizes({3, 7, 11, 2});
  std::vector<int> seen(uneven.size(), 0);
  for (const auto& f : logo_folds(uneven)) {
    std::set<std::size_t> train(f.train_indices.begin(), f.train_indices.end());
    for (std::size_t i : f.test_indices) {
      ++seen[i];
      CHECK(uneven.round_id[i] == f.test_round);
      CHECK(train.count(i) == 0);
    }
    CHECK(f.train_indices.size() + f.test_indices.size() == uneven.size());
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

  CHECK_THROWS_AS(logo_folds(rounds_of_sizes({8})), ConfigError);
}

TEST_CASE("oracle and constant predictors") {
  const auto table = testutil::tbs_table();
  const Dataset ds = rounds_of_sizes({12, 12, 12});
  const auto folds = logo_folds(ds);

  const auto oracle = evaluate_model(ds, oracle_learner(), table, 1);
  CHECK(oracle.aggregate_bps == doctest::Approx(goodput::oracle_goodput(ds.target_mcs, table)).epsilon(1e-12));
  for (std::size_t k = 0; k < folds.size(); ++k) {
    std::vector<int> y;
    for (std::size_t i : folds[k].test_indices) y.push_back(ds.target_mcs[i]);
    CHECK(oracle.per_fold[k].mean_goodput_bps == goodput::oracle_goodput(y, table));
  }
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(oracle.predictions[i] == ds.target_mcs[i]);

  const Dataset uneven = rounds_of_sizes({4, 9, 15}, 7);
  for (int m : {0, 7, 19}) {
    const auto r = evaluate_model(uneven, constant_learner(m), table, 1);
    double expected = 0.0;
    const auto uf = logo_folds(uneven);
    for (const auto& f : uf) {
      std::vector<int> y;
      for (std::size_t i : f.test_indices) y.push_back(uneven.target_mcs[i]);
      expected += goodput::static_goodput(y, m, table);
    }
    expected /= static_cast<double>(uf.size());
    CHECK(r.aggregate_bps == doctest::Approx(expected).epsilon(1e-12));
    double sum = 0.0;
    for (const auto& f : r.per_fold) sum += f.mean_goodput_bps;
    CHECK(std::abs(r.aggregate_bps - sum / 3.0) <= 1e-9 * std::abs(r.aggregate_bps));
  }
}

TEST_CASE("training never sees the test round") {
  const auto table = testutil::tbs_table();
  Dataset ds = rounds_of_sizes({6, 8, 10});
  // column b becomes a unique row id
  for (std::size_t i = 0; i < ds.size(); ++i) ds.features(i, 1) = static_cast<double>(i);
  std::mutex mu;
  std::vector<std::set<int>> seen_by_fold;
  Learner tracking = [&](const FeatureMatrix& train, std::uint64_t seed, unsigned threads) {
    std::set<int> ids;
    for (std::size_t i = 0; i < train.n(); ++i) ids.insert(static_cast<int>(train.x(i, 1)));
    {
      std::lock_guard lock(mu);
      seen_by_fold.push_back(ids);
    }
    return model_learner(small_gbt())(train, seed, threads);
  };
  evaluate_model(ds, tracking, table, 3, 2);
  REQUIRE(seen_by_fold.size() == 3);
  std::set<int> test_rounds_hit;
  for (const auto& ids : seen_by_fold) {
    std::set<int> rounds;
    for (int id : ids) rounds.insert(ds.round_id[static_cast<std::size_t>(id)]);
    CHECK(rounds.size() == 2);
    for (int r : {0, 1, 2}) {
      if (!rounds.count(r)) test_rounds_hit.insert(r);
    }
  }
  CHECK(test_rounds_hit.size() == 3);

  // standardization statistics come from the training rows only
  const auto folds = logo_folds(ds);
  const FeatureMatrix train = ds.to_feature_matrix(folds[0].train_indices);
  auto cfg = regress::ModelConfig::defaults(regress::ModelKind::kMlp, regress::LossMode::mse());
  std::get<regress::MlpParams>(cfg.params).epochs = 1;
  const auto model = regress::fit(cfg, train, 1);
  REQUIRE(model.standardization.has_value());
  double m1 = 0.0;
  for (std::size_t i = 0; i < train.n(); ++i) m1 += train.x(i, 1);
  CHECK(model.standardization->means[1] == doctest::Approx(m1 / static_cast<double>(train.n())));
}

TEST_CASE("fold failures name the fold") {
  const auto table = testutil::tbs_table();
  const Dataset ds = rounds_of_sizes({5, 5, 5});
  Learner failing = [](const FeatureMatrix& train, std::uint64_t, unsigned) -> Predictor {
    if (train.n() == 10 && train.y.size() == 10) throw TrainingError("diverged", 4);
    return column0(train.x);
  };
  try {
    evaluate_model(ds, failing, table, 1);
    FAIL("expected a training error");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("test round 0") != std::string::npos);
    CHECK(e.last_stable_epoch() == 4);
  }
}

TEST_CASE("evaluation is deterministic across thread counts") {
  const auto table = testutil::tbs_table();
  const Dataset ds = synthetic::make_tabular({.seed = 3, .rounds = 3, .per_round = 40});
  const auto a = evaluate_model(ds, small_gbt(), table, 11, 1);
  const auto b = evaluate_model(ds, small_gbt(), table, 11, 3);
  CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("permutation importance") {
  const auto table = testutil::tbs_table();
  const Dataset ds = synthetic::make_tabular({.seed = 5, .rounds = 3, .per_round = 80,
                                              .noise_features = 1, .label_noise = 0.5});
  const auto learner = model_learner(small_gbt());

  const auto identity = permutation_importance(ds, learner, table, 2, 1, 1,
                                               [](std::span<std::size_t>, Rng&) {});
  REQUIRE(identity.size() == 2);
  for (const auto& e : identity) CHECK(e.delta_bps == 0.0);

  const auto imp = permutation_importance(ds, learner, table, 3, 9, 2);
  CHECK(imp.front().feature == "signal");
  CHECK(imp.front().delta_bps > 0.0);
  const auto again = permutation_importance(ds, learner, table, 3, 9, 1);
  for (std::size_t i = 0; i < imp.size(); ++i) {
    CHECK(imp[i].feature == again[i].feature);
    CHECK(imp[i].delta_bps == again[i].delta_bps);
  }

  // noise column: drops over 10 seeds stay within two standard deviations of 0
  std::vector<double> noise;
  double signal = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    for (const auto& e : permutation_importance(ds, learner, table, 1, 100 + s)) {
      if (e.feature == "noise0") noise.push_back(e.delta_bps);
      if (e.feature == "signal") signal = std::max(signal, e.delta_bps);
    }
  }
  const auto [m, sdom] = mean_sdom(noise);
  const double sd = sdom * std::sqrt(10.0);
  CHECK(std::abs(m) < 2.0 * sd + 1e-9);
  CHECK(std::abs(m) < 0.1 * signal);

  CHECK_THROWS_AS(permutation_importance(ds, learner, table, 0, 1), ConfigError);
}

TEST_CASE("pearson correlation") {
  Dataset ds;
  ds.feature_names = {"same", "negated", "constant"};
  ds.features = Matrix(0, 3);
  for (int i = 0; i < 30; ++i) {
    const int y = i % 21 - 1;
    const std::vector<double> row = {static_cast<double>(y), -2.0 * y, 0.1};
    ds.append(row, y, i % 2, Area::kUnlabeled, i);
  }
  const auto r = pearson_correlation(ds);
  REQUIRE(r.size() == 3);
  CHECK(*r[0].r == doctest::Approx(1.0));
  CHECK(*r[1].r == doctest::Approx(-1.0));
  CHECK_FALSE(r[2].r.has_value());

  Rng rng(12);
  std::vector<double> a(10000), b(10000);
  for (auto& v : a) v = uniform01(rng);
  for (auto& v : b) v = uniform01(rng);
  CHECK(std::abs(pearson(a, b)) < 0.05);

  std::ostringstream csv;
  write_correlation_csv(csv, r);
  CHECK(csv.str().find("constant,undefined") != std::string::npos);
}

TEST_CASE("feature-count sweep") {
  const auto table = testutil::tbs_table();
  const Dataset ds = synthetic::make_tabular({.seed = 8, .rounds = 3, .per_round = 60,
                                              .noise_features = 2, .label_noise = 0.5});
  const std::vector<NamedLearner> learners = {{"gbt", model_learner(small_gbt())}};
  const std::vector<std::string> order = {"signal", "noise0", "noise1"};
  const auto curve = feature_count_sweep(ds, learners, order, table, 4);
  REQUIRE(curve.size() == 3);
  const auto full = evaluate_model(ds, small_gbt(), table, 4);
  CHECK(curve[2].x == 3);
  CHECK(curve[2].mean == full.aggregate_bps);
  CHECK(std::abs(curve[0].mean - full.aggregate_bps) < 0.1 * full.aggregate_bps);
  CHECK_THROWS_AS(feature_count_sweep(ds, learners, std::span<const std::string>{}, table, 4),
                  ConfigError);
}

TEST_CASE("training-size sweep") {
  const auto table = testutil::tbs_table();
  const Dataset ds = synthetic::make_tabular({.seed = 2, .rounds = 3, .per_round = 40});
  const std::vector<NamedLearner> learners = {{"gbt", model_learner(small_gbt())}};
  const std::vector<std::size_t> sizes = {1, 20, 80};
  const auto curve = training_size_sweep(ds, learners, sizes, table, 6);
  REQUIRE(curve.size() == 3);
  const auto full = evaluate_model(ds, small_gbt(), table, 6);
  CHECK(curve[2].mean == doctest::Approx(full.aggregate_bps).epsilon(1e-12));
  CHECK(curve[0].mean <= curve[2].mean);
  CHECK(curve[1].sdom > 0.0);

  const std::vector<std::size_t> too_big = {81};
  CHECK_THROWS_AS(training_size_sweep(ds, learners, too_big, table, 6), ConfigError);
  const std::vector<std::size_t> zero = {0};
  CHECK_THROWS_AS(training_size_sweep(ds, learners, zero, table, 6), ConfigError);

  std::ostringstream out;
  write_curves_csv(out, curve);
  CHECK(out.str().rfind("x,series,mean,sdom\n1,gbt,", 0) == 0);
}

TEST_CASE("mean and standard deviation of the mean") {
  const std::vector<double> v = {1, 2, 3, 4};
  const auto [m, e] = mean_sdom(v);
  CHECK(m == 2.5);
  CHECK(e == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  const std::vector<double> one = {7};
  CHECK(mean_sdom(one).second == 0.0);
}
