#include <doctest.h>

#include <sstream>

#include "mcsadapt/error.hpp"
#include "mcsadapt/evaluation.hpp"
#include "mcsadapt/hyperopt.hpp"
#include "mcsadapt/synthetic.hpp"
#include "test_util.hpp"

using namespace mcsadapt;
using namespace mcsadapt::hyperopt;
using regress::LossMode;
using regress::ModelKind;

namespace {

const ingest::Dataset& data() {
  static const ingest::Dataset ds =
      synthetic::make_tabular({.seed = 6, .rounds = 3, .per_round = 40, .noise_features = 1});
  return ds;
}

ParamSpace small_gbt_space() {
  ParamSpace s;
  s.entries["n_rounds"] = Distribution::int_uniform(5, 15);
  s.entries["max_depth"] = Distribution::choice({0, 3});
  s.entries["tau"] = Distribution::uniform(0.2, 0.4);
  return s;
}

}  // namespace

TEST_CASE("sampling distributions") {
  Rng rng(1);
  ParamSpace s;
  s.entries["a"] = Distribution::choice({"only"});
  s.entries["b"] = Distribution::int_uniform(3, 4);
  s.entries["c"] = Distribution::uniform(0, 1);
  s.entries["d"] = Distribution::log_uniform(1e-4, 1e-2);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = sample_config(s, rng);
    CHECK(p["a"] == "only");
    CHECK(p["b"] == 3);
    sum += p["c"].get<double>();
    const double d = p["d"].get<double>();
    CHECK((d >= 1e-4 && d <= 1e-2));
  }
  CHECK(std::abs(sum / 10000.0 - 0.5) < 0.02);

  Rng r1(9), r2(9);
  CHECK(sample_config(s, r1) == sample_config(s, r2));
  CHECK(sample_config(s, r1).begin().key() == "a");
}

TEST_CASE("search space files") {
  const auto space = default_space(ModelKind::kQrf, 7);
  const auto back = space_from_json(to_json(space));
  CHECK(to_json(back) == to_json(space));
  CHECK(back.entries.at("mtry").hi == 8);

  auto bad = [](const char* text) { return space_from_json(nlohmann::json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"x": {"type": "uniform", "lo": 2, "hi": 1}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"x": {"type": "choice", "values": []}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"x": {"type": "log-uniform", "lo": 0, "hi": 1}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"tau": {"type": "uniform", "lo": 0.1, "hi": 1.5}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"x": {"type": "normal", "lo": 0, "hi": 1}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"x": {"type": "int-uniform", "lo": 0.5, "hi": 3}})"), ConfigError);
}

TEST_CASE("sampled parameters become model configs") {
  const auto gbt = apply_params(ModelKind::kGbt, LossMode::quantile(0.5),
                                {{"n_rounds", 77}, {"tau", 0.2}, {"subsample", 0.8}});
  CHECK(std::get<regress::GbtParams>(gbt.params).n_rounds == 77);
  CHECK(gbt.loss.tau == 0.2);

  const auto mse = apply_params(ModelKind::kGbt, LossMode::mse(), {{"tau", 0.2}});
  CHECK(mse.loss.kind == LossMode::Kind::kMse);

  const auto mlp = apply_params(ModelKind::kMlp, LossMode::quantile(0.5),
                                {{"n_layers", 2}, {"width_1", 16}, {"width_2", 128}, {"width_3", 32},
                                 {"activation", "tanh"}, {"learning_rate", 0.005}});
  const auto& mp = std::get<regress::MlpParams>(mlp.params);
  CHECK(mp.layers == std::vector<int>{16, 128});
  CHECK(mp.activation == regress::Activation::kTanh);
  CHECK(mp.adam.alpha == 0.005);

  CHECK_THROWS_AS(apply_params(ModelKind::kQrf, LossMode::mse(), {{"n_rounds", 3}}), ConfigError);

  // every default space yields valid configs
  Rng rng(4);
  for (auto k : {ModelKind::kLinear, ModelKind::kQrf, ModelKind::kGbt, ModelKind::kMlp}) {
    const auto space = default_space(k, 5);
    for (int i = 0; i < 20; ++i) CHECK_NOTHROW(apply_params(k, LossMode::quantile(0.3), sample_config(space, rng)));
  }
}

TEST_CASE("random search") {
  const auto table = testutil::tbs_table();
  SUBCASE("single trial is the best") {
    const auto r = random_search(data(), ModelKind::kGbt, LossMode::quantile(0.3), small_gbt_space(),
                                 1, table, 5);
    REQUIRE(r.trials.size() == 1);
    CHECK(r.best == 0);
  }
  SUBCASE("finds the dominating choice, reproducibly") {
    const auto a = random_search(data(), ModelKind::kGbt, LossMode::quantile(0.3), small_gbt_space(),
                                 20, table, 8);
    CHECK(a.best_trial().params["max_depth"] == 3);
    double best = 0.0;
    for (const auto& t : a.trials) best = std::max(best, *t.score_bps);
    CHECK(*a.best_trial().score_bps == best);
    for (std::size_t i = 0; i < a.best; ++i) CHECK(*a.trials[i].score_bps < best);

    const auto b = random_search(data(), ModelKind::kGbt, LossMode::quantile(0.3), small_gbt_space(),
                                 20, table, 8, 3);
    std::ostringstream la, lb;
    write_trial_log(la, a);
    write_trial_log(lb, b);
    CHECK(la.str() == lb.str());
    CHECK(la.str().rfind("trial,params-json,score_bps,seed\n0,\"{", 0) == 0);

    // a logged trial re-evaluated on its own reproduces its score
    const auto& t = a.trials[7];
    const auto cfg = apply_params(ModelKind::kGbt, LossMode::quantile(0.3), t.params);
    CHECK(evaluation::evaluate_model(data(), cfg, table, t.seed).aggregate_bps == *t.score_bps);
  }
  SUBCASE("failed trials are logged") {
    ParamSpace s;
    s.entries["subsample"] = Distribution::choice({1.0, 2.0});
    s.entries["n_rounds"] = Distribution::choice({3});
    const auto r = random_search(data(), ModelKind::kGbt, LossMode::mse(), s, 12, table, 2);
    int failed = 0;
    for (const auto& t : r.trials) {
      if (!t.score_bps) {
        ++failed;
        CHECK_FALSE(t.error.empty());
      }
    }
    CHECK(failed > 0);
    CHECK(r.best_trial().score_bps.has_value());
    std::ostringstream log;
    write_trial_log(log, r);
    CHECK(log.str().find(",failed,") != std::string::npos);

    ParamSpace all_bad;
    all_bad.entries["subsample"] = Distribution::choice({2.0});
    CHECK_THROWS_AS(random_search(data(), ModelKind::kGbt, LossMode::mse(), all_bad, 3, table, 2),
                    NumericalError);
  }
  CHECK_THROWS_AS(random_search(data(), ModelKind::kGbt, LossMode::mse(), small_gbt_space(), 0,
                                table, 1),
                  ConfigError);
}
