#include <doctest.h>

#include <vector>

#include "mcsadapt/error.hpp"
#include "mcsadapt/random.hpp"
#include "mcsadapt/regress/gbt.hpp"
#include "mcsadapt/regress/loss.hpp"

using namespace mcsadapt;
using namespace mcsadapt::regress;

namespace {

double mean_loss(const LossMode& loss, std::span<const double> y, std::span<const double> p) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += loss.value(y[i], p[i]);
  return s / static_cast<double>(y.size());
}

}  // namespace

TEST_CASE("GBT zero rounds is the loss-optimal constant") {
  FeatureMatrix f{Matrix(20, 1), std::vector<double>(20)};
  for (int i = 0; i < 20; ++i) {
    f.x(i, 0) = i * 0.37;
    f.y[i] = i;
  }
  GbtParams p;
  p.n_rounds = 0;
  const auto m = fit_gbt(f, LossMode::quantile(0.3), p, 1);
  CHECK(m.trees.empty());
  CHECK(m.predict(f.x.row(4)) == empirical_quantile(f.y, 0.3));
  CHECK(fit_gbt(f, LossMode::mse(), p, 1).base == doctest::Approx(9.5));
  CHECK(fit_gbt(f, LossMode::mae(), p, 1).base == empirical_quantile(f.y, 0.5));
}

TEST_CASE("GBT training loss non-increasing") {
  Rng rng(21);
  FeatureMatrix f{Matrix(150, 1), std::vector<double>(150)};
  for (std::size_t i = 0; i < 150; ++i) {
    f.x(i, 0) = uniform(rng, 0, 1);
    f.y[i] = std::floor(uniform(rng, 0, 20));
  }
  for (const auto& loss : {LossMode::quantile(0.2), LossMode::mse(), LossMode::mae()}) {
    CAPTURE(loss.name());
    GbtParams p;
    p.n_rounds = 40;
    p.max_depth = 3;
    std::vector<double> history;
    fit_gbt(f, loss, p, 3, [&](int, std::span<const double> pred) {
      history.push_back(mean_loss(loss, f.y, pred));
    });
    REQUIRE(history.size() == 40);
    for (std::size_t r = 1; r < history.size(); ++r) CHECK(history[r] <= history[r - 1] + 1e-12);
  }
}

TEST_CASE("GBT fits a step function") {
  FeatureMatrix f{Matrix(100, 1), std::vector<double>(100)};
  for (int i = 0; i < 100; ++i) {
    f.x(i, 0) = i / 100.0;
    f.y[i] = f.x(i, 0) < 0.5 ? 2.0 : 9.0;
  }
  GbtParams p;
  p.n_rounds = 50;
  p.learning_rate = 0.3;
  const auto m = fit_gbt(f, LossMode::mse(), p, 1);
  std::vector<double> pred(100);
  for (int i = 0; i < 100; ++i) pred[i] = m.predict(f.x.row(i));
  CHECK(mean_loss(LossMode::mse(), f.y, pred) < 1e-3);

  const auto back = gbt_from_json(to_json(m));
  CHECK(back.predict(f.x.row(70)) == m.predict(f.x.row(70)));
}

TEST_CASE("GBT subsample determinism and validation") {
  Rng rng(2);
  FeatureMatrix f{Matrix(80, 2), std::vector<double>(80)};
  for (std::size_t i = 0; i < 80; ++i) {
    f.x(i, 0) = uniform(rng, 0, 1);
    f.x(i, 1) = uniform(rng, 0, 1);
    f.y[i] = 10 * f.x(i, 0) + standard_normal(rng);
  }
  GbtParams p;
  p.n_rounds = 20;
  p.subsample = 0.5;
  CHECK(to_json(fit_gbt(f, LossMode::quantile(0.3), p, 5)) ==
        to_json(fit_gbt(f, LossMode::quantile(0.3), p, 5)));
  p.learning_rate = 0.0;
  CHECK_THROWS_AS(fit_gbt(f, LossMode::mse(), p, 5), ConfigError);
  p.learning_rate = 0.1;
  p.subsample = 1.5;
  CHECK_THROWS_AS(fit_gbt(f, LossMode::mse(), p, 5), ConfigError);
  p.subsample = 1.0;
  p.n_rounds = -1;
  CHECK_THROWS_AS(fit_gbt(f, LossMode::mse(), p, 5), ConfigError);
}
