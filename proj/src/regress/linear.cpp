#include "mcsadapt/regress/linear.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "mcsadapt/error.hpp"
#include "mcsadapt/random.hpp"
#include "mcsadapt/regress/loss.hpp"

namespace mcsadapt::regress {

double LinearModel::predict(std::span<const double> x) const {
  if (x.size() != coef.size()) throw ContractError("LinearModel: arity mismatch");
  double y = intercept;
  for (std::size_t i = 0; i < x.size(); ++i) y += coef[i] * x[i];
  return y;
}

LinearModel fit_linear_ols(const FeatureMatrix& data) {
  data.validate();
  const std::size_t n = data.n();
  const std::size_t p = data.d() + 1;
  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd b(n);
  for (std::size_t r = 0; r < n; ++r) {
    a(r, 0) = 1.0;
    for (std::size_t c = 0; c < data.d(); ++c) a(r, c + 1) = data.x(r, c);
    b(r) = data.y[r];
  }
  Eigen::MatrixXd gram = a.transpose() * a;
  const Eigen::VectorXd rhs = a.transpose() * b;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  const bool deficient = static_cast<std::size_t>(qr.rank()) < p || n < p;
  if (deficient) {
    const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
    gram.diagonal().array() += 1e-9 * scale;
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  Eigen::VectorXd beta = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success || !beta.allFinite()) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < static_cast<Eigen::Index>(p); ++k) {
      const auto c = perm(k);
      cols += (cols.empty() ? "" : ", ") +
              (c == 0 ? std::string("intercept") : "x" + std::to_string(c - 1));
    }
    throw NumericalError("least squares: rank deficient in columns [" + cols + "]");
  }
  LinearModel m;
  m.intercept = beta(0);
  m.coef.assign(beta.data() + 1, beta.data() + p);
  return m;
}

LinearModel fit_linear_sgd_quantile(const FeatureMatrix& data, double tau,
                                    const SgdParams& params, std::uint64_t seed) {
  data.validate();
  const LossMode loss = LossMode::quantile(tau);
  if (params.epochs < 0 || !(params.lr0 > 0) || params.decay < 0) {
    throw ConfigError("SGD: epochs >= 0, lr0 > 0 and decay >= 0 required");
  }
  LinearModel m;
  m.intercept = mean(data.y);
  m.coef.assign(data.d(), 0.0);
  std::vector<std::size_t> order(data.n());
  std::iota(order.begin(), order.end(), 0);
  int last_stable = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    Rng rng(derive_seed(seed, "sgd-epoch", static_cast<std::uint64_t>(epoch)));
    shuffle(order, rng);
    const double lr = params.lr0 / (1.0 + params.decay * epoch);
    for (std::size_t i : order) {
      const auto x = data.x.row(i);
      const double g = loss.gradient(data.y[i], m.predict(x));
      m.intercept -= lr * g;
      for (std::size_t c = 0; c < x.size(); ++c) m.coef[c] -= lr * g * x[c];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      total += loss.value(data.y[i], m.predict(data.x.row(i)));
    }
    if (!std::isfinite(total)) {
      throw TrainingError("SGD quantile regression diverged at epoch " + std::to_string(epoch),
                          last_stable);
    }
    last_stable = epoch;
  }
  return m;
}

nlohmann::json to_json(const LinearModel& m) {
  return {{"intercept", m.intercept}, {"coef", m.coef}};
}

LinearModel linear_from_json(const nlohmann::json& j) {
  LinearModel m;
  m.intercept = j.at("intercept").get<double>();
  m.coef = j.at("coef").get<std::vector<double>>();
  return m;
}

}  // namespace mcsadapt::regress
