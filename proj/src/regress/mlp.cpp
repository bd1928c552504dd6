#include "mcsadapt/regress/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcsadapt/error.hpp"

namespace mcsadapt::regress {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "relu";
}

Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "sigmoid") return Activation::kSigmoid;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

void Adam::step(std::span<double> weights, std::span<const double> grad) {
  if (weights.size() != m_.size() || grad.size() != m_.size()) {
    throw ContractError("Adam: parameter count changed");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(params_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(params_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    m_[i] = params_.beta1 * m_[i] + (1.0 - params_.beta1) * grad[i];
    v_[i] = params_.beta2 * v_[i] + (1.0 - params_.beta2) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    weights[i] -= params_.alpha * m_hat / (std::sqrt(v_hat) + params_.epsilon);
  }
}

Mlp::Mlp(std::size_t inputs, std::vector<int> hidden, Activation activation)
    : activation_(activation) {
  if (inputs < 1) throw ConfigError("MLP: need at least one input");
  sizes_.push_back(inputs);
  for (int w : hidden) {
    if (w < 1) throw ConfigError("MLP: layer widths must be >= 1");
    sizes_.push_back(static_cast<std::size_t>(w));
  }
  sizes_.push_back(1);
  build_offsets();
}

void Mlp::build_offsets() {
  weight_offset_.clear();
  bias_offset_.clear();
  std::size_t off = 0;
  for (std::size_t l = 1; l < sizes_.size(); ++l) {
    weight_offset_.push_back(off);
    off += sizes_[l] * sizes_[l - 1];
    bias_offset_.push_back(off);
    off += sizes_[l];
  }
  params_.assign(off, 0.0);
}

void Mlp::initialize(Rng& rng) {
  for (std::size_t l = 1; l < sizes_.size(); ++l) {
    const double fan_in = static_cast<double>(sizes_[l - 1]);
    const double fan_out = static_cast<double>(sizes_[l]);
    const double limit = activation_ == Activation::kRelu ? std::sqrt(6.0 / fan_in)
                                                          : std::sqrt(6.0 / (fan_in + fan_out));
    const std::size_t w0 = weight_offset_[l - 1];
    for (std::size_t i = 0; i < sizes_[l] * sizes_[l - 1]; ++i) {
      params_[w0 + i] = uniform(rng, -limit, limit);
    }
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(bias_offset_[l - 1]), sizes_[l],
                0.0);
  }
}

double Mlp::activate(double z) const {
  switch (activation_) {
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kTanh: return std::tanh(z);
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

double Mlp::activate_derivative(double z, double a) const {
  switch (activation_) {
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: return 1.0 - a * a;
    case Activation::kSigmoid: return a * (1.0 - a);
  }
  return 1.0;
}

double Mlp::forward(std::span<const double> x) const {
  if (x.size() != inputs()) throw ContractError("MLP: input arity mismatch");
  std::vector<double> cur(x.begin(), x.end()), next;
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    next.assign(out, 0.0);
    const double* w = params_.data() + weight_offset_[l];
    const double* b = params_.data() + bias_offset_[l];
    for (std::size_t o = 0; o < out; ++o) {
      double z = b[o];
      for (std::size_t i = 0; i < in; ++i) z += w[o * in + i] * cur[i];
      next[o] = l + 1 < layers ? activate(z) : z;
    }
    cur.swap(next);
  }
  return cur[0];
}

double Mlp::loss_and_gradient(const Matrix& x, std::span<const double> y,
                              std::span<const std::size_t> rows, const LossMode& loss,
                              double l1, double l2, std::vector<double>& grad) const {
  if (rows.empty()) throw ContractError("MLP: empty batch");
  if (x.cols() != inputs()) throw ContractError("MLP: input arity mismatch");
  grad.assign(params_.size(), 0.0);
  const std::size_t layers = sizes_.size() - 1;
  std::vector<std::vector<double>> z(layers), a(layers + 1);
  std::vector<double> delta, prev_delta;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  double total = 0.0;

  for (std::size_t r : rows) {
    const auto xr = x.row(r);
    a[0].assign(xr.begin(), xr.end());
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const double* w = params_.data() + weight_offset_[l];
      const double* b = params_.data() + bias_offset_[l];
      z[l].assign(out, 0.0);
      a[l + 1].assign(out, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        double s = b[o];
        for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * a[l][i];
        z[l][o] = s;
        a[l + 1][o] = l + 1 < layers ? activate(s) : s;
      }
    }
    const double yhat = a[layers][0];
    total += loss.value(y[r], yhat);
    delta.assign(1, loss.gradient(y[r], yhat) * inv_n);
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const double* w = params_.data() + weight_offset_[l];
      double* gw = grad.data() + weight_offset_[l];
      double* gb = grad.data() + bias_offset_[l];
      for (std::size_t o = 0; o < out; ++o) {
        gb[o] += delta[o];
        for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += delta[o] * a[l][i];
      }
      if (l == 0) break;
      prev_delta.assign(in, 0.0);
      for (std::size_t i = 0; i < in; ++i) {
        double s = 0.0;
        for (std::size_t o = 0; o < out; ++o) s += w[o * in + i] * delta[o];
        prev_delta[i] = s * activate_derivative(z[l - 1][i], a[l][i]);
      }
      delta.swap(prev_delta);
    }
  }

  double penalty = 0.0;
  if (l1 != 0.0 || l2 != 0.0) {
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t begin = weight_offset_[l], end = bias_offset_[l];
      for (std::size_t k = begin; k < end; ++k) {
        const double w = params_[k];
        penalty += l1 * std::abs(w) + l2 * w * w;
        grad[k] += l1 * (w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0)) + 2.0 * l2 * w;
      }
    }
  }
  return total * inv_n + penalty;
}

nlohmann::json Mlp::to_json() const {
  return {{"layer_sizes", sizes_},
          {"activation", std::string(to_string(activation_))},
          {"parameters", params_}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  if (sizes.size() < 2 || sizes.back() != 1) throw DataError("MLP: bad layer sizes");
  std::vector<int> hidden;
  for (std::size_t i = 1; i + 1 < sizes.size(); ++i) hidden.push_back(static_cast<int>(sizes[i]));
  Mlp m(sizes.front(), hidden, activation_from_string(j.at("activation").get<std::string>()));
  const auto p = j.at("parameters").get<std::vector<double>>();
  if (p.size() != m.params_.size()) throw DataError("MLP: parameter count mismatch");
  m.params_ = p;
  return m;
}

Mlp fit_mlp(const FeatureMatrix& data, const LossMode& loss, const MlpParams& params,
            std::uint64_t seed) {
  data.validate();
  if (params.epochs < 0 || params.batch_size < 1) {
    throw ConfigError("MLP: epochs >= 0 and batch_size >= 1 required");
  }
  if (params.l1 < 0 || params.l2 < 0) throw ConfigError("MLP: l1, l2 must be >= 0");
  Mlp net(data.d(), params.layers, params.activation);
  Rng init_rng(derive_seed(seed, "mlp-init"));
  net.initialize(init_rng);
  net.output_bias() = loss.optimal_constant(data.y);

  Adam adam(net.parameters().size(), params.adam);
  std::vector<std::size_t> order(data.n());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;
  const std::size_t batch = static_cast<std::size_t>(params.batch_size);
  int last_stable = -1;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    Rng rng(derive_seed(seed, "mlp-epoch", static_cast<std::uint64_t>(epoch)));
    shuffle(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      const std::span<const std::size_t> rows(order.data() + start, len);
      epoch_loss += net.loss_and_gradient(data.x, data.y, rows, loss, params.l1, params.l2,
                                          grad) *
                    static_cast<double>(len);
      adam.step(net.parameters(), grad);
    }
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("MLP loss became non-finite at epoch " + std::to_string(epoch),
                          last_stable);
    }
    last_stable = epoch;
  }
  return net;
}

}  // namespace mcsadapt::regress
