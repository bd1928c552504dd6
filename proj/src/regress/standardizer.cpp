#include "mcsadapt/regress/standardizer.hpp"

#include <algorithm>
#include <cmath>

#include "mcsadapt/error.hpp"

namespace mcsadapt::regress {

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() == 0) throw ContractError("Standardizer::fit: no rows");
  const std::size_t d = x.cols();
  Standardizer s;
  s.means.assign(d, 0.0);
  s.stddevs.assign(d, 0.0);
  const double n = static_cast<double>(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) s.means[c] += x(r, c);
  }
  for (double& m : s.means) m /= n;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = x(r, c) - s.means[c];
      s.stddevs[c] += dev * dev;
    }
  }
  for (double& v : s.stddevs) v = std::max(std::sqrt(v / n), kStddevFloor);
  return s;
}

void Standardizer::transform_row(std::span<const double> in, std::span<double> out) const {
  if (in.size() != means.size() || out.size() != means.size()) {
    throw ContractError("Standardizer: arity mismatch");
  }
  for (std::size_t c = 0; c < in.size(); ++c) out[c] = (in[c] - means[c]) / stddevs[c];
}

Matrix Standardizer::transform(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) transform_row(x.row(r), out.row(r));
  return out;
}

nlohmann::json to_json(const Standardizer& s) {
  return {{"means", s.means}, {"stddevs", s.stddevs}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  Standardizer s;
  s.means = j.at("means").get<std::vector<double>>();
  s.stddevs = j.at("stddevs").get<std::vector<double>>();
  if (s.means.size() != s.stddevs.size()) throw DataError("standardizer: arity mismatch");
  return s;
}

}  // namespace mcsadapt::regress
