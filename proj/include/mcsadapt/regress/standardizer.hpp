#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "mcsadapt/matrix.hpp"

namespace mcsadapt::regress {

/// Per-column z-scoring fitted on training rows.
struct Standardizer {
  static constexpr double kStddevFloor = 1e-12;

  std::vector<double> means;
  std::vector<double> stddevs;

  static Standardizer fit(const Matrix& x);

  Matrix transform(const Matrix& x) const;
  void transform_row(std::span<const double> in, std::span<double> out) const;
};

nlohmann::json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

}  // namespace mcsadapt::regress
