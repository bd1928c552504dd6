#include "mcsadapt/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace mcsadapt {

void FeatureMatrix::validate() const {
  if (n() < 1 || d() < 1) throw ContractError("FeatureMatrix: need n >= 1 and d >= 1");
  if (y.size() != n()) throw ContractError("FeatureMatrix: target count differs from rows");
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.data().begin(), x.data().end(), finite) ||
      !std::all_of(y.begin(), y.end(), finite)) {
    throw ContractError("FeatureMatrix: non-finite entry");
  }
}

}  // namespace mcsadapt
