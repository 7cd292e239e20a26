#include "soda/core.hpp"

#include <cmath>

namespace soda {

bool is_spd(const Mat2& R) {
  if (!R.allFinite()) return false;
  const double scale = std::max(std::abs(R(0, 1)), std::abs(R(1, 0)));
  if (std::abs(R(0, 1) - R(1, 0)) > 1e-12 * std::max(1.0, scale)) return false;
  // 2x2 symmetric: both eigenvalues positive iff leading minor and
  // determinant are positive.
  return R(0, 0) > 0.0 && R(0, 0) * R(1, 1) - R(0, 1) * R(1, 0) > 0.0;
}

void validate(const Measurement& m) {
  if (!m.z.allFinite()) throw InvalidInput("detection position is not finite");
  if (!(m.pi >= 0.0 && m.pi <= 1.0)) {
    throw InvalidInput("detection confidence outside [0,1]: " + std::to_string(m.pi));
  }
  if (!is_spd(m.R)) throw InvalidInput("detection covariance is not symmetric positive-definite");
}

void EngineParams::validate() const {
  if (!(radius > 0.0 && std::isfinite(radius))) throw InvalidInput("radius must be > 0");
  if (!(beta > 0.0 && std::isfinite(beta))) throw InvalidInput("beta must be > 0");
  if (!(w_max > 0.0 && std::isfinite(w_max))) throw InvalidInput("w_max must be > 0");
  if (!(w_min > 0.0 && std::isfinite(w_min))) throw InvalidInput("w_min must be > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must be in (0,1]");
  if (!(eps_odds > 0.0 && eps_odds < 0.5)) throw InvalidInput("eps_odds must be in (0,0.5)");
}

}  // namespace soda
