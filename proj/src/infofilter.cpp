#include "soda/infofilter.hpp"

#include <cmath>

namespace soda::info {

std::optional<Mat2> invert2(const Mat2& M) {
  const double det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
  const double norm2 = M.squaredNorm();
  if (!std::isfinite(det) || !(std::abs(det) > 1e-12 * norm2)) return std::nullopt;
  Mat2 adj;
  adj << M(1, 1), -M(0, 1), -M(1, 0), M(0, 0);
  return adj / det;
}

Contribution contribution(const Vec2& z, const Mat2& R, const Mat2& H) {
  if (!is_spd(R)) throw InvalidInput("measurement covariance is not SPD");
  const auto R_inv = invert2(R);
  if (!R_inv) throw InvalidInput("measurement covariance is numerically singular");
  Contribution c;
  c.dY = H.transpose() * (*R_inv) * H;
  c.dy = H.transpose() * (*R_inv) * z;
  return c;
}

Estimate recover(const InfoState& s) {
  const auto P = invert2(s.Y);
  if (!P) throw UnrecoverableState("information matrix is singular; no estimate available");
  return {(*P) * s.y, *P};
}

}  // namespace soda::info
