#pragma once

#include "soda/core.hpp"

namespace soda::info {

/// Information-form estimate of a static 2D position. The zero state is the
/// filter's initial (uninformed) state.
struct InfoState {
  Vec2 y = Vec2::Zero();
  Mat2 Y = Mat2::Zero();

  [[nodiscard]] static InfoState zero() { return {}; }
};

/// One measurement expressed in information space.
struct Contribution {
  Vec2 dy = Vec2::Zero();
  Mat2 dY = Mat2::Zero();
};

struct Estimate {
  Vec2 x_hat;
  Mat2 P;
};

/// Thrown by recover() when the information matrix cannot be inverted.
struct UnrecoverableState : InternalError {
  using InternalError::InternalError;
};

/// Closed-form 2x2 inverse. Returns nullopt when
/// |det| <= 1e-12 * ||M||_F^2.
[[nodiscard]] std::optional<Mat2> invert2(const Mat2& M);

/// dY = H^T R^-1 H, dy = H^T R^-1 z. Throws InvalidInput for non-SPD R.
[[nodiscard]] Contribution contribution(const Vec2& z, const Mat2& R,
                                        const Mat2& H = Mat2::Identity());

[[nodiscard]] inline InfoState update(InfoState s, const Contribution& c) {
  s.y += c.dy;
  s.Y += c.dY;
  return s;
}

/// Track-to-track fusion of two independent estimates.
[[nodiscard]] inline InfoState fuse(const InfoState& a, const InfoState& b) {
  return {a.y + b.y, a.Y + b.Y};
}

/// P = Y^-1, x = P y. Throws UnrecoverableState for singular Y.
[[nodiscard]] Estimate recover(const InfoState& s);

}  // namespace soda::info
