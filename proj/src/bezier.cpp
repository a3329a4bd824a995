#include "patchsmith/bezier.hpp"

namespace patchsmith {

namespace {

// Cubic Bernstein basis and its first two derivatives at t.
void bernstein(double t, double b[4], double d1[4], double d2[4]) {
  const double s = 1.0 - t;
  b[0] = s * s * s;
  b[1] = 3.0 * t * s * s;
  b[2] = 3.0 * t * t * s;
  b[3] = t * t * t;
  d1[0] = -3.0 * s * s;
  d1[1] = 3.0 * s * s - 6.0 * t * s;
  d1[2] = 6.0 * t * s - 3.0 * t * t;
  d1[3] = 3.0 * t * t;
  d2[0] = 6.0 * s;
  d2[1] = 18.0 * t - 12.0;
  d2[2] = 6.0 - 18.0 * t;
  d2[3] = 6.0 * t;
}

}  // namespace

SurfacePoint evaluate_bezier(const ControlNet& P, double u, double v) {
  double bu[4], du[4], ddu[4], bv[4], dv[4], ddv[4];
  bernstein(u, bu, du, ddu);
  bernstein(v, bv, dv, ddv);
  SurfacePoint s;
  for (int i = 0; i < 4; ++i) {
    Vec3 row = Vec3::Zero(), row_v = Vec3::Zero(), row_vv = Vec3::Zero();
    for (int j = 0; j < 4; ++j) {
      row += bv[j] * P[i][j];
      row_v += dv[j] * P[i][j];
      row_vv += ddv[j] * P[i][j];
    }
    s.point += bu[i] * row;
    s.du += du[i] * row;
    s.duu += ddu[i] * row;
    s.dv += bu[i] * row_v;
    s.dvv += bu[i] * row_vv;
    s.duv += du[i] * row_v;
  }
  return s;
}

std::array<int, 2> boundary_index(int b, int t, int d) {
  switch (b) {
    case 0: return {t, d};          // v = 0, u increasing
    case 1: return {3 - d, t};      // u = 1, v increasing
    case 2: return {3 - t, 3 - d};  // v = 1, u decreasing
    default: return {d, 3 - t};     // u = 0, v decreasing
  }
}

std::array<double, 2> boundary_uv(int b, double s) {
  switch (b) {
    case 0: return {s, 0.0};
    case 1: return {1.0, s};
    case 2: return {1.0 - s, 1.0};
    default: return {0.0, 1.0 - s};
  }
}

}  // namespace patchsmith
