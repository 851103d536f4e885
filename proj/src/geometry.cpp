#include "lbpm/geometry.hpp"

#include <algorithm>

namespace lbpm {

double orthonormality_defect(const Mat3& r) {
  const Mat3 g = r.transposed() * r;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(g(i, j) - target));
    }
  return worst;
}

double max_abs_diff(const Mat3& a, const Mat3& b) {
  double worst = 0.0;
  for (int i = 0; i < 9; ++i) worst = std::max(worst, std::abs(a.m[i] - b.m[i]));
  return worst;
}

double frobenius_diff(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 9; ++i) {
    const double d = a.m[i] - b.m[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Mat3 skew(const Vec3& w) {
  Mat3 s;
  s.m = {0.0, -w.z, w.y,
         w.z, 0.0, -w.x,
         -w.y, w.x, 0.0};
  return s;
}

Mat3 axis_angle_matrix(const Vec3& axis, double angle) {
  if (std::abs(angle) < kEpsAngle) return Mat3::identity();
  const double len = axis.norm();
  if (len < kEpsAxis)
    throw DegenerateAxis("axis_angle_matrix: zero-length axis with non-zero angle");
  const Vec3 u = axis / len;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double rc = 1.0 - c;

  Mat3 r;
  r.m = {c + u.x * u.x * rc,        u.x * u.y * rc - u.z * s,  u.x * u.z * rc + u.y * s,
         u.y * u.x * rc + u.z * s,  c + u.y * u.y * rc,        u.y * u.z * rc - u.x * s,
         u.z * u.x * rc - u.y * s,  u.z * u.y * rc + u.x * s,  c + u.z * u.z * rc};
  return r;
}

Mat3 orthonormalize(const Mat3& r) {
  const Vec3 c2 = r.col(1);
  const Vec3 c3 = r.col(2);

  const Vec3 k3 = c3;                 // direction of column 3 is preserved
  const Vec3 k1 = c2.cross(k3);
  const Vec3 k2 = k3.cross(k1);

  const double n1 = k1.norm();
  const double n2 = k2.norm();
  const double n3 = k3.norm();
  if (n1 < kEpsAxis || n2 < kEpsAxis || n3 < kEpsAxis)
    throw DegenerateColumns("orthonormalize: columns are near-parallel");

  const Vec3 u1 = k1 / n1;
  const Vec3 u2 = k2 / n2;
  const Vec3 u3 = k3 / n3;

  Mat3 out;
  out.m = {u1.x, u2.x, u3.x,
           u1.y, u2.y, u3.y,
           u1.z, u2.z, u3.z};
  return out;
}

Mat3 yaw_matrix(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Mat3 r;
  r.m = {c, -s, 0.0,
         s, c, 0.0,
         0.0, 0.0, 1.0};
  return r;
}

double wrap_pi(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

double wrap_two_pi(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

}  // namespace lbpm
