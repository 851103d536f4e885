#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace lbpm {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Rotations below this angle collapse to the identity regardless of axis.
inline constexpr double kEpsAngle = 1e-9;
// Vectors shorter than this are treated as directionless.
inline constexpr double kEpsAxis = 1e-12;

/// Reference frames. Ltp is the fixed East-North-Up plane, Lcp the vehicle
/// body frame (x hood, y driver side, z up) at a given time instance.
enum class Frame { Ltp, Lcp };

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const { return *this / norm(); }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const { return std::hypot(x, y); }
};

/// Rotates a planar vector counter-clockwise by `angle`.
inline Vec2 rotate2(double angle, const Vec2& v) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// 3x3 matrix, row-major.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }

  double operator()(int r, int c) const { return m[3 * r + c]; }
  double& operator()(int r, int c) { return m[3 * r + c]; }

  Vec3 col(int c) const { return {m[c], m[3 + c], m[6 + c]}; }
  Vec3 row(int r) const { return {m[3 * r], m[3 * r + 1], m[3 * r + 2]}; }

  Mat3 transposed() const {
    Mat3 t;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
    return r;
  }

  Mat3 operator*(double s) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] * s;
    return r;
  }

  double determinant() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

/// Largest absolute entry of A^T A - I; zero for an orthonormal matrix.
double orthonormality_defect(const Mat3& r);

/// Largest absolute entrywise difference.
double max_abs_diff(const Mat3& a, const Mat3& b);

/// Frobenius norm of a - b.
double frobenius_diff(const Mat3& a, const Mat3& b);

class DegenerateAxis : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateColumns : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Skew-symmetric matrix S such that S*v == w x v.
Mat3 skew(const Vec3& w);

/// Rotation by `angle` about `axis` (Rodrigues form). The axis need not be
/// normalized. Angles below kEpsAngle return the identity; otherwise a
/// near-zero axis raises DegenerateAxis.
Mat3 axis_angle_matrix(const Vec3& axis, double angle);

/// Re-orthonormalizes a drifted rotation matrix with the cross-product
/// scheme: column 3's direction is kept, column 1 is rebuilt from
/// col2 x col3, column 2 from col3 x col1, and all three are normalized.
/// Raises DegenerateColumns when the columns are too close to parallel.
Mat3 orthonormalize(const Mat3& r);

/// Rotation about the z axis by `yaw`.
Mat3 yaw_matrix(double yaw);

/// Wraps an angle to (-pi, pi].
double wrap_pi(double a);

/// Wraps an angle to [0, 2*pi).
double wrap_two_pi(double a);

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace lbpm
