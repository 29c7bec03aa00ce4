#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kfiber {

// Points and displacements live in a fixed 3-slot array; the unused third
// component is zero in dimension 2. The dimension is carried by Window,
// Direction and OrientationConvention.
using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double c, const Vec3& a) {
  return {c * a[0], c * a[1], c * a[2]};
}
inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Unit vector in R^d, d = 2 or 3. Construction renormalizes when the input
/// norm is within 1e-6 of one (tangents come from numeric differentiation)
/// and rejects anything farther off.
class Direction {
 public:
  Direction(double x, double y) : Direction(Vec3{x, y, 0.0}, 2) {}
  Direction(double x, double y, double z) : Direction(Vec3{x, y, z}, 3) {}
  Direction(const Vec3& v, int dim) : v_(v), dim_(dim) {
    if (dim != 2 && dim != 3)
      throw std::invalid_argument("Direction: dim must be 2 or 3");
    if (dim == 2 && v_[2] != 0.0)
      throw std::invalid_argument("Direction: nonzero z in dimension 2");
    const double n = norm(v_);
    if (std::abs(n - 1.0) > 1e-6)
      throw std::invalid_argument("Direction: vector is not unit length");
    v_ = (1.0 / n) * v_;
  }

  const Vec3& vec() const { return v_; }
  double operator[](std::size_t i) const { return v_[i]; }
  int dim() const { return dim_; }

  Direction negated() const { return Direction(-1.0 * v_, dim_); }

  friend bool operator==(const Direction& a, const Direction& b) {
    return a.dim_ == b.dim_ && a.v_ == b.v_;
  }

 private:
  Vec3 v_;
  int dim_;
};

/// Whether tangents are points of the full sphere or represent undirected
/// lines, identified with the hemisphere around `pole`.
struct OrientationConvention {
  bool oriented;
  Direction pole;

  int dim() const { return pole.dim(); }
  double max_r2() const { return oriented ? M_PI : M_PI / 2.0; }

  static OrientationConvention make_oriented(int dim) {
    return {true, canonical_pole(dim)};
  }
  static OrientationConvention make_unoriented(int dim) {
    return {false, canonical_pole(dim)};
  }
  static Direction canonical_pole(int dim) {
    return dim == 2 ? Direction(0.0, 1.0) : Direction(0.0, 1.0, 0.0);
  }
};

/// Axis-aligned box window prod_i [0, a_i].
struct Window {
  int dim;
  Vec3 extents;  // extents[dim..2] unused (zero)

  Window(int d, const std::vector<double>& sides) : dim(d), extents{0, 0, 0} {
    if (d != 2 && d != 3) throw std::invalid_argument("Window: dim must be 2 or 3");
    if (static_cast<int>(sides.size()) != d)
      throw std::invalid_argument("Window: wrong number of side lengths");
    for (int i = 0; i < d; ++i) {
      if (!(sides[i] > 0.0))
        throw std::invalid_argument("Window: side lengths must be positive");
      extents[i] = sides[i];
    }
  }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= extents[i];
    return v;
  }

  double min_extent() const {
    double m = extents[0];
    for (int i = 1; i < dim; ++i) m = std::min(m, extents[i]);
    return m;
  }

  bool contains(const Vec3& x) const {
    for (int i = 0; i < dim; ++i)
      if (x[i] < 0.0 || x[i] > extents[i]) return false;
    return true;
  }
};

/// Angle between unit vectors, in [0, pi].
double angle_distance(const Direction& t1, const Direction& t2);

/// Angle between the lines spanned by two unit vectors, in [0, pi/2].
double line_distance(const Direction& t1, const Direction& t2);

/// Metric matching the convention: angle_distance when oriented, line_distance
/// when unoriented.
double direction_distance(const Direction& t1, const Direction& t2,
                          const OrientationConvention& conv);

/// Hemisphere representative of t under an unoriented convention; identity
/// when oriented. Idempotent.
Direction canonicalize(const Direction& t, const OrientationConvention& conv);

/// nu(tau : d_S(tau, pole) <= r2) under the normalization nu(S) = 1.
double cap_fraction(double r2, int dim, const OrientationConvention& conv);

/// Lebesgue volume of the d-ball of radius r.
double ball_volume(int dim, double r);

/// Null-model K-function value |b(0,r1)| * cap_fraction(r2).
double k0(double r1, double r2, int dim, const OrientationConvention& conv);

/// Translation edge correction |W| / |W intersect W_h| for displacement h.
/// Throws when the overlap is empty.
double edge_correction(const Window& w, const Vec3& h);

}  // namespace kfiber
