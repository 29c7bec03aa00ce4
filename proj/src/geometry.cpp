#include "kfiber/geometry.hpp"

#include <algorithm>

namespace kfiber {

double angle_distance(const Direction& t1, const Direction& t2) {
  if (t1.dim() != t2.dim())
    throw std::invalid_argument("angle_distance: dimension mismatch");
  const double d = std::clamp(dot(t1.vec(), t2.vec()), -1.0, 1.0);
  return std::acos(d);
}

double line_distance(const Direction& t1, const Direction& t2) {
  if (t1.dim() != t2.dim())
    throw std::invalid_argument("line_distance: dimension mismatch");
  const double d = std::clamp(std::abs(dot(t1.vec(), t2.vec())), 0.0, 1.0);
  return std::acos(d);
}

double direction_distance(const Direction& t1, const Direction& t2,
                          const OrientationConvention& conv) {
  return conv.oriented ? angle_distance(t1, t2) : line_distance(t1, t2);
}

Direction canonicalize(const Direction& t, const OrientationConvention& conv) {
  if (conv.oriented) return t;
  if (t.dim() != conv.pole.dim())
    throw std::invalid_argument("canonicalize: dimension mismatch");
  const double d = dot(t.vec(), conv.pole.vec());
  if (d > 0.0) return t;
  if (d < 0.0) return t.negated();
  // On the hemisphere boundary: pick the representative whose first nonzero
  // coordinate is positive.
  for (int i = 0; i < t.dim(); ++i) {
    if (t[i] > 0.0) return t;
    if (t[i] < 0.0) return t.negated();
  }
  return t;  // unreachable for unit vectors
}

double cap_fraction(double r2, int dim, const OrientationConvention& conv) {
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("cap_fraction: dim must be 2 or 3");
  if (r2 < 0.0 || r2 > conv.max_r2() + 1e-12)
    throw std::invalid_argument("cap_fraction: r2 out of range");
  const double oriented_value =
      dim == 2 ? r2 / M_PI : 0.5 * (1.0 - std::cos(r2));
  if (conv.oriented) return oriented_value;
  return std::min(1.0, 2.0 * oriented_value);
}

double ball_volume(int dim, double r) {
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("ball_volume: dim must be 2 or 3");
  if (r < 0.0) throw std::invalid_argument("ball_volume: negative radius");
  return dim == 2 ? M_PI * r * r : (4.0 / 3.0) * M_PI * r * r * r;
}

double k0(double r1, double r2, int dim, const OrientationConvention& conv) {
  if (r1 < 0.0) throw std::invalid_argument("k0: negative r1");
  return ball_volume(dim, r1) * cap_fraction(r2, dim, conv);
}

double edge_correction(const Window& w, const Vec3& h) {
  double overlap = 1.0;
  for (int i = 0; i < w.dim; ++i) {
    const double side = w.extents[i] - std::abs(h[i]);
    if (!(side > 0.0))
      throw std::invalid_argument("edge_correction: empty window overlap");
    overlap *= side;
  }
  return w.volume() / overlap;
}

}  // namespace kfiber
