#pragma once

#include <cmath>
#include <vector>

#include "kfiber/fiber.hpp"
#include "kfiber/geometry.hpp"
#include "kfiber/rng.hpp"

namespace kfiber::testing {

inline Direction random_direction(Rng& rng, int dim) {
  if (dim == 2) {
    const double a = rng.uniform(0.0, 2.0 * M_PI);
    return Direction(std::cos(a), std::sin(a));
  }
  const double z = rng.uniform(-1.0, 1.0);
  const double a = rng.uniform(0.0, 2.0 * M_PI);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Direction(r * std::cos(a), r * std::sin(a), z);
}

/// Random sample points inside a window, with a handful of fiber ids so that
/// distinct-fiber pairs exist.
inline std::vector<SamplePoint> random_samples(Rng& rng, std::size_t n,
                                               const Window& w,
                                               const OrientationConvention& conv,
                                               int n_fibers = 10) {
  std::vector<SamplePoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 x{0, 0, 0};
    for (int a = 0; a < w.dim; ++a) x[a] = rng.uniform(0.0, w.extents[a]);
    out.push_back({x, canonicalize(random_direction(rng, w.dim), conv),
                   static_cast<int>(rng.uniform_index(n_fibers)),
                   rng.uniform(0.5, 1.5)});
  }
  return out;
}

}  // namespace kfiber::testing
