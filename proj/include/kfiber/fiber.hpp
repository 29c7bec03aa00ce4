#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "kfiber/geometry.hpp"

namespace kfiber {

struct Segment {
  Vec3 midpoint;
  Direction direction;
  double length;
};

struct Polyline {
  std::vector<Vec3> vertices;  // >= 2, consecutive vertices distinct
};

/// Per-coordinate degree-3 polynomial over t in [-1, 1].
struct CubicCurve {
  // coeffs[axis][k] multiplies t^k.
  std::array<std::array<double, 4>, 3> coeffs;

  Vec3 point(double t) const {
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      const auto& c = coeffs[a];
      p[a] = ((c[3] * t + c[2]) * t + c[1]) * t + c[0];
    }
    return p;
  }
  Vec3 derivative(double t) const {
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      const auto& c = coeffs[a];
      p[a] = (3.0 * c[3] * t + 2.0 * c[2]) * t + c[1];
    }
    return p;
  }
};

struct Fiber {
  int id;
  std::variant<Segment, Polyline, CubicCurve> geometry;
};

/// A discretized fiber location: the atom of every estimator. `weight` is
/// the reciprocal sampling intensity (Poisson mode) or the spacing
/// (equispaced mode), so sums of weights approximate length integrals.
struct SamplePoint {
  Vec3 location;
  Direction tangent;  // canonicalized under the pattern's convention
  int fiber_id;
  double weight;
};

struct SamplingConfig {
  enum class Mode { PoissonOnFiber, Equispaced };
  Mode mode;
  double intensity = 0.0;  // points per unit length (Poisson mode)
  double spacing = 0.0;    // arclength spacing (equispaced mode)
  std::uint64_t seed = 0;  // Poisson mode only

  static SamplingConfig poisson(double phi, std::uint64_t seed);
  static SamplingConfig equispaced(double delta);
};

double fiber_length(const Fiber& f);

/// Point at half arclength; used when recentring resampled fibers.
Vec3 fiber_midpoint(const Fiber& f);

std::vector<SamplePoint> discretize(const Fiber& f, const SamplingConfig& cfg,
                                    const OrientationConvention& conv);

/// Discretizes every fiber with a per-fiber seed derived from cfg.seed and
/// the fiber id, so per-fiber work can run in any order.
std::vector<SamplePoint> discretize_all(const std::vector<Fiber>& fibers,
                                        const SamplingConfig& cfg,
                                        const OrientationConvention& conv);

struct CubicFit {
  Fiber fiber;
  double residual_rms;
};

/// Least-squares cubic space curve through a labeled point cloud. The curve
/// parameter is assigned by projecting onto the cloud's first principal axis
/// and rescaling to [-1, 1].
CubicFit fit_cubic_curve(const std::vector<Vec3>& points, int fiber_id = 0);

}  // namespace kfiber
