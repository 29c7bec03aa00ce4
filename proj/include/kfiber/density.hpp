#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kfiber/fiber.hpp"
#include "kfiber/geometry.hpp"

namespace kfiber {

/// Spatial linear trend beta_0 + beta^T z. Evaluation may be nonpositive at
/// some locations; the policy for that lives where reciprocals are taken.
struct LinearTrend {
  Eigen::VectorXd beta;  // length dim + 1: intercept, then slopes

  double eval(const Vec3& z, int dim) const {
    double v = beta[0];
    for (int i = 0; i < dim; ++i) v += beta[i + 1] * z[i];
    return v;
  }

  static LinearTrend constant(double c, int dim) {
    LinearTrend t;
    t.beta = Eigen::VectorXd::Zero(dim + 1);
    t.beta[0] = c;
    return t;
  }
};

/// One histogram factor: masses over contiguous bins of a coordinate whose
/// full range has the given total width. Masses sum to one; the density on a
/// bin is mass / (width / range), so the factor integrates to one under the
/// normalized reference measure.
struct HistogramFactor {
  std::vector<double> edges;   // size bins + 1, strictly increasing
  std::vector<double> masses;  // size bins, nonnegative, sums to 1
  double range = 0.0;          // total coordinate range the edges cover

  double density_at(double coord) const;
};

/// Directional density eta on the sphere (oriented) or canonical hemisphere
/// (unoriented), normalized so that its integral against nu is one. The 3D
/// histograms use cylindrical coordinates (h, phi) = (tau_1, arctan(tau_3 /
/// tau_2)), whose Jacobian to the sphere is one.
struct DirectionalDensity {
  enum class Kind { Uniform, Histogram2D, HistogramCyl3D };
  Kind kind = Kind::Uniform;
  HistogramFactor angle;   // 2D angle, or 3D phi
  HistogramFactor height;  // 3D h = tau_1 only

  double eval(const Direction& s, const OrientationConvention& conv) const;

  static DirectionalDensity uniform() { return {}; }
};

struct DensityModel {
  LinearTrend trend;
  DirectionalDensity eta;
  OrientationConvention conv;

  double eval(const Vec3& z, const Direction& s) const {
    return eta.eval(s, conv) * trend.eval(z, conv.dim());
  }
};

/// Moment matrix R = int_W (1, z^T)^T (1, z^T) dz, in closed form.
Eigen::MatrixXd moment_matrix(const Window& w);

/// Solves the estimating equation R beta = L_hat, with
/// L_hat = sum of weight * (1, x^T)^T over samples inside the window.
LinearTrend estimate_beta(const std::vector<SamplePoint>& samples,
                          const Window& w);

/// Histogram estimate of eta from canonicalized tangents. In 3D the factors
/// (height, angle) are fitted as independent marginals; `symmetric_height`
/// additionally symmetrizes the height masses around zero (requires
/// uniform bin edges, which this always uses). Requires the canonical pole.
DirectionalDensity fit_eta_histogram(const std::vector<Direction>& tangents,
                                     const OrientationConvention& conv,
                                     int angle_bins, int height_bins = 10,
                                     bool symmetric_height = false);

/// Cylindrical coordinates of a canonicalized direction: (angle) in 2D,
/// (height, angle) in 3D. Conventions: arctan(0/0) = 0, arctan(+-inf) =
/// +-pi/2.
std::pair<double, double> direction_coords(const Direction& s,
                                           const OrientationConvention& conv);

}  // namespace kfiber
