#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "kfiber/density.hpp"
#include "kfiber/fiber.hpp"
#include "kfiber/geometry.hpp"

namespace kfiber {

/// Evaluation grid: K is computed at every (r1, r2) pair.
struct KGrid {
  std::vector<double> r1;  // increasing, positive lengths
  std::vector<double> r2;  // increasing radians within the convention's range

  void validate(const Window& w, const OrientationConvention& conv) const;

  static KGrid linspace_r1(double r1_max, int steps, std::vector<double> r2s);
};

/// Policy for samples whose fitted density is below the 1e-12 floor.
enum class NonpositivePolicy { Exclude, Fail };

/// Pair enumeration strategy. Grid buckets samples into cells of side
/// max(r1) and scans the 3^d neighborhood; Naive is the quadratic loop kept
/// as an oracle. Both produce the same sums up to floating-point order.
enum class PairSearch { Grid, Naive };

struct KEstimate {
  KGrid grid;
  Eigen::MatrixXd k_hat;  // rows: r1, cols: r2
  Eigen::MatrixXd k0;
  Eigen::MatrixXd k_rel;
  // Diagnostics.
  std::int64_t pairs_used = 0;        // ordered pairs contributing
  std::int64_t samples_in_window = 0;
  std::int64_t samples_nonpositive_density = 0;
};

/// Reweighted K estimator over ordered pairs of sample points on distinct
/// fibers, both inside the window, with translation edge correction.
KEstimate estimate_k(const std::vector<SamplePoint>& samples,
                     const DensityModel& model, const Window& w,
                     const KGrid& grid,
                     NonpositivePolicy policy = NonpositivePolicy::Exclude,
                     PairSearch search = PairSearch::Grid);

/// Elementwise K_hat / K0. Throws when the grid contains r1 = 0 or r2 = 0.
Eigen::MatrixXd relative_k(const KEstimate& est);

}  // namespace kfiber
