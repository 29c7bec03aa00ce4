#pragma once

#include <cstdint>
#include <vector>

#include "kfiber/density.hpp"
#include "kfiber/fiber.hpp"
#include "kfiber/geometry.hpp"
#include "kfiber/kstat.hpp"

namespace kfiber {

struct FiberPattern {
  Window window;
  OrientationConvention conv;
  std::vector<Fiber> fibers;
};

/// i.i.d. uniformly oriented segments with Uniform(0, max_length) lengths,
/// midpoints from an inhomogeneous Poisson process with linear intensity.
struct NullModelSpec {
  Window window;
  LinearTrend trend;  // intensity of the germ process
  double max_length;
  OrientationConvention conv;
  std::uint64_t seed;
};

/// Segments u - X(u) to u + X(u) where the coordinates of X are independent
/// zero-mean Gaussian random fields with covariance
/// sigma^2 exp(-dist / corr_scale) evaluated at the germs.
struct DependentModelSpec {
  Window window;
  LinearTrend trend;
  double corr_scale;
  double sigma;
  OrientationConvention conv;
  std::uint64_t seed;
};

struct SimulatedPattern {
  FiberPattern pattern;
  DensityModel true_model;  // first-moment density of the generating model
};

/// Exact inhomogeneous Poisson sample on the window dilated by `margin`,
/// via dominating-rate thinning. The linear trend must be nonnegative on the
/// dilated box (checked at its corners, where linear extrema live).
std::vector<Vec3> sample_poisson_linear(const Window& w,
                                        const LinearTrend& trend,
                                        double margin, std::uint64_t seed);

SimulatedPattern simulate_null(const NullModelSpec& spec);

SimulatedPattern simulate_dependent(const DependentModelSpec& spec);

/// Sigma giving the requested mean fiber length in the dependent model
/// (fiber length is 2 ||X(u)||, chi-distributed with `dim` degrees).
double dependent_sigma_for_mean_length(double mean_length, int dim);

/// Null resampling for envelopes: Poisson germs with intensity
/// trend(u) / mean_len, each receiving a fiber drawn with replacement from
/// the input pattern and recentred at the germ.
FiberPattern resample_null(const FiberPattern& pattern,
                           const DensityModel& fitted, double mean_len,
                           std::uint64_t seed);

/// How envelope replicates (and the data curve) are turned into K_rel:
/// discretize, fit beta (and optionally a histogram eta), estimate K.
struct FitProcedure {
  SamplingConfig sampling;
  bool histogram_eta = false;
  int eta_angle_bins = 10;
  int eta_height_bins = 10;
  NonpositivePolicy policy = NonpositivePolicy::Exclude;
};

struct FitOutcome {
  DensityModel model;
  KEstimate estimate;
  std::size_t sample_count = 0;
};

FitOutcome fit_and_estimate(const FiberPattern& pattern,
                            const FitProcedure& proc, const KGrid& grid,
                            std::uint64_t sampling_seed);

struct EnvelopeResult {
  KGrid grid;
  Eigen::MatrixXd lo;    // pointwise minimum of simulated K_rel
  Eigen::MatrixXd hi;    // pointwise maximum
  Eigen::MatrixXd data;  // K_rel of the input pattern, same procedure
};

/// Pointwise min/max envelope from n_sim null resamples; with n_sim = 39 the
/// two-sided pointwise level is 5%.
EnvelopeResult envelope(const FiberPattern& pattern, const FitProcedure& proc,
                        const KGrid& grid, int n_sim, std::uint64_t seed);

}  // namespace kfiber
