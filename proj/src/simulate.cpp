#include "kfiber/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "kfiber/rng.hpp"

namespace kfiber {
namespace {

// Corner values of a linear function on the dilated box; linear extrema are
// attained at corners.
struct TrendRange {
  double min, max;
};

TrendRange trend_range_on_dilated(const Window& w, const LinearTrend& trend,
                                  double margin) {
  TrendRange r{std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity()};
  const int corners = 1 << w.dim;
  for (int mask = 0; mask < corners; ++mask) {
    Vec3 corner{0, 0, 0};
    for (int i = 0; i < w.dim; ++i)
      corner[i] = (mask >> i) & 1 ? w.extents[i] + margin : -margin;
    const double v = trend.eval(corner, w.dim);
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  }
  return r;
}

Direction uniform_direction(Rng& rng, int dim) {
  if (dim == 2) {
    const double a = rng.uniform(0.0, 2.0 * M_PI);
    return Direction(std::cos(a), std::sin(a));
  }
  const double z = rng.uniform(-1.0, 1.0);
  const double a = rng.uniform(0.0, 2.0 * M_PI);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Direction(r * std::cos(a), r * std::sin(a), z);
}

double chi_mean(int dim) {
  // E ||X|| for X standard normal in R^dim.
  return dim == 2 ? std::sqrt(M_PI / 2.0) : 2.0 * std::sqrt(2.0 / M_PI);
}

// P(||X|| <= x) for standard normal X in R^dim.
double chi_cdf(double x, int dim) {
  if (dim == 2) return 1.0 - std::exp(-0.5 * x * x);
  return std::erf(x / std::sqrt(2.0)) -
         std::sqrt(2.0 / M_PI) * x * std::exp(-0.5 * x * x);
}

double chi_quantile(double p, int dim) {
  double lo = 0.0, hi = 16.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (chi_cdf(mid, dim) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Fiber translated(const Fiber& f, const Vec3& shift, int new_id) {
  Fiber out{new_id, f.geometry};
  if (auto* seg = std::get_if<Segment>(&out.geometry)) {
    seg->midpoint = seg->midpoint + shift;
  } else if (auto* pl = std::get_if<Polyline>(&out.geometry)) {
    for (Vec3& v : pl->vertices) v = v + shift;
  } else {
    auto& c = std::get<CubicCurve>(out.geometry);
    for (int a = 0; a < 3; ++a) c.coeffs[a][0] += shift[a];
  }
  return out;
}

int envelope_threads() {
  if (const char* env = std::getenv("KFIBER_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

}  // namespace

std::vector<Vec3> sample_poisson_linear(const Window& w,
                                        const LinearTrend& trend,
                                        double margin, std::uint64_t seed) {
  if (margin < 0.0)
    throw std::invalid_argument("sample_poisson_linear: negative margin");
  const TrendRange range = trend_range_on_dilated(w, trend, margin);
  if (range.min < 0.0)
    throw std::invalid_argument(
        "sample_poisson_linear: trend negative on the dilated window");

  double volume = 1.0;
  for (int i = 0; i < w.dim; ++i) volume *= w.extents[i] + 2.0 * margin;

  Rng rng(seed);
  const std::uint64_t dominating = rng.poisson(range.max * volume);
  std::vector<Vec3> points;
  for (std::uint64_t k = 0; k < dominating; ++k) {
    Vec3 x{0, 0, 0};
    for (int i = 0; i < w.dim; ++i)
      x[i] = rng.uniform(-margin, w.extents[i] + margin);
    if (rng.uniform01() * range.max <= trend.eval(x, w.dim)) points.push_back(x);
  }
  return points;
}

SimulatedPattern simulate_null(const NullModelSpec& spec) {
  if (!(spec.max_length > 0.0))
    throw std::invalid_argument("simulate_null: max_length must be positive");
  const int dim = spec.window.dim;
  const auto germs =
      sample_poisson_linear(spec.window, spec.trend, spec.max_length / 2.0,
                            derive_seed(spec.seed, Stream::Germs));

  Rng lengths(derive_seed(spec.seed, Stream::Lengths));
  Rng directions(derive_seed(spec.seed, Stream::Directions));

  FiberPattern pattern{spec.window, spec.conv, {}};
  pattern.fibers.reserve(germs.size());
  int id = 0;
  for (const Vec3& u : germs) {
    // (0, max_length]; a zero-length segment would be invalid.
    const double len = spec.max_length * (1.0 - lengths.uniform01());
    pattern.fibers.push_back(
        Fiber{id++, Segment{u, uniform_direction(directions, dim), len}});
  }

  LinearTrend true_trend;
  true_trend.beta = (spec.max_length / 2.0) * spec.trend.beta;
  return {std::move(pattern),
          DensityModel{true_trend, DirectionalDensity::uniform(), spec.conv}};
}

double dependent_sigma_for_mean_length(double mean_length, int dim) {
  return mean_length / (2.0 * chi_mean(dim));
}

SimulatedPattern simulate_dependent(const DependentModelSpec& spec) {
  if (!(spec.sigma > 0.0) || !(spec.corr_scale > 0.0))
    throw std::invalid_argument(
        "simulate_dependent: sigma and corr_scale must be positive");
  const int dim = spec.window.dim;
  const double margin = spec.sigma * chi_quantile(0.999, dim);
  const auto germs = sample_poisson_linear(
      spec.window, spec.trend, margin, derive_seed(spec.seed, Stream::Germs));

  const auto n = static_cast<Eigen::Index>(germs.size());
  if (n > 10000)
    throw std::invalid_argument(
        "simulate_dependent: too many germs for dense covariance "
        "factorization (max 10000)");

  FiberPattern pattern{spec.window, spec.conv, {}};
  LinearTrend true_trend;
  true_trend.beta = 2.0 * spec.sigma * chi_mean(dim) * spec.trend.beta;
  DensityModel true_model{true_trend, DirectionalDensity::uniform(), spec.conv};

  if (n == 0) return {std::move(pattern), std::move(true_model)};

  Eigen::MatrixXd cov(n, n);
  const double var = spec.sigma * spec.sigma;
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = var;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      cov(i, j) = cov(j, i) =
          var * std::exp(-norm(germs[i] - germs[j]) / spec.corr_scale);
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt;
  bool ok = false;
  for (const double jitter : {1e-10, 1e-8, 1e-6}) {
    llt.compute(cov + jitter * var * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      ok = true;
      break;
    }
  }
  if (!ok)
    throw std::runtime_error(
        "simulate_dependent: covariance factorization failed after jitter "
        "escalation");

  Rng grf(derive_seed(spec.seed, Stream::Grf));
  std::vector<Eigen::VectorXd> fields(dim);
  for (int a = 0; a < dim; ++a) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = grf.normal();
    fields[a] = llt.matrixL() * z;
  }

  pattern.fibers.reserve(germs.size());
  int id = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec3 x{0, 0, 0};
    for (int a = 0; a < dim; ++a) x[a] = fields[a][i];
    const double half_len = norm(x);
    if (half_len < 1e-12) continue;  // probability-zero degenerate fiber
    pattern.fibers.push_back(Fiber{
        id++, Segment{germs[i], Direction((1.0 / half_len) * x, dim),
                      2.0 * half_len}});
  }
  return {std::move(pattern), std::move(true_model)};
}

FiberPattern resample_null(const FiberPattern& pattern,
                           const DensityModel& fitted, double mean_len,
                           std::uint64_t seed) {
  if (pattern.fibers.empty())
    throw std::runtime_error("resample_null: empty input pattern");
  if (!(mean_len > 0.0))
    throw std::invalid_argument("resample_null: mean_len must be positive");

  double margin = 0.0;
  for (const Fiber& f : pattern.fibers)
    margin = std::max(margin, 0.5 * fiber_length(f));

  LinearTrend germ_trend;
  germ_trend.beta = fitted.trend.beta / mean_len;
  const auto germs =
      sample_poisson_linear(pattern.window, germ_trend, margin,
                            derive_seed(seed, Stream::Germs));

  Rng pick(derive_seed(seed, Stream::Resampling));
  FiberPattern out{pattern.window, pattern.conv, {}};
  out.fibers.reserve(germs.size());
  int id = 0;
  for (const Vec3& u : germs) {
    const Fiber& source =
        pattern.fibers[pick.uniform_index(pattern.fibers.size())];
    out.fibers.push_back(translated(source, u - fiber_midpoint(source), id++));
  }
  return out;
}

FitOutcome fit_and_estimate(const FiberPattern& pattern,
                            const FitProcedure& proc, const KGrid& grid,
                            std::uint64_t sampling_seed) {
  SamplingConfig cfg = proc.sampling;
  cfg.seed = sampling_seed;
  const auto samples = discretize_all(pattern.fibers, cfg, pattern.conv);

  LinearTrend trend = estimate_beta(samples, pattern.window);

  DirectionalDensity eta = DirectionalDensity::uniform();
  if (proc.histogram_eta) {
    std::vector<Direction> tangents;
    tangents.reserve(samples.size());
    for (const SamplePoint& p : samples)
      if (pattern.window.contains(p.location)) tangents.push_back(p.tangent);
    eta = fit_eta_histogram(tangents, pattern.conv, proc.eta_angle_bins,
                            proc.eta_height_bins);
  }

  DensityModel model{std::move(trend), std::move(eta), pattern.conv};
  KEstimate estimate =
      estimate_k(samples, model, pattern.window, grid, proc.policy);
  return FitOutcome{std::move(model), std::move(estimate), samples.size()};
}

EnvelopeResult envelope(const FiberPattern& pattern, const FitProcedure& proc,
                        const KGrid& grid, int n_sim, std::uint64_t seed) {
  if (n_sim < 1) throw std::invalid_argument("envelope: n_sim must be >= 1");

  const FitOutcome data =
      fit_and_estimate(pattern, proc, grid,
                       derive_seed(seed, Stream::FiberSampling, 0));

  double mean_len = 0.0;
  for (const Fiber& f : pattern.fibers) mean_len += fiber_length(f);
  mean_len /= static_cast<double>(pattern.fibers.size());

  std::vector<Eigen::MatrixXd> curves(n_sim);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const int nthreads = std::min(envelope_threads(), n_sim);
  std::vector<std::thread> workers;
  for (int t = 0; t < nthreads; ++t) {
    workers.emplace_back([&, t] {
      for (int i = t; i < n_sim; i += nthreads) {
        try {
          const FiberPattern sim =
              resample_null(pattern, data.model, mean_len,
                            derive_seed(seed, Stream::Resampling, i + 1));
          curves[i] = relative_k(fit_and_estimate(
              sim, proc, grid,
              derive_seed(seed, Stream::FiberSampling, i + 1)).estimate);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);

  EnvelopeResult result;
  result.grid = grid;
  result.data = relative_k(data.estimate);
  result.lo = curves[0];
  result.hi = curves[0];
  for (int i = 1; i < n_sim; ++i) {
    result.lo = result.lo.cwiseMin(curves[i]);
    result.hi = result.hi.cwiseMax(curves[i]);
  }
  return result;
}

}  // namespace kfiber
