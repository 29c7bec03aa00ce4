#include "kfiber/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kfiber {
namespace {

std::size_t bin_index(const std::vector<double>& edges, double coord) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), coord);
  const auto raw = static_cast<std::ptrdiff_t>(it - edges.begin()) - 1;
  const auto last = static_cast<std::ptrdiff_t>(edges.size()) - 2;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(raw, 0, last));
}

std::vector<double> uniform_edges(double lo, double hi, int bins) {
  std::vector<double> edges(bins + 1);
  for (int i = 0; i <= bins; ++i)
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / bins;
  return edges;
}

void require_canonical_pole(const OrientationConvention& conv) {
  if (!conv.oriented &&
      !(conv.pole == OrientationConvention::canonical_pole(conv.dim())))
    throw std::invalid_argument(
        "histogram eta requires the canonical hemisphere pole");
}

HistogramFactor fit_factor(const std::vector<double>& coords, double lo,
                           double hi, int bins) {
  HistogramFactor f;
  f.edges = uniform_edges(lo, hi, bins);
  f.masses.assign(bins, 0.0);
  for (const double c : coords) f.masses[bin_index(f.edges, c)] += 1.0;
  const double total = static_cast<double>(coords.size());
  for (double& m : f.masses) m /= total;
  f.range = hi - lo;
  return f;
}

}  // namespace

double HistogramFactor::density_at(double coord) const {
  if (coord < edges.front() || coord > edges.back()) return 0.0;
  const std::size_t i = bin_index(edges, coord);
  return masses[i] / ((edges[i + 1] - edges[i]) / range);
}

std::pair<double, double> direction_coords(const Direction& s,
                                           const OrientationConvention& conv) {
  require_canonical_pole(conv);
  const Direction c = canonicalize(s, conv);
  if (conv.dim() == 2) return {std::atan2(c[1], c[0]), 0.0};
  // atan2(0, 0) == 0, matching the arctan(0/0) = 0 convention; with the
  // canonical pole the unoriented angle stays in [-pi/2, pi/2].
  return {c[0], std::atan2(c[2], c[1])};
}

double DirectionalDensity::eval(const Direction& s,
                                const OrientationConvention& conv) const {
  if (kind == Kind::Uniform) return 1.0;
  const auto [first, second] = direction_coords(s, conv);
  if (kind == Kind::Histogram2D) return angle.density_at(first);
  return height.density_at(first) * angle.density_at(second);
}

Eigen::MatrixXd moment_matrix(const Window& w) {
  const int d = w.dim;
  const double vol = w.volume();
  Eigen::MatrixXd r(d + 1, d + 1);
  r(0, 0) = vol;
  for (int i = 0; i < d; ++i) {
    r(0, i + 1) = r(i + 1, 0) = vol * w.extents[i] / 2.0;
    for (int j = 0; j < d; ++j)
      r(i + 1, j + 1) = i == j ? vol * w.extents[i] * w.extents[i] / 3.0
                               : vol * w.extents[i] * w.extents[j] / 4.0;
  }
  return r;
}

LinearTrend estimate_beta(const std::vector<SamplePoint>& samples,
                          const Window& w) {
  const int d = w.dim;
  Eigen::VectorXd l = Eigen::VectorXd::Zero(d + 1);
  std::size_t used = 0;
  for (const SamplePoint& p : samples) {
    if (!w.contains(p.location)) continue;
    l[0] += p.weight;
    for (int i = 0; i < d; ++i) l[i + 1] += p.weight * p.location[i];
    ++used;
  }
  if (used == 0)
    throw std::runtime_error("estimate_beta: no samples inside the window");
  LinearTrend trend;
  trend.beta = moment_matrix(w).llt().solve(l);
  return trend;
}

DirectionalDensity fit_eta_histogram(const std::vector<Direction>& tangents,
                                     const OrientationConvention& conv,
                                     int angle_bins, int height_bins,
                                     bool symmetric_height) {
  if (tangents.empty())
    throw std::invalid_argument("fit_eta_histogram: no tangents");
  if (angle_bins < 1 || height_bins < 1)
    throw std::invalid_argument("fit_eta_histogram: need at least one bin");
  require_canonical_pole(conv);

  std::vector<double> first, second;
  first.reserve(tangents.size());
  second.reserve(tangents.size());
  for (const Direction& t : tangents) {
    const auto [a, b] = direction_coords(t, conv);
    first.push_back(a);
    second.push_back(b);
  }

  DirectionalDensity eta;
  if (conv.dim() == 2) {
    eta.kind = DirectionalDensity::Kind::Histogram2D;
    const double lo = conv.oriented ? -M_PI : 0.0;
    const double hi = M_PI;
    eta.angle = fit_factor(first, lo, hi, angle_bins);
  } else {
    eta.kind = DirectionalDensity::Kind::HistogramCyl3D;
    eta.height = fit_factor(first, -1.0, 1.0, height_bins);
    const double alim = conv.oriented ? M_PI : M_PI / 2.0;
    eta.angle = fit_factor(second, -alim, alim, angle_bins);
    if (symmetric_height) {
      auto& m = eta.height.masses;
      for (std::size_t i = 0, j = m.size() - 1; i < j; ++i, --j)
        m[i] = m[j] = 0.5 * (m[i] + m[j]);
    }
  }
  return eta;
}

}  // namespace kfiber
