#include "kfiber/kstat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kfiber {
namespace {

constexpr double kDensityFloor = 1e-12;

struct PreppedSample {
  Vec3 x;
  Direction tangent;
  int fiber_id;
  double inv_rho_weight;  // weight / rho(x, tangent)
};

// Kahan-compensated accumulator matrix; per-bin compensation keeps the sums
// insensitive to enumeration order.
class BinAccumulator {
 public:
  BinAccumulator(Eigen::Index rows, Eigen::Index cols)
      : sum_(Eigen::MatrixXd::Zero(rows, cols)),
        comp_(Eigen::MatrixXd::Zero(rows, cols)) {}

  void add(Eigen::Index i, Eigen::Index j, double v) {
    const double y = v - comp_(i, j);
    const double t = sum_(i, j) + y;
    comp_(i, j) = (t - sum_(i, j)) - y;
    sum_(i, j) = t;
  }

  const Eigen::MatrixXd& matrix() const { return sum_; }

 private:
  Eigen::MatrixXd sum_;
  Eigen::MatrixXd comp_;
};

class PairBinner {
 public:
  PairBinner(const KGrid& grid, const Window& w,
             const OrientationConvention& conv)
      : grid_(&grid), window_(&w), conv_(&conv),
        bins_(static_cast<Eigen::Index>(grid.r1.size()),
              static_cast<Eigen::Index>(grid.r2.size())) {}

  // Unordered pair; contributes both ordered orientations at once.
  void add_pair(const PreppedSample& p, const PreppedSample& q) {
    if (p.fiber_id == q.fiber_id) return;
    const Vec3 h = q.x - p.x;
    const double dist = norm(h);
    if (dist > grid_->r1.back()) return;
    const double dang = direction_distance(p.tangent, q.tangent, *conv_);
    if (dang > grid_->r2.back()) return;
    const auto i = static_cast<Eigen::Index>(
        std::lower_bound(grid_->r1.begin(), grid_->r1.end(), dist) -
        grid_->r1.begin());
    if (i == static_cast<Eigen::Index>(grid_->r1.size())) return;
    const auto j = static_cast<Eigen::Index>(
        std::lower_bound(grid_->r2.begin(), grid_->r2.end(), dang) -
        grid_->r2.begin());
    if (j == static_cast<Eigen::Index>(grid_->r2.size())) return;
    bins_.add(i, j, 2.0 * p.inv_rho_weight * q.inv_rho_weight *
                        edge_correction(*window_, h));
    pairs_ += 2;
  }

  // Cumulative sums over both radii turn per-bin mass into K at every grid
  // point in one pass.
  Eigen::MatrixXd finish() const {
    Eigen::MatrixXd k = bins_.matrix();
    for (Eigen::Index i = 1; i < k.rows(); ++i) k.row(i) += k.row(i - 1);
    for (Eigen::Index j = 1; j < k.cols(); ++j) k.col(j) += k.col(j - 1);
    return k / window_->volume();
  }

  std::int64_t pairs() const { return pairs_; }

 private:
  const KGrid* grid_;
  const Window* window_;
  const OrientationConvention* conv_;
  BinAccumulator bins_;
  std::int64_t pairs_ = 0;
};

void scan_naive(const std::vector<PreppedSample>& pts, PairBinner& binner) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      binner.add_pair(pts[i], pts[j]);
}

void scan_grid(const std::vector<PreppedSample>& pts, const Window& w,
               double cell_size, PairBinner& binner) {
  const int dim = w.dim;
  int ncells[3] = {1, 1, 1};
  double width[3] = {1.0, 1.0, 1.0};
  for (int a = 0; a < dim; ++a) {
    ncells[a] = std::max(1, static_cast<int>(
                                std::floor(w.extents[a] / cell_size)));
    width[a] = w.extents[a] / ncells[a];
  }
  const auto cell_of = [&](const Vec3& x, int a) {
    return std::min(ncells[a] - 1,
                    std::max(0, static_cast<int>(std::floor(x[a] / width[a]))));
  };
  const auto flat = [&](int cx, int cy, int cz) {
    return (cz * ncells[1] + cy) * ncells[0] + cx;
  };

  std::vector<std::vector<std::uint32_t>> cells(
      static_cast<std::size_t>(ncells[0]) * ncells[1] * ncells[2]);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3& x = pts[i].x;
    cells[flat(cell_of(x, 0), cell_of(x, 1), dim == 3 ? cell_of(x, 2) : 0)]
        .push_back(static_cast<std::uint32_t>(i));
  }

  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3& x = pts[i].x;
    const int cx = cell_of(x, 0), cy = cell_of(x, 1),
              cz = dim == 3 ? cell_of(x, 2) : 0;
    const int zlo = dim == 3 ? std::max(0, cz - 1) : 0;
    const int zhi = dim == 3 ? std::min(ncells[2] - 1, cz + 1) : 0;
    for (int nz = zlo; nz <= zhi; ++nz)
      for (int ny = std::max(0, cy - 1); ny <= std::min(ncells[1] - 1, cy + 1);
           ++ny)
        for (int nx = std::max(0, cx - 1);
             nx <= std::min(ncells[0] - 1, cx + 1); ++nx)
          for (const std::uint32_t j : cells[flat(nx, ny, nz)])
            if (j > i) binner.add_pair(pts[i], pts[j]);
  }
}

}  // namespace

void KGrid::validate(const Window& w, const OrientationConvention& conv) const {
  if (r1.empty() || r2.empty())
    throw std::invalid_argument("KGrid: empty radius list");
  if (!(r1.front() > 0.0))
    throw std::invalid_argument("KGrid: r1 values must be positive");
  if (!std::is_sorted(r1.begin(), r1.end()) ||
      std::adjacent_find(r1.begin(), r1.end()) != r1.end())
    throw std::invalid_argument("KGrid: r1 values must be strictly increasing");
  if (!std::is_sorted(r2.begin(), r2.end()) ||
      std::adjacent_find(r2.begin(), r2.end()) != r2.end())
    throw std::invalid_argument("KGrid: r2 values must be strictly increasing");
  if (!(r1.back() < w.min_extent()))
    throw std::invalid_argument(
        "KGrid: max r1 must be smaller than the smallest window extent");
  if (r2.front() < 0.0 || r2.back() > conv.max_r2() + 1e-12)
    throw std::invalid_argument("KGrid: r2 outside the convention's range");
}

KGrid KGrid::linspace_r1(double r1_max, int steps, std::vector<double> r2s) {
  if (steps < 1 || !(r1_max > 0.0))
    throw std::invalid_argument("KGrid: need positive r1_max and steps");
  KGrid g;
  g.r1.resize(steps);
  for (int i = 0; i < steps; ++i) g.r1[i] = r1_max * (i + 1) / steps;
  g.r2 = std::move(r2s);
  return g;
}

KEstimate estimate_k(const std::vector<SamplePoint>& samples,
                     const DensityModel& model, const Window& w,
                     const KGrid& grid, NonpositivePolicy policy,
                     PairSearch search) {
  grid.validate(w, model.conv);

  KEstimate est;
  est.grid = grid;

  std::vector<PreppedSample> pts;
  pts.reserve(samples.size());
  for (const SamplePoint& p : samples) {
    if (!w.contains(p.location)) continue;
    ++est.samples_in_window;
    const double rho = model.eval(p.location, p.tangent);
    if (!(rho > kDensityFloor)) {
      if (policy == NonpositivePolicy::Fail)
        throw std::runtime_error(
            "estimate_k: nonpositive fitted density at a sample point");
      ++est.samples_nonpositive_density;
      continue;
    }
    pts.push_back({p.location, p.tangent, p.fiber_id, p.weight / rho});
  }

  PairBinner binner(grid, w, model.conv);
  if (search == PairSearch::Naive)
    scan_naive(pts, binner);
  else
    scan_grid(pts, w, grid.r1.back(), binner);

  est.k_hat = binner.finish();
  est.pairs_used = binner.pairs();

  const auto nr1 = static_cast<Eigen::Index>(grid.r1.size());
  const auto nr2 = static_cast<Eigen::Index>(grid.r2.size());
  est.k0.resize(nr1, nr2);
  for (Eigen::Index i = 0; i < nr1; ++i)
    for (Eigen::Index j = 0; j < nr2; ++j)
      est.k0(i, j) = k0(grid.r1[i], grid.r2[j], w.dim, model.conv);

  if (grid.r2.front() > 0.0)
    est.k_rel = est.k_hat.cwiseQuotient(est.k0);
  return est;
}

Eigen::MatrixXd relative_k(const KEstimate& est) {
  if (est.grid.r1.front() <= 0.0 || est.grid.r2.front() <= 0.0)
    throw std::domain_error("relative_k: grid contains r1 = 0 or r2 = 0");
  return est.k_hat.cwiseQuotient(est.k0);
}

}  // namespace kfiber
