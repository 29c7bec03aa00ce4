#include "kfiber/fiber.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "kfiber/rng.hpp"

namespace kfiber {
namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr int kGlN = 8;
constexpr double kGlX[kGlN] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGlW[kGlN] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

constexpr double kMinSpeed = 1e-9;

// Cumulative arclength of a cubic curve over [-1, 1], tabulated on uniform
// parameter panels with Gauss-Legendre quadrature inside each panel.
class ArcTable {
 public:
  explicit ArcTable(const CubicCurve& c, int panels = 256) : curve_(&c) {
    cum_.resize(panels + 1);
    params_.resize(panels + 1);
    cum_[0] = 0.0;
    params_[0] = -1.0;
    const double h = 2.0 / panels;
    for (int i = 0; i < panels; ++i) {
      const double a = -1.0 + i * h;
      double len = 0.0;
      for (int k = 0; k < kGlN; ++k) {
        const double t = a + 0.5 * h * (kGlX[k] + 1.0);
        len += kGlW[k] * norm(c.derivative(t));
      }
      cum_[i + 1] = cum_[i] + 0.5 * h * len;
      params_[i + 1] = a + h;
    }
  }

  double total() const { return cum_.back(); }

  double param_at(double s) const {
    s = std::clamp(s, 0.0, total());
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), s);
    std::size_t i = it == cum_.begin() ? 0 : (it - cum_.begin()) - 1;
    if (i + 1 >= cum_.size()) i = cum_.size() - 2;
    const double seg = cum_[i + 1] - cum_[i];
    const double frac = seg > 0.0 ? (s - cum_[i]) / seg : 0.0;
    return params_[i] + frac * (params_[i + 1] - params_[i]);
  }

 private:
  const CubicCurve* curve_;
  std::vector<double> cum_;
  std::vector<double> params_;
};

struct Located {
  Vec3 point;
  Vec3 tangent;  // unit, before canonicalization
};

Located locate_segment(const Segment& seg, double s) {
  const Vec3 start = seg.midpoint - (0.5 * seg.length) * seg.direction.vec();
  return {start + s * seg.direction.vec(), seg.direction.vec()};
}

Located locate_polyline(const Polyline& pl, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pl.vertices.size(); ++i) {
    const Vec3 edge = pl.vertices[i + 1] - pl.vertices[i];
    const double len = norm(edge);
    // Tangent at a vertex uses the following edge's direction.
    if (s <= acc + len || i + 2 == pl.vertices.size()) {
      const double local = std::clamp(s - acc, 0.0, len);
      const Vec3 dir = (1.0 / len) * edge;
      return {pl.vertices[i] + local * dir, dir};
    }
    acc += len;
  }
  throw std::logic_error("locate_polyline: empty polyline");
}

Located locate_cubic(const CubicCurve& c, const ArcTable& table, double s) {
  const double t = table.param_at(s);
  const Vec3 d = c.derivative(t);
  const double speed = norm(d);
  if (speed < kMinSpeed)
    throw std::runtime_error("discretize: vanishing derivative on cubic curve");
  return {c.point(t), (1.0 / speed) * d};
}

void validate(const Fiber& f) {
  if (const auto* seg = std::get_if<Segment>(&f.geometry)) {
    if (!(seg->length > 0.0))
      throw std::invalid_argument("Fiber: segment length must be positive");
  } else if (const auto* pl = std::get_if<Polyline>(&f.geometry)) {
    if (pl->vertices.size() < 2)
      throw std::invalid_argument("Fiber: polyline needs at least 2 vertices");
    for (std::size_t i = 0; i + 1 < pl->vertices.size(); ++i)
      if (!(norm(pl->vertices[i + 1] - pl->vertices[i]) > 0.0))
        throw std::invalid_argument("Fiber: repeated polyline vertex");
  }
}

}  // namespace

SamplingConfig SamplingConfig::poisson(double phi, std::uint64_t seed) {
  if (!(phi > 0.0))
    throw std::invalid_argument("SamplingConfig: intensity must be positive");
  SamplingConfig cfg;
  cfg.mode = Mode::PoissonOnFiber;
  cfg.intensity = phi;
  cfg.seed = seed;
  return cfg;
}

SamplingConfig SamplingConfig::equispaced(double delta) {
  if (!(delta > 0.0))
    throw std::invalid_argument("SamplingConfig: spacing must be positive");
  SamplingConfig cfg;
  cfg.mode = Mode::Equispaced;
  cfg.spacing = delta;
  return cfg;
}

double fiber_length(const Fiber& f) {
  validate(f);
  if (const auto* seg = std::get_if<Segment>(&f.geometry)) return seg->length;
  if (const auto* pl = std::get_if<Polyline>(&f.geometry)) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pl->vertices.size(); ++i)
      len += norm(pl->vertices[i + 1] - pl->vertices[i]);
    return len;
  }
  return ArcTable(std::get<CubicCurve>(f.geometry)).total();
}

Vec3 fiber_midpoint(const Fiber& f) {
  validate(f);
  if (const auto* seg = std::get_if<Segment>(&f.geometry)) return seg->midpoint;
  if (const auto* pl = std::get_if<Polyline>(&f.geometry))
    return locate_polyline(*pl, 0.5 * fiber_length(f)).point;
  const auto& c = std::get<CubicCurve>(f.geometry);
  const ArcTable table(c);
  return c.point(table.param_at(0.5 * table.total()));
}

std::vector<SamplePoint> discretize(const Fiber& f, const SamplingConfig& cfg,
                                    const OrientationConvention& conv) {
  validate(f);
  const double len = fiber_length(f);
  if (!(len > 0.0)) throw std::invalid_argument("discretize: zero-length fiber");

  std::vector<double> arcs;
  double weight;
  if (cfg.mode == SamplingConfig::Mode::Equispaced) {
    const double delta = cfg.spacing;
    const auto n = static_cast<std::size_t>(std::floor(len / delta));
    arcs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) arcs.push_back((k + 0.5) * delta);
    weight = delta;
  } else {
    Rng rng(cfg.seed);
    const auto n = rng.poisson(cfg.intensity * len);
    arcs.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) arcs.push_back(rng.uniform(0.0, len));
    weight = 1.0 / cfg.intensity;
  }

  std::optional<ArcTable> table;
  if (std::holds_alternative<CubicCurve>(f.geometry))
    table.emplace(std::get<CubicCurve>(f.geometry));

  std::vector<SamplePoint> out;
  out.reserve(arcs.size());
  for (const double s : arcs) {
    Located loc =
        std::holds_alternative<Segment>(f.geometry)
            ? locate_segment(std::get<Segment>(f.geometry), s)
        : std::holds_alternative<Polyline>(f.geometry)
            ? locate_polyline(std::get<Polyline>(f.geometry), s)
            : locate_cubic(std::get<CubicCurve>(f.geometry), *table, s);
    const Direction tangent =
        canonicalize(Direction(loc.tangent, conv.dim()), conv);
    out.push_back({loc.point, tangent, f.id, weight});
  }
  return out;
}

std::vector<SamplePoint> discretize_all(const std::vector<Fiber>& fibers,
                                        const SamplingConfig& cfg,
                                        const OrientationConvention& conv) {
  std::vector<SamplePoint> all;
  for (const Fiber& f : fibers) {
    SamplingConfig local = cfg;
    if (cfg.mode == SamplingConfig::Mode::PoissonOnFiber)
      local.seed = derive_seed(cfg.seed, Stream::FiberSampling,
                               static_cast<std::uint64_t>(f.id));
    auto pts = discretize(f, local, conv);
    all.insert(all.end(), pts.begin(), pts.end());
  }
  return all;
}

CubicFit fit_cubic_curve(const std::vector<Vec3>& points, int fiber_id) {
  const auto n = points.size();
  if (n < 8)
    throw std::invalid_argument("fit_cubic_curve: need at least 8 points");

  Eigen::MatrixXd cloud(n, 3);
  for (std::size_t i = 0; i < n; ++i)
    cloud.row(i) << points[i][0], points[i][1], points[i][2];
  const Eigen::RowVector3d centroid = cloud.colwise().mean();
  const Eigen::MatrixXd centered = cloud.rowwise() - centroid;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(
      centered.transpose() * centered);
  Eigen::Vector3d axis = eig.eigenvectors().col(2);  // largest eigenvalue
  // Deterministic sign: first nonzero component positive.
  for (int i = 0; i < 3; ++i) {
    if (axis[i] != 0.0) {
      if (axis[i] < 0.0) axis = -axis;
      break;
    }
  }

  Eigen::VectorXd t = centered * axis;
  const double tmin = t.minCoeff(), tmax = t.maxCoeff();
  if (!(tmax - tmin > 1e-12))
    throw std::invalid_argument("fit_cubic_curve: degenerate point cloud");
  t = (2.0 * (t.array() - tmin) / (tmax - tmin) - 1.0).matrix();

  Eigen::MatrixXd design(n, 4);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t[i];
    design.row(i) << 1.0, ti, ti * ti, ti * ti * ti;
  }
  const Eigen::MatrixXd sol =
      design.colPivHouseholderQr().solve(cloud);  // 4 x 3

  CubicCurve curve;
  for (int a = 0; a < 3; ++a)
    for (int k = 0; k < 4; ++k) curve.coeffs[a][k] = sol(k, a);

  const double ss = (design * sol - cloud).squaredNorm();
  return {Fiber{fiber_id, curve}, std::sqrt(ss / static_cast<double>(n))};
}

}  // namespace kfiber
