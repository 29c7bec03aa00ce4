#include "kfiber/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kfiber::io {
namespace {

const json& require(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end())
    throw std::invalid_argument(std::string("missing field: ") + field);
  return *it;
}

json vec_to_json(const Vec3& v, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(v[i]);
  return a;
}

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3))
    throw std::invalid_argument("expected a coordinate array of size 2 or 3");
  Vec3 v{0, 0, 0};
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json factor_to_json(const HistogramFactor& f) {
  return {{"edges", f.edges}, {"masses", f.masses}, {"range", f.range}};
}

HistogramFactor factor_from_json(const json& j) {
  HistogramFactor f;
  f.edges = require(j, "edges").get<std::vector<double>>();
  f.masses = require(j, "masses").get<std::vector<double>>();
  f.range = require(j, "range").get<double>();
  if (f.edges.size() != f.masses.size() + 1)
    throw std::invalid_argument("histogram edges/masses size mismatch");
  double total = 0.0;
  for (const double m : f.masses) {
    if (m < 0.0) throw std::invalid_argument("negative histogram mass");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("histogram masses must sum to 1");
  return f;
}

OrientationConvention convention_from_json(const json& j) {
  const bool oriented = require(j, "oriented").get<bool>();
  const Vec3 pole = vec_from_json(require(j, "pole"));
  const int dim = j.at("pole").size() == 2 ? 2 : 3;
  return {oriented, Direction(pole, dim)};
}

json convention_to_json(const OrientationConvention& conv) {
  return {{"oriented", conv.oriented},
          {"pole", vec_to_json(conv.pole.vec(), conv.dim())}};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  return in;
}

std::vector<double> split_csv_row(const std::string& line) {
  std::vector<double> fields;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    fields.push_back(v);
  }
  return fields;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json pattern_to_json(const FiberPattern& pattern) {
  const int dim = pattern.window.dim;
  json fibers = json::array();
  for (const Fiber& f : pattern.fibers) {
    json jf{{"id", f.id}};
    if (const auto* seg = std::get_if<Segment>(&f.geometry)) {
      jf["kind"] = "segment";
      jf["midpoint"] = vec_to_json(seg->midpoint, dim);
      jf["direction"] = vec_to_json(seg->direction.vec(), dim);
      jf["length"] = seg->length;
    } else if (const auto* pl = std::get_if<Polyline>(&f.geometry)) {
      jf["kind"] = "polyline";
      json verts = json::array();
      for (const Vec3& v : pl->vertices) verts.push_back(vec_to_json(v, dim));
      jf["vertices"] = std::move(verts);
    } else {
      const auto& c = std::get<CubicCurve>(f.geometry);
      jf["kind"] = "cubic";
      jf["coeffs"] = c.coeffs;
    }
    fibers.push_back(std::move(jf));
  }
  json windowj = json::array();
  for (int i = 0; i < dim; ++i) windowj.push_back(pattern.window.extents[i]);
  return {{"dim", dim},
          {"oriented", pattern.conv.oriented},
          {"pole", vec_to_json(pattern.conv.pole.vec(), dim)},
          {"window", std::move(windowj)},
          {"fibers", std::move(fibers)}};
}

FiberPattern pattern_from_json(const json& j) {
  const int dim = require(j, "dim").get<int>();
  const Window window(dim, require(j, "window").get<std::vector<double>>());
  const OrientationConvention conv{
      require(j, "oriented").get<bool>(),
      Direction(vec_from_json(require(j, "pole")), dim)};

  FiberPattern pattern{window, conv, {}};
  std::vector<bool> seen;
  for (const json& jf : require(j, "fibers")) {
    const int id = require(jf, "id").get<int>();
    if (id >= 0) {
      if (static_cast<std::size_t>(id) >= seen.size())
        seen.resize(id + 1, false);
      if (seen[id]) throw std::invalid_argument("duplicate fiber id");
      seen[id] = true;
    }
    const std::string kind = require(jf, "kind").get<std::string>();
    if (kind == "segment") {
      pattern.fibers.push_back(Fiber{
          id, Segment{vec_from_json(require(jf, "midpoint")),
                      Direction(vec_from_json(require(jf, "direction")), dim),
                      require(jf, "length").get<double>()}});
    } else if (kind == "polyline") {
      Polyline pl;
      for (const json& v : require(jf, "vertices"))
        pl.vertices.push_back(vec_from_json(v));
      pattern.fibers.push_back(Fiber{id, std::move(pl)});
    } else if (kind == "cubic") {
      CubicCurve c;
      c.coeffs = require(jf, "coeffs")
                     .get<std::array<std::array<double, 4>, 3>>();
      pattern.fibers.push_back(Fiber{id, c});
    } else {
      throw std::invalid_argument("unknown fiber kind: " + kind);
    }
  }
  return pattern;
}

json density_to_json(const DensityModel& model) {
  json eta;
  switch (model.eta.kind) {
    case DirectionalDensity::Kind::Uniform:
      eta = {{"variant", "uniform"}};
      break;
    case DirectionalDensity::Kind::Histogram2D:
      eta = {{"variant", "hist2d"}, {"angle", factor_to_json(model.eta.angle)}};
      break;
    case DirectionalDensity::Kind::HistogramCyl3D:
      eta = {{"variant", "histcyl3d"},
             {"height", factor_to_json(model.eta.height)},
             {"angle", factor_to_json(model.eta.angle)}};
      break;
  }
  return {{"beta", std::vector<double>(model.trend.beta.begin(),
                                       model.trend.beta.end())},
          {"eta", std::move(eta)},
          {"convention", convention_to_json(model.conv)}};
}

DensityModel density_from_json(const json& j) {
  const auto beta = require(j, "beta").get<std::vector<double>>();
  LinearTrend trend;
  trend.beta = Eigen::Map<const Eigen::VectorXd>(
      beta.data(), static_cast<Eigen::Index>(beta.size()));

  const OrientationConvention conv =
      convention_from_json(require(j, "convention"));

  const json& je = require(j, "eta");
  const std::string variant = require(je, "variant").get<std::string>();
  DirectionalDensity eta;
  if (variant == "uniform") {
    eta.kind = DirectionalDensity::Kind::Uniform;
  } else if (variant == "hist2d") {
    eta.kind = DirectionalDensity::Kind::Histogram2D;
    eta.angle = factor_from_json(require(je, "angle"));
  } else if (variant == "histcyl3d") {
    eta.kind = DirectionalDensity::Kind::HistogramCyl3D;
    eta.height = factor_from_json(require(je, "height"));
    eta.angle = factor_from_json(require(je, "angle"));
  } else {
    throw std::invalid_argument("unknown eta variant: " + variant);
  }
  return DensityModel{std::move(trend), std::move(eta), conv};
}

std::variant<NullModelSpec, DependentModelSpec> sim_spec_from_json(
    const json& j, std::uint64_t seed) {
  const std::string model = require(j, "model").get<std::string>();
  const auto sides = require(j, "window").get<std::vector<double>>();
  const Window window(static_cast<int>(sides.size()), sides);

  const auto beta = require(j, "beta").get<std::vector<double>>();
  if (beta.size() != static_cast<std::size_t>(window.dim + 1))
    throw std::invalid_argument("beta must have dim + 1 entries");
  LinearTrend trend;
  trend.beta = Eigen::Map<const Eigen::VectorXd>(
      beta.data(), static_cast<Eigen::Index>(beta.size()));

  const bool oriented = j.value("oriented", false);
  const OrientationConvention conv =
      oriented ? OrientationConvention::make_oriented(window.dim)
               : OrientationConvention::make_unoriented(window.dim);

  if (model == "null") {
    return NullModelSpec{window, trend,
                         require(j, "max_length").get<double>(), conv, seed};
  }
  if (model == "dependent") {
    double sigma;
    if (j.contains("sigma"))
      sigma = j.at("sigma").get<double>();
    else if (j.contains("mean_length"))
      sigma = dependent_sigma_for_mean_length(
          j.at("mean_length").get<double>(), window.dim);
    else
      throw std::invalid_argument(
          "dependent model needs either sigma or mean_length");
    return DependentModelSpec{window, trend,
                              require(j, "corr_scale").get<double>(), sigma,
                              conv, seed};
  }
  throw std::invalid_argument("unknown model: " + model);
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return json::parse(in);
}

void write_samples_csv(const std::filesystem::path& path,
                       const std::vector<SamplePoint>& samples, int dim) {
  auto out = open_out(path);
  out << (dim == 2 ? "fiber_id,x,y,tx,ty,weight"
                   : "fiber_id,x,y,z,tx,ty,tz,weight")
      << '\n';
  for (const SamplePoint& p : samples) {
    out << p.fiber_id;
    for (int i = 0; i < dim; ++i) out << ',' << format_double(p.location[i]);
    for (int i = 0; i < dim; ++i) out << ',' << format_double(p.tangent[i]);
    out << ',' << format_double(p.weight) << '\n';
  }
}

std::vector<SamplePoint> read_samples_csv(const std::filesystem::path& path,
                                          const OrientationConvention& conv) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty sample CSV: " + path.string());
  const int dim = conv.dim();
  const std::size_t expected = 2 + 2 * static_cast<std::size_t>(dim);

  std::vector<SamplePoint> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != expected)
      throw std::runtime_error("sample CSV row has wrong column count");
    Vec3 loc{0, 0, 0}, tan{0, 0, 0};
    for (int i = 0; i < dim; ++i) loc[i] = fields[1 + i];
    for (int i = 0; i < dim; ++i) tan[i] = fields[1 + dim + i];
    const double weight = fields.back();
    if (!(weight > 0.0))
      throw std::runtime_error("sample CSV weight must be positive");
    samples.push_back({loc, Direction(tan, dim),
                       static_cast<int>(fields[0]), weight});
  }
  return samples;
}

void write_k_csv(const std::filesystem::path& path, const KEstimate& est) {
  auto out = open_out(path);
  out << "r1,r2,k_hat,k0,k_rel\n";
  const bool have_rel = est.k_rel.size() == est.k_hat.size();
  for (std::size_t i = 0; i < est.grid.r1.size(); ++i)
    for (std::size_t j = 0; j < est.grid.r2.size(); ++j) {
      const auto ei = static_cast<Eigen::Index>(i);
      const auto ej = static_cast<Eigen::Index>(j);
      out << format_double(est.grid.r1[i]) << ','
          << format_double(est.grid.r2[j]) << ','
          << format_double(est.k_hat(ei, ej)) << ','
          << format_double(est.k0(ei, ej)) << ','
          << format_double(have_rel ? est.k_rel(ei, ej)
                                    : std::nan(""))
          << '\n';
    }
}

std::vector<KRow> read_k_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty K CSV: " + path.string());
  std::vector<KRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_row(line);
    if (f.size() != 5) throw std::runtime_error("K CSV row has 5 columns");
    rows.push_back({f[0], f[1], f[2], f[3], f[4]});
  }
  return rows;
}

void write_envelope_csv(const std::filesystem::path& path,
                        const EnvelopeResult& env) {
  auto out = open_out(path);
  out << "r1,r2,lo,hi,data\n";
  for (std::size_t i = 0; i < env.grid.r1.size(); ++i)
    for (std::size_t j = 0; j < env.grid.r2.size(); ++j) {
      const auto ei = static_cast<Eigen::Index>(i);
      const auto ej = static_cast<Eigen::Index>(j);
      out << format_double(env.grid.r1[i]) << ','
          << format_double(env.grid.r2[j]) << ','
          << format_double(env.lo(ei, ej)) << ','
          << format_double(env.hi(ei, ej)) << ','
          << format_double(env.data(ei, ej)) << '\n';
    }
}

}  // namespace kfiber::io
