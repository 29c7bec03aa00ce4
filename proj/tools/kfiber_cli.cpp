// Command-line front end: simulate fiber patterns, fit the density model,
// estimate the K-function, and run envelope tests.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "kfiber/io.hpp"
#include "kfiber/kstat.hpp"
#include "kfiber/simulate.hpp"

namespace {

using namespace kfiber;

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  if (out.empty()) throw std::invalid_argument("empty numeric list");
  return out;
}

std::filesystem::path sidecar(const std::filesystem::path& out,
                              const std::string& suffix) {
  std::filesystem::path p = out;
  p += suffix;
  return p;
}

struct SamplingFlags {
  double phi = 0.0;
  double spacing = 0.0;

  void attach(CLI::App* cmd) {
    auto* p = cmd->add_option("--phi", phi,
                              "Poisson sampling intensity (points per unit length)");
    auto* s = cmd->add_option("--spacing", spacing,
                              "equispaced sampling interval");
    p->excludes(s);
  }

  SamplingConfig config(std::uint64_t seed) const {
    if (phi > 0.0) return SamplingConfig::poisson(phi, seed);
    if (spacing > 0.0) return SamplingConfig::equispaced(spacing);
    throw std::invalid_argument("one of --phi or --spacing is required");
  }
};

int cmd_simulate(const std::string& config_path, const std::string& out,
                 std::uint64_t seed) {
  const auto spec =
      io::sim_spec_from_json(io::read_json_file(config_path), seed);
  const SimulatedPattern sim = std::holds_alternative<NullModelSpec>(spec)
                                   ? simulate_null(std::get<NullModelSpec>(spec))
                                   : simulate_dependent(
                                         std::get<DependentModelSpec>(spec));
  io::write_json_file(out, io::pattern_to_json(sim.pattern));
  io::write_json_file(sidecar(out, ".density.json"),
                      io::density_to_json(sim.true_model));
  std::cout << "wrote " << sim.pattern.fibers.size() << " fibers to " << out
            << "\n";
  return 0;
}

int cmd_fit(const std::string& pattern_path, const SamplingFlags& sampling,
            const std::string& eta_kind, int eta_bins, const std::string& out,
            std::uint64_t seed) {
  const FiberPattern pattern =
      io::pattern_from_json(io::read_json_file(pattern_path));
  if (pattern.fibers.empty())
    throw std::runtime_error("pattern has no fibers");

  const auto samples = discretize_all(pattern.fibers,
                                      sampling.config(seed), pattern.conv);
  const LinearTrend trend = estimate_beta(samples, pattern.window);

  DirectionalDensity eta = DirectionalDensity::uniform();
  if (eta_kind == "hist") {
    std::vector<Direction> tangents;
    for (const SamplePoint& p : samples)
      if (pattern.window.contains(p.location)) tangents.push_back(p.tangent);
    eta = fit_eta_histogram(tangents, pattern.conv, eta_bins, eta_bins);
  } else if (eta_kind != "uniform") {
    throw std::invalid_argument("--eta must be 'uniform' or 'hist'");
  }

  const DensityModel model{trend, eta, pattern.conv};
  io::json j = io::density_to_json(model);

  std::size_t in_window = 0;
  for (const SamplePoint& p : samples)
    if (pattern.window.contains(p.location)) ++in_window;
  double max_slope = 0.0;
  for (Eigen::Index i = 1; i < trend.beta.size(); ++i)
    max_slope = std::max(max_slope, std::abs(trend.beta[i]));
  j["diagnostics"] = {{"sample_count", samples.size()},
                      {"samples_in_window", in_window},
                      {"fiber_count", pattern.fibers.size()},
                      {"trend_slope_to_intercept",
                       trend.beta[0] != 0.0 ? max_slope / std::abs(trend.beta[0])
                                            : 0.0}};
  io::write_json_file(out, j);
  return 0;
}

int cmd_kfun(const std::string& pattern_path, const std::string& density_path,
             double r1_max, int r1_steps, const std::string& r2_list,
             const SamplingFlags& sampling, const std::string& policy_name,
             const std::string& out, std::uint64_t seed) {
  const FiberPattern pattern =
      io::pattern_from_json(io::read_json_file(pattern_path));
  const DensityModel model =
      io::density_from_json(io::read_json_file(density_path));

  const KGrid grid =
      KGrid::linspace_r1(r1_max, r1_steps, parse_double_list(r2_list));
  NonpositivePolicy policy;
  if (policy_name == "exclude")
    policy = NonpositivePolicy::Exclude;
  else if (policy_name == "fail")
    policy = NonpositivePolicy::Fail;
  else
    throw std::invalid_argument("--policy must be 'exclude' or 'fail'");

  const auto samples = discretize_all(pattern.fibers,
                                      sampling.config(seed), pattern.conv);
  const KEstimate est =
      estimate_k(samples, model, pattern.window, grid, policy);
  io::write_k_csv(out, est);
  io::write_json_file(
      sidecar(out, ".diag.json"),
      {{"pairs_used", est.pairs_used},
       {"samples_in_window", est.samples_in_window},
       {"samples_nonpositive_density", est.samples_nonpositive_density}});
  return 0;
}

int cmd_envelope(const std::string& pattern_path, int n_sim, double r1_max,
                 int r1_steps, const std::string& r2_list,
                 const SamplingFlags& sampling, const std::string& eta_kind,
                 const std::string& out, std::uint64_t seed) {
  const FiberPattern pattern =
      io::pattern_from_json(io::read_json_file(pattern_path));
  if (pattern.fibers.empty())
    throw std::runtime_error("pattern has no fibers");

  FitProcedure proc{sampling.config(0), eta_kind == "hist"};
  if (eta_kind != "hist" && eta_kind != "uniform")
    throw std::invalid_argument("--eta must be 'uniform' or 'hist'");
  const KGrid grid =
      KGrid::linspace_r1(r1_max, r1_steps, parse_double_list(r2_list));

  const EnvelopeResult env = envelope(pattern, proc, grid, n_sim, seed);
  io::write_envelope_csv(out, env);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inhomogeneous direction-aware K-function for fiber patterns"};
  app.require_subcommand(1);

  std::string config_path, pattern_path, density_path, out;
  std::string eta_kind = "uniform", policy = "exclude", r2_list = "1.5707963267948966";
  std::uint64_t seed = 0;
  double r1_max = 1.0;
  int r1_steps = 20, n_sim = 39, eta_bins = 10;
  SamplingFlags sampling;

  auto* sim = app.add_subcommand("simulate", "simulate a fiber pattern");
  sim->add_option("config", config_path, "model config JSON")->required();
  sim->add_option("--out", out)->required();
  sim->add_option("--seed", seed)->required();

  auto* fit = app.add_subcommand("fit", "fit the first-moment density model");
  fit->add_option("--pattern", pattern_path)->required();
  fit->add_option("--eta", eta_kind, "uniform | hist");
  fit->add_option("--eta-bins", eta_bins);
  fit->add_option("--out", out)->required();
  fit->add_option("--seed", seed, "required with --phi");
  sampling.attach(fit);

  auto* kfun = app.add_subcommand("kfun", "estimate the K-function");
  kfun->add_option("--pattern", pattern_path)->required();
  kfun->add_option("--density", density_path)->required();
  kfun->add_option("--r1-max", r1_max)->required();
  kfun->add_option("--r1-steps", r1_steps);
  kfun->add_option("--r2-list", r2_list, "comma-separated radians");
  kfun->add_option("--policy", policy, "exclude | fail");
  kfun->add_option("--out", out)->required();
  kfun->add_option("--seed", seed, "required with --phi");
  sampling.attach(kfun);

  auto* env = app.add_subcommand("envelope", "null-model envelope test");
  env->add_option("--pattern", pattern_path)->required();
  env->add_option("--nsim", n_sim);
  env->add_option("--r1-max", r1_max)->required();
  env->add_option("--r1-steps", r1_steps);
  env->add_option("--r2-list", r2_list, "comma-separated radians");
  env->add_option("--eta", eta_kind, "uniform | hist");
  env->add_option("--out", out)->required();
  env->add_option("--seed", seed)->required();
  sampling.attach(env);

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(config_path, out, seed);
    if (fit->parsed())
      return cmd_fit(pattern_path, sampling, eta_kind, eta_bins, out, seed);
    if (kfun->parsed())
      return cmd_kfun(pattern_path, density_path, r1_max, r1_steps, r2_list,
                      sampling, policy, out, seed);
    if (env->parsed())
      return cmd_envelope(pattern_path, n_sim, r1_max, r1_steps, r2_list,
                          sampling, eta_kind, out, seed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
