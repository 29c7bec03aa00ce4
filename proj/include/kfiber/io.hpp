#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "kfiber/density.hpp"
#include "kfiber/fiber.hpp"
#include "kfiber/kstat.hpp"
#include "kfiber/simulate.hpp"

namespace kfiber::io {

using json = nlohmann::json;

// Pattern JSON: {dim, oriented, pole, window, fibers: [{id, kind, payload}]}.
json pattern_to_json(const FiberPattern& pattern);
FiberPattern pattern_from_json(const json& j);

// Density JSON: {beta, eta: {variant, ...}, convention}.
json density_to_json(const DensityModel& model);
DensityModel density_from_json(const json& j);

// Simulation config: {model: "null"|"dependent", window, beta, oriented,
// ...model-specific fields}. The seed comes from the CLI, not the config.
std::variant<NullModelSpec, DependentModelSpec> sim_spec_from_json(
    const json& j, std::uint64_t seed);

void write_json_file(const std::filesystem::path& path, const json& j);
json read_json_file(const std::filesystem::path& path);

// Sample CSV: header fiber_id,x,y[,z],tx,ty[,tz],weight.
void write_samples_csv(const std::filesystem::path& path,
                       const std::vector<SamplePoint>& samples, int dim);
std::vector<SamplePoint> read_samples_csv(const std::filesystem::path& path,
                                          const OrientationConvention& conv);

// K CSV: one row per grid point, columns r1,r2,k_hat,k0,k_rel.
void write_k_csv(const std::filesystem::path& path, const KEstimate& est);

struct KRow {
  double r1, r2, k_hat, k0, k_rel;
};
std::vector<KRow> read_k_csv(const std::filesystem::path& path);

// Envelope CSV: columns r1,r2,lo,hi,data.
void write_envelope_csv(const std::filesystem::path& path,
                        const EnvelopeResult& env);

/// Shortest round-trip decimal form (17 significant digits).
std::string format_double(double v);

}  // namespace kfiber::io
