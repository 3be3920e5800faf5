#ifndef MEMFLUX_CONFIG_HPP
#define MEMFLUX_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "memflux/discretization.hpp"
#include "memflux/geometry.hpp"
#include "memflux/grid.hpp"
#include "memflux/linear_solver.hpp"

namespace memflux {

inline constexpr const char* kVersion = "memflux 0.1.0";

/// Scenario file: flat JSON sections (geometry, microstructure,
/// physics, numerics, experiment); every field defaults to the CO2
/// through-paperboard reference scenario, so an empty object is a
/// complete configuration.  Physical inputs are cm / s / g/cm^3 and
/// are nondimensionalized exactly once, in resolve().
struct ScenarioConfig {
  // geometry
  PhysicalGeometry geometry;  // ell=1, h=0.4, w=0.25, eta=0.08
  std::optional<MicrostructureSpec> microstructure = MicrostructureSpec{};  // rectangle 0.5x0.75

  // physics
  double d1 = 10.0;  // cm^2/s
  double d2 = 1.0;   // cm^2/s
  std::optional<double> tau;  // s; default ell^2/(4 d1) normalizes D1 to 1
  double b = 2.0;             // logistic drift strength
  std::optional<std::vector<double>> drift_coefficients;  // physical a_n, overrides b
  double u_left = 0.0;
  double u_right = 5.8e-5;  // g/cm^3
  double source = 0.0;      // physical f, constant
  double initial = 0.0;     // physical v, constant
  std::optional<Tensor2> bulk_tensor_override;      // dimensionless D
  std::optional<Tensor2> dstar_override;            // dimensionless effective tensor
  std::optional<Tensor2> membrane_tensor_override;  // dimensionless D^m (thin model)

  // numerics
  int nx = 256;
  int ny = 80;
  int cell_resolution = 128;
  int n_y2 = 64;
  double dt = 0.05;
  double t_end = 400.0;
  double steady_tol = 1e-9;
  std::optional<double> delta;  // dimensionless; default eta/ell
  SolverConfig solver;

  // experiment
  std::vector<double> deltas;      // cell sweep
  std::vector<double> etas;        // cm
  std::vector<double> b_values;    // drift study
  std::vector<double> eps_levels;  // convergence study
  std::string output_dir = "out";
  std::vector<double> snapshot_fractions = {0.1, 0.5, 1.0};

  double resolved_tau() const;
  double resolved_delta() const;  // eta/ell unless set
};

/// Parses a config file; unknown keys and type mismatches raise
/// ConfigError naming the offending key.  Missing keys fall back to
/// the reference scenario.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& json_text, const std::string& origin = "config");

/// Canonical resolved form (all defaults applied, sorted keys).
std::string canonical_config(const ScenarioConfig& cfg);

/// FNV-1a hash of the canonical form, as fixed-width hex.
std::string config_hash(const ScenarioConfig& cfg);

/// Dimensionless quantities derived from the scenario.
struct ResolvedScenario {
  DimensionlessGeometry geom;
  double tau = 0.0;
  Tensor2 bulk;           // diag(4 tau d1/ell^2, 4 tau d2/ell^2) or override
  DriftPolynomial drift;  // g = ell p / (2 d1)
  double u_left = 0.0, u_right = 0.0;
  double source = 0.0;  // F = tau f
  double delta = 0.0;
};

ResolvedScenario resolve(const ScenarioConfig& cfg);

struct RunManifest {
  std::string scenario_hash;
  std::string version;
  std::string created;  // ISO-8601 UTC
  std::string verb;
  std::vector<std::string> outputs;
};

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);
std::optional<RunManifest> read_manifest(const std::filesystem::path& dir);

/// True when a manifest with this hash and verb exists and all its
/// outputs are present (re-running would be a no-op).
bool manifest_up_to_date(const std::filesystem::path& dir, const std::string& hash,
                         const std::string& verb);

}  // namespace memflux

#endif
