#ifndef MEMFLUX_EXPERIMENTS_HPP
#define MEMFLUX_EXPERIMENTS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "memflux/cell_problem.hpp"
#include "memflux/config.hpp"
#include "memflux/macro_membrane.hpp"
#include "memflux/micro_solver.hpp"
#include "memflux/thin_membrane.hpp"

namespace memflux {

// Scenario -> dimensionless problem builders.
CellProblemSpec cell_spec_from(const ScenarioConfig& cfg);
MicroProblem micro_problem_from(const ScenarioConfig& cfg);
MacroProblem macro_problem_from(const ScenarioConfig& cfg, const Tensor2& dstar);
ThinMembraneProblem thin_problem_from(const ScenarioConfig& cfg);

struct CellRunOutputs {
  CellSolution solution;
  std::vector<SweepEntry> delta_sweep, eta_sweep;
  std::vector<std::string> files;
};

/// Cell solve with field dumps, tensor CSVs and heatmaps; optional
/// delta/eta sweeps with tables and log-x line plots.
CellRunOutputs run_cell_experiment(const ScenarioConfig& cfg,
                                   const std::filesystem::path& dir, bool with_sweeps);

struct MicroRunOutputs {
  TransientResult result;
  std::vector<std::string> files;
};
MicroRunOutputs run_micro_experiment(const ScenarioConfig& cfg,
                                     const std::filesystem::path& dir);

struct MacroRunOutputs {
  MacroResult result;
  Tensor2 dstar;
  std::vector<std::string> files;
};
MacroRunOutputs run_macro_experiment(const ScenarioConfig& cfg,
                                     const std::filesystem::path& dir);

struct ThinRunOutputs {
  ThinResult result;
  std::vector<std::string> files;
};
ThinRunOutputs run_thin_experiment(const ScenarioConfig& cfg,
                                   const std::filesystem::path& dir);

struct ConvergenceRow {
  double eps = 0.0;
  double err_bulk = 0.0;
  double err_membrane = 0.0;
};
struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<std::string> files;
};

/// Micro-vs-macro comparison per epsilon level: the micro steady field
/// is compared directly in the bulk and per periodicity cell (pore
/// average) in the membrane.  Needs at least 3 resolvable levels.
ConvergenceReport run_convergence_study(const ScenarioConfig& cfg,
                                        const std::filesystem::path& dir);

/// Steady outflux through the left edge for a macro scenario with the
/// given drift strength (helper for the drift study).
double macro_steady_outflux(const ScenarioConfig& cfg, double b_value);

}  // namespace memflux

#endif
