#include "memflux/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "memflux/errors.hpp"
#include "memflux/io.hpp"
#include "memflux/plot.hpp"

namespace memflux {

namespace fs = std::filesystem;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<double> snapshot_times_of(const ScenarioConfig& cfg) {
  std::vector<double> t;
  for (double f : cfg.snapshot_fractions) t.push_back(f * cfg.t_end);
  std::sort(t.begin(), t.end());
  return t;
}

void write_sweep(const fs::path& dir, const std::string& stem, const std::string& xname,
                 const std::vector<SweepEntry>& entries, std::vector<std::string>& files) {
  std::vector<std::vector<double>> rows;
  PlotSeries series;
  series.name = "D22_star";
  for (const auto& e : entries) {
    if (e.ok) {
      rows.push_back({e.value, e.effective.d11, e.effective.d12, e.effective.d21,
                      e.effective.d22, e.residual_w1, e.residual_w2});
      series.x.push_back(e.value);
      series.y.push_back(e.effective.d22);
    } else {
      rows.push_back({e.value, kNan, kNan, kNan, kNan, kNan, kNan});
      std::cerr << "sweep point " << xname << "=" << e.value << " failed: " << e.error << "\n";
    }
  }
  write_csv(dir / (stem + ".csv"),
            {"delta_or_eta", "D11_star", "D12_star", "D21_star", "D22_star", "residual_w1",
             "residual_w2"},
            rows);
  files.push_back(stem + ".csv");
  if (!series.x.empty()) {
    emit_line_plot(dir / (stem + ".svg"), "Effective D22 vs " + xname, xname, "D22_star",
                   {series}, /*log_x=*/true);
    files.push_back(stem + ".svg");
  }
}

void dump_snapshots(const fs::path& dir, const TransientResult& result, const CellMask& mask,
                    std::vector<std::string>& files) {
  for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
    const auto& [t, field] = result.snapshots[k];
    const std::string stem = "snapshot_" + std::to_string(k);
    write_field(dir / (stem + ".field"), field);
    emit_heatmap(dir / (stem + ".svg"), "U at T = " + format_double(t), field, mask);
    files.push_back(stem + ".field");
    files.push_back(stem + ".svg");
  }
  write_field(dir / "u_final.field", result.final_field);
  emit_heatmap(dir / "u_final.svg", "U at T = " + format_double(result.final_time),
               result.final_field, mask);
  files.push_back("u_final.field");
  files.push_back("u_final.svg");
}

void write_diagnostics(const fs::path& dir, const TransientResult& r,
                       std::vector<std::string>& files) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < r.times.size(); ++k)
    rows.push_back({r.times[k], r.mass[k], r.flux_left[k], r.flux_right[k]});
  write_csv(dir / "diagnostics.csv", {"time", "mass", "flux_left", "flux_right"}, rows);
  files.push_back("diagnostics.csv");
}

}  // namespace

CellProblemSpec cell_spec_from(const ScenarioConfig& cfg) {
  const ResolvedScenario r = resolve(cfg);
  CellProblemSpec spec;
  spec.grid = make_grid(cfg.cell_resolution, cfg.cell_resolution, 0.0, 1.0, 0.0, 1.0);
  spec.tensor = TensorField(spec.grid, r.bulk);
  spec.mask = unit_cell_obstacle_mask(spec.grid, cfg.microstructure);
  spec.delta = r.delta;
  spec.solver = cfg.solver;
  return spec;
}

MicroProblem micro_problem_from(const ScenarioConfig& cfg) {
  const ResolvedScenario r = resolve(cfg);
  MicroProblem p;
  p.grid = strip_grid(r.geom, cfg.nx, cfg.ny);
  p.mask = rasterize_obstacles(r.geom, cfg.microstructure, p.grid);
  p.tensor = TensorField(p.grid, r.bulk);
  p.drift = r.drift;
  p.source = ScalarField(p.grid, r.source);
  p.bcs = BoundaryConditions::dirichlet_lr(r.u_left, r.u_right);
  p.initial = ScalarField(p.grid, cfg.initial);
  p.t_end = cfg.t_end;
  p.dt = cfg.dt;
  p.solver = cfg.solver;
  p.snapshot_times = snapshot_times_of(cfg);
  return p;
}

MacroProblem macro_problem_from(const ScenarioConfig& cfg, const Tensor2& dstar) {
  const ResolvedScenario r = resolve(cfg);
  MacroProblem p;
  p.geom = r.geom;
  p.grid = strip_grid(r.geom, cfg.nx, cfg.ny);
  p.bulk = r.bulk;
  p.membrane_star = cfg.dstar_override ? *cfg.dstar_override : dstar;
  p.drift = r.drift;
  p.source_bar = ScalarField(p.grid, r.source);
  p.u_left = r.u_left;
  p.u_right = r.u_right;
  p.initial = ScalarField(p.grid, cfg.initial);
  p.t_end = cfg.t_end;
  p.dt = cfg.dt;
  p.solver = cfg.solver;
  p.snapshot_times = snapshot_times_of(cfg);
  return p;
}

ThinMembraneProblem thin_problem_from(const ScenarioConfig& cfg) {
  const ResolvedScenario r = resolve(cfg);
  ThinMembraneProblem p;
  p.nx_half = std::max(2, cfg.nx / 2);
  p.ny = cfg.ny;
  p.height = r.geom.domain_y1;
  p.d_left = r.bulk;
  p.d_right = r.bulk;
  p.d_membrane = cfg.membrane_tensor_override ? *cfg.membrane_tensor_override : r.bulk;
  p.drift = r.drift;
  p.u_left = r.u_left;
  p.u_right = r.u_right;
  p.n_y2 = cfg.n_y2;
  p.v_left = cfg.initial;
  p.v_right = cfg.initial;
  p.v_membrane = cfg.initial;
  if (r.source != 0.0) p.f_membrane.assign(static_cast<std::size_t>(cfg.n_y2), r.source);
  p.f_left = r.source;
  p.f_right = r.source;
  p.t_end = cfg.t_end;
  p.dt = cfg.dt;
  p.steady_tol = cfg.steady_tol;
  p.solver = cfg.solver;
  return p;
}

CellRunOutputs run_cell_experiment(const ScenarioConfig& cfg, const fs::path& dir,
                                   bool with_sweeps) {
  ensure_directory(dir);
  CellRunOutputs out;
  const CellProblemSpec spec = cell_spec_from(cfg);
  out.solution = solve_cell_functions(spec);

  const Tensor2& e = out.solution.effective;
  const Tensor2& t = out.solution.tortuosity;
  write_csv(dir / "dstar.csv",
            {"delta", "D11_star", "D12_star", "D21_star", "D22_star", "residual_w1",
             "residual_w2"},
            {{spec.delta, e.d11, e.d12, e.d21, e.d22, out.solution.residual_w1,
              out.solution.residual_w2}});
  write_csv(dir / "tortuosity.csv", {"T11", "T12", "T21", "T22"},
            {{t.d11, t.d12, t.d21, t.d22}});
  write_field(dir / "w1.field", out.solution.w1);
  write_field(dir / "w2.field", out.solution.w2);
  emit_heatmap(dir / "w1.svg", "Cell function w1", out.solution.w1, spec.mask);
  emit_heatmap(dir / "w2.svg", "Cell function w2", out.solution.w2, spec.mask);
  out.files = {"dstar.csv", "tortuosity.csv", "w1.field", "w2.field", "w1.svg", "w2.svg"};

  if (with_sweeps && !cfg.deltas.empty()) {
    out.delta_sweep = sweep_delta(spec, cfg.deltas);
    write_sweep(dir, "delta_sweep", "delta", out.delta_sweep, out.files);
  }
  if (with_sweeps && !cfg.etas.empty()) {
    std::vector<double> etas_dimensionless;
    for (double eta : cfg.etas) etas_dimensionless.push_back(eta / cfg.geometry.ell);
    out.eta_sweep = sweep_eta(spec, etas_dimensionless);
    for (std::size_t k = 0; k < out.eta_sweep.size(); ++k)
      out.eta_sweep[k].value = cfg.etas[k];  // report physical eta
    write_sweep(dir, "eta_sweep", "eta", out.eta_sweep, out.files);
  }
  return out;
}

MicroRunOutputs run_micro_experiment(const ScenarioConfig& cfg, const fs::path& dir) {
  ensure_directory(dir);
  MicroRunOutputs out;
  const MicroProblem p = micro_problem_from(cfg);
  out.result = run_to_steady_state(p, cfg.steady_tol);
  if (!out.result.steady)
    std::cerr << "micro: horizon exhausted before steadiness (t_end = " << cfg.t_end << ")\n";
  write_diagnostics(dir, out.result, out.files);
  dump_snapshots(dir, out.result, p.mask, out.files);
  return out;
}

MacroRunOutputs run_macro_experiment(const ScenarioConfig& cfg, const fs::path& dir) {
  ensure_directory(dir);
  MacroRunOutputs out;
  if (cfg.dstar_override) {
    out.dstar = *cfg.dstar_override;
  } else {
    const CellProblemSpec spec = cell_spec_from(cfg);
    out.dstar = solve_cell_functions(spec).effective;
  }
  const MacroProblem p = macro_problem_from(cfg, out.dstar);
  const MacroResult r = run_macro(p, cfg.steady_tol);
  out.result = r;
  if (!r.transient.steady)
    std::cerr << "macro: horizon exhausted before steadiness (t_end = " << cfg.t_end << ")\n";

  write_csv(dir / "dstar_used.csv", {"D11_star", "D12_star", "D21_star", "D22_star"},
            {{out.dstar.d11, out.dstar.d12, out.dstar.d21, out.dstar.d22}});
  out.files.push_back("dstar_used.csv");
  write_diagnostics(dir, r.transient, out.files);
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < r.transient.times.size(); ++k)
      rows.push_back({r.transient.times[k], r.iface_flux_left[k], r.iface_flux_right[k]});
    write_csv(dir / "interface_flux.csv",
              {"time", "flux_left_interface", "flux_right_interface"}, rows);
    out.files.push_back("interface_flux.csv");
  }
  dump_snapshots(dir, r.transient, CellMask::none(), out.files);
  return out;
}

ThinRunOutputs run_thin_experiment(const ScenarioConfig& cfg, const fs::path& dir) {
  ensure_directory(dir);
  ThinRunOutputs out;
  const ThinMembraneProblem p = thin_problem_from(cfg);
  out.result = run_thin(p);
  const ThinResult& r = out.result;

  {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < r.times.size(); ++k) rows.push_back({r.times[k], r.mass[k]});
    write_csv(dir / "diagnostics.csv", {"time", "mass"}, rows);
    out.files.push_back("diagnostics.csv");
  }
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < r.times.size(); ++k)
      rows.push_back({r.times[k], r.jump_lhs[k], r.jump_rhs[k], r.jump_lhs[k] - r.jump_rhs[k]});
    write_csv(dir / "jump_balance.csv", {"time", "lhs", "rhs", "mismatch"}, rows);
    out.files.push_back("jump_balance.csv");
  }
  {
    std::vector<std::vector<double>> rows;
    const MembraneState& m = r.membrane;
    const double hy = p.height / p.ny;
    for (int j = 0; j < m.ny; ++j)
      for (int k = 0; k < m.n_y2; ++k)
        rows.push_back({(j + 0.5) * hy, m.y2(k), m.at(j, k), r.final_time});
    write_csv(dir / "membrane_state.csv", {"z2", "y2", "value", "time"}, rows);
    out.files.push_back("membrane_state.csv");
  }
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < r.fixed_point_history.size(); ++k) {
      const auto& hist = r.fixed_point_history[k];
      rows.push_back({r.times[k], static_cast<double>(hist.size()),
                      hist.empty() ? 0.0 : hist.back()});
    }
    write_csv(dir / "fixed_point.csv", {"time", "iterations", "final_residual"}, rows);
    out.files.push_back("fixed_point.csv");
  }
  {
    std::vector<std::vector<double>> rows;
    const double hy = p.height / p.ny;
    for (int j = 0; j < p.ny; ++j)
      rows.push_back({(j + 0.5) * hy, r.dz1_flux_diagnostic[j]});
    write_csv(dir / "dz1_flux_diagnostic.csv", {"z2", "d11m_dz1_estimate"}, rows);
    out.files.push_back("dz1_flux_diagnostic.csv");
  }
  write_field(dir / "u_left_final.field", r.u_left);
  write_field(dir / "u_right_final.field", r.u_right);
  emit_heatmap(dir / "u_left_final.svg", "U left bulk", r.u_left);
  emit_heatmap(dir / "u_right_final.svg", "U right bulk", r.u_right);
  out.files.insert(out.files.end(), {"u_left_final.field", "u_right_final.field",
                                     "u_left_final.svg", "u_right_final.svg"});
  return out;
}

double macro_steady_outflux(const ScenarioConfig& cfg, double b_value) {
  ScenarioConfig c = cfg;
  c.b = b_value;
  c.drift_coefficients.reset();
  Tensor2 dstar;
  if (c.dstar_override) {
    dstar = *c.dstar_override;
  } else {
    dstar = solve_cell_functions(cell_spec_from(c)).effective;
  }
  const MacroProblem p = macro_problem_from(c, dstar);
  const MacroResult r = run_macro(p, c.steady_tol);
  if (r.transient.flux_left.empty()) throw SolverError("macro run produced no steps");
  return r.transient.flux_left.back();
}

ConvergenceReport run_convergence_study(const ScenarioConfig& cfg, const fs::path& dir) {
  if (cfg.eps_levels.size() < 3)
    throw ConfigError("experiment.eps_levels: convergence study needs at least 3 levels");
  ensure_directory(dir);
  ConvergenceReport report;

  for (double eps : cfg.eps_levels) {
    if (!(eps > 0.0)) throw ConfigError("experiment.eps_levels: levels must be positive");
    ScenarioConfig level = cfg;
    level.geometry.eta = 0.5 * eps * cfg.geometry.ell;
    const double height = 2.0 * cfg.geometry.h / cfg.geometry.ell;
    // Resolve every periodicity cell with ~16 rows (8 is the floor).
    const int ny_needed = static_cast<int>(std::ceil(16.0 * height / eps));
    level.ny = std::max(cfg.ny, ny_needed);
    try {
      level.geometry.validate();
      (void)rasterize_obstacles(nondimensionalize(level.geometry), level.microstructure,
                                strip_grid(nondimensionalize(level.geometry), level.nx,
                                           level.ny));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("convergence level eps=" + format_double(eps) +
                        " not resolvable: " + e.what());
    }

    const MicroProblem micro = micro_problem_from(level);
    const TransientResult micro_res = run_to_steady_state(micro, level.steady_tol);

    const CellProblemSpec spec = cell_spec_from(level);
    const Tensor2 dstar = solve_cell_functions(spec).effective;
    const MacroProblem macro = macro_problem_from(level, dstar);
    const MacroResult macro_res = run_macro(macro, level.steady_tol);

    const ScalarField& um = micro_res.final_field;
    const ScalarField& uM = macro_res.transient.final_field;
    const DimensionlessGeometry geom = nondimensionalize(level.geometry);
    const StructuredGrid& g = micro.grid;

    double bulk2 = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double x = g.xc(i);
        if (x > -geom.membrane_half && x < geom.membrane_half) continue;
        const double d = um(i, j) - uM(i, j);
        bulk2 += d * d * g.cell_area();
      }

    double mem2 = 0.0;
    for (const Rect& cell : geom.cells) {
      double sm = 0.0, sM = 0.0;
      long nm = 0, nM = 0;
      for (int j = 0; j < g.ny; ++j) {
        const double y = g.yc(j);
        if (y <= cell.y0 || y >= cell.y1) continue;
        for (int i = 0; i < g.nx; ++i) {
          const double x = g.xc(i);
          if (x <= cell.x0 || x >= cell.x1) continue;
          if (!micro.mask.is_masked(i, j)) {
            sm += um(i, j);
            ++nm;
          }
          sM += uM(i, j);
          ++nM;
        }
      }
      if (nm == 0 || nM == 0) continue;
      const double d = sm / nm - sM / nM;
      mem2 += d * d * cell.area();
    }
    report.rows.push_back({eps, std::sqrt(bulk2), std::sqrt(mem2)});
  }

  std::vector<std::vector<double>> rows;
  PlotSeries sb{"bulk L2", {}, {}}, sm{"membrane L2", {}, {}};
  for (const auto& r : report.rows) {
    rows.push_back({r.eps, r.err_bulk, r.err_membrane});
    sb.x.push_back(r.eps);
    sb.y.push_back(r.err_bulk);
    sm.x.push_back(r.eps);
    sm.y.push_back(r.err_membrane);
  }
  write_csv(dir / "convergence.csv", {"epsilon", "err_bulk_l2", "err_membrane_l2"}, rows);
  emit_line_plot(dir / "convergence.svg", "Micro vs macro discrepancy", "epsilon", "L2 error",
                 {sb, sm}, /*log_x=*/true);
  report.files = {"convergence.csv", "convergence.svg"};
  return report;
}

}  // namespace memflux
