// Command-line front end: cell, micro, macro, thin, sweep and converge
// runs driven by a JSON scenario file with CO2/paperboard defaults.
// Exit codes: 0 success, 1 config error, 2 solver failure, 3 I/O failure.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "memflux/errors.hpp"
#include "memflux/experiments.hpp"
#include "memflux/io.hpp"

namespace fs = std::filesystem;
using namespace memflux;

namespace {

/// Sweep lists come either as explicit values ("1e-3 0.01 0.1" or
/// comma separated) or as a range "LO..HI [log|lin] N".
std::vector<double> parse_sweep_tokens(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return {};
  const auto dots = tokens[0].find("..");
  if (dots != std::string::npos) {
    const double lo = std::stod(tokens[0].substr(0, dots));
    const double hi = std::stod(tokens[0].substr(dots + 2));
    std::string scale = "log";
    int count = 10;
    if (tokens.size() >= 2) {
      if (tokens[1] == "log" || tokens[1] == "lin")
        scale = tokens[1];
      else
        count = std::stoi(tokens[1]);
    }
    if (tokens.size() >= 3) count = std::stoi(tokens[2]);
    if (count < 2) throw ConfigError("sweep range needs at least 2 points");
    if (!(lo > 0.0) && scale == "log")
      throw ConfigError("log sweep range needs positive endpoints");
    std::vector<double> out;
    for (int k = 0; k < count; ++k) {
      const double t = static_cast<double>(k) / (count - 1);
      out.push_back(scale == "log" ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo));
    }
    return out;
  }
  std::vector<double> out;
  for (const auto& tok : tokens) {
    std::size_t start = 0;
    while (start < tok.size()) {
      const auto comma = tok.find(',', start);
      const std::string piece =
          tok.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!piece.empty()) out.push_back(std::stod(piece));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

struct Cli {
  std::string config_path;
  std::string output_dir;
  bool force = false;
};

int run_verb(const Cli& cli, const std::string& verb,
             const std::vector<std::string>& delta_tokens,
             const std::vector<std::string>& eta_tokens,
             const std::vector<std::string>& eps_tokens) {
  ScenarioConfig cfg;
  if (!cli.config_path.empty()) cfg = load_config(cli.config_path);
  if (!cli.output_dir.empty()) cfg.output_dir = cli.output_dir;
  if (!delta_tokens.empty()) cfg.deltas = parse_sweep_tokens(delta_tokens);
  if (!eta_tokens.empty()) cfg.etas = parse_sweep_tokens(eta_tokens);
  if (!eps_tokens.empty()) cfg.eps_levels = parse_sweep_tokens(eps_tokens);

  const fs::path dir = cfg.output_dir;
  const std::string hash = config_hash(cfg);
  ensure_directory(dir);
  if (!cli.force && manifest_up_to_date(dir, hash, verb)) {
    std::cout << "output in " << dir.string() << " is up to date (scenario " << hash
              << "); use --force to re-run\n";
    return 0;
  }

  RunManifest manifest;
  manifest.scenario_hash = hash;
  manifest.version = kVersion;
  manifest.verb = verb;

  if (verb == "cell" || verb == "sweep") {
    if (verb == "sweep" && cfg.deltas.empty() && cfg.etas.empty())
      throw ConfigError("sweep: no deltas or etas given (config experiment block or --deltas/--etas)");
    const CellRunOutputs out = run_cell_experiment(cfg, dir, /*with_sweeps=*/true);
    manifest.outputs = out.files;
    const Tensor2& e = out.solution.effective;
    std::cout << "effective tensor: [[" << format_double(e.d11) << ", " << format_double(e.d12)
              << "], [" << format_double(e.d21) << ", " << format_double(e.d22) << "]]\n";
  } else if (verb == "micro") {
    const MicroRunOutputs out = run_micro_experiment(cfg, dir);
    manifest.outputs = out.files;
    std::cout << "steady=" << (out.result.steady ? "yes" : "no")
              << " t=" << format_double(out.result.final_time)
              << " outflux_left=" << format_double(out.result.flux_left.back()) << "\n";
  } else if (verb == "macro") {
    const MacroRunOutputs out = run_macro_experiment(cfg, dir);
    manifest.outputs = out.files;
    std::cout << "steady=" << (out.result.transient.steady ? "yes" : "no")
              << " t=" << format_double(out.result.transient.final_time)
              << " outflux_left=" << format_double(out.result.transient.flux_left.back())
              << "\n";
  } else if (verb == "thin") {
    const ThinRunOutputs out = run_thin_experiment(cfg, dir);
    manifest.outputs = out.files;
    std::cout << "steady=" << (out.result.steady ? "yes" : "no")
              << " t=" << format_double(out.result.final_time) << " jump_mismatch="
              << format_double(out.result.jump_lhs.back() - out.result.jump_rhs.back()) << "\n";
  } else if (verb == "converge") {
    const ConvergenceReport report = run_convergence_study(cfg, dir);
    manifest.outputs = report.files;
    for (const auto& row : report.rows)
      std::cout << "eps=" << format_double(row.eps) << " bulk=" << format_double(row.err_bulk)
                << " membrane=" << format_double(row.err_membrane) << "\n";
  } else {
    throw ConfigError("unknown verb: " + verb);
  }

  write_manifest(dir, manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memflux: multiscale membrane transport simulator"};
  app.require_subcommand(1);

  Cli cli;
  app.add_option("-c,--config", cli.config_path, "scenario JSON file (defaults: CO2 scenario)");
  app.add_option("-o,--output-dir", cli.output_dir, "output directory (overrides config)");
  app.add_flag("-f,--force", cli.force, "re-run even when the manifest is up to date");

  std::vector<std::string> delta_tokens, eta_tokens, eps_tokens;
  auto* cell = app.add_subcommand("cell", "solve the cell problem, optional sweeps");
  cell->add_option("--deltas", delta_tokens, "delta sweep: values or 'LO..HI [log|lin] N'")
      ->expected(-1);
  cell->add_option("--etas", eta_tokens, "eta sweep: values or range")->expected(-1);
  auto* micro = app.add_subcommand("micro", "fully resolved strip run to steady state");
  auto* macro = app.add_subcommand("macro", "finite-thickness upscaled membrane run");
  auto* thin = app.add_subcommand("thin", "infinitely-thin membrane run");
  auto* sweep = app.add_subcommand("sweep", "delta and eta sweeps of the cell problem");
  sweep->add_option("--deltas", delta_tokens, "delta sweep: values or range")->expected(-1);
  sweep->add_option("--etas", eta_tokens, "eta sweep: values or range")->expected(-1);
  auto* converge = app.add_subcommand("converge", "epsilon convergence study");
  converge->add_option("--eps", eps_tokens, "epsilon levels (>= 3)")->expected(-1);

  CLI11_PARSE(app, argc, argv);

  std::string verb;
  if (cell->parsed()) verb = "cell";
  if (micro->parsed()) verb = "micro";
  if (macro->parsed()) verb = "macro";
  if (thin->parsed()) verb = "thin";
  if (sweep->parsed()) verb = "sweep";
  if (converge->parsed()) verb = "converge";

  try {
    return run_verb(cli, verb, delta_tokens, eta_tokens, eps_tokens);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
