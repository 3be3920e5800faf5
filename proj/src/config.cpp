#include "memflux/config.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "memflux/errors.hpp"
#include "memflux/io.hpp"

namespace memflux {

using nlohmann::json;

namespace {

[[noreturn]] void bad_key(const std::string& path, const std::string& what) {
  throw ConfigError("config error at '" + path + "': " + what);
}

/// Section reader that tracks consumed keys and rejects unknown ones.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad_key(path_, "expected an object");
  }

  ~Section() = default;

  double number(const char* key, double fallback) {
    mark(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_number()) bad_key(path_ + "." + key, "expected a number");
    return j_[key].get<double>();
  }
  int integer(const char* key, int fallback) {
    mark(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_number_integer()) bad_key(path_ + "." + key, "expected an integer");
    return j_[key].get<int>();
  }
  std::string text(const char* key, const std::string& fallback) {
    mark(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_string()) bad_key(path_ + "." + key, "expected a string");
    return j_[key].get<std::string>();
  }
  std::optional<double> opt_number(const char* key) {
    mark(key);
    if (!j_.contains(key)) return std::nullopt;
    if (!j_[key].is_number()) bad_key(path_ + "." + key, "expected a number");
    return j_[key].get<double>();
  }
  std::optional<std::vector<double>> opt_array(const char* key) {
    mark(key);
    if (!j_.contains(key)) return std::nullopt;
    if (!j_[key].is_array()) bad_key(path_ + "." + key, "expected an array of numbers");
    std::vector<double> v;
    for (const auto& e : j_[key]) {
      if (!e.is_number()) bad_key(path_ + "." + key, "expected an array of numbers");
      v.push_back(e.get<double>());
    }
    return v;
  }
  std::vector<double> array(const char* key, std::vector<double> fallback) {
    auto v = opt_array(key);
    return v ? *v : fallback;
  }
  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) {
    mark(key);
    return j_[key];
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (consumed_.find(it.key()) == consumed_.end())
        bad_key(path_ + "." + it.key(), "unknown key");
  }

private:
  void mark(const char* key) { consumed_.insert(key); }
  const json& j_;
  std::string path_;
  std::set<std::string> consumed_;
};

std::optional<Tensor2> read_tensor(Section& s, const char* key, const std::string& path) {
  if (!s.has(key)) {
    (void)s.opt_number(key);  // mark consumed
    return std::nullopt;
  }
  const json& j = s.raw(key);
  if (!j.is_object()) bad_key(path + "." + key, "expected an object with d11,d12,d21,d22");
  Section t(j, path + "." + key);
  Tensor2 out;
  out.d11 = t.number("d11", 1.0);
  out.d12 = t.number("d12", 0.0);
  out.d21 = t.number("d21", 0.0);
  out.d22 = t.number("d22", 1.0);
  t.finish();
  return out;
}

json tensor_to_json(const Tensor2& t) {
  return json{{"d11", t.d11}, {"d12", t.d12}, {"d21", t.d21}, {"d22", t.d22}};
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

double ScenarioConfig::resolved_tau() const {
  return tau ? *tau : geometry.ell * geometry.ell / (4.0 * d1);
}

double ScenarioConfig::resolved_delta() const {
  return delta ? *delta : geometry.eta / geometry.ell;
}

ScenarioConfig parse_config(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": JSON parse failure: " + e.what());
  }
  if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

  ScenarioConfig cfg;
  Section top(root, origin);

  if (top.has("geometry")) {
    Section s(top.raw("geometry"), origin + ".geometry");
    cfg.geometry.ell = s.number("ell", cfg.geometry.ell);
    cfg.geometry.h = s.number("h", cfg.geometry.h);
    cfg.geometry.w = s.number("w", cfg.geometry.w);
    cfg.geometry.eta = s.number("eta", cfg.geometry.eta);
    s.finish();
  } else {
    (void)top.opt_number("geometry");
  }

  if (top.has("microstructure")) {
    const json& m = top.raw("microstructure");
    if (m.is_null()) {
      cfg.microstructure.reset();
    } else {
      Section s(m, origin + ".microstructure");
      const std::string shape = s.text("shape", "rectangle");
      MicrostructureSpec micro;
      if (shape == "rectangle") {
        micro.shape = MicrostructureSpec::Shape::rectangle;
        micro.width_fraction = s.number("width_fraction", micro.width_fraction);
        micro.height_fraction = s.number("height_fraction", micro.height_fraction);
      } else if (shape == "disk") {
        micro.shape = MicrostructureSpec::Shape::disk;
        micro.diameter_fraction = s.number("diameter_fraction", micro.diameter_fraction);
      } else if (shape == "none") {
        s.finish();
        cfg.microstructure.reset();
      } else {
        bad_key(origin + ".microstructure.shape", "must be rectangle, disk or none");
      }
      if (shape != "none") {
        s.finish();
        cfg.microstructure = micro;
      }
    }
  } else {
    (void)top.opt_number("microstructure");
  }

  if (top.has("physics")) {
    Section s(top.raw("physics"), origin + ".physics");
    cfg.d1 = s.number("d1", cfg.d1);
    cfg.d2 = s.number("d2", cfg.d2);
    cfg.tau = s.opt_number("tau");
    const std::optional<double> b_opt = s.opt_number("b");
    cfg.drift_coefficients = s.opt_array("drift_coefficients");
    if (b_opt && cfg.drift_coefficients)
      bad_key(origin + ".physics", "give either b or drift_coefficients, not both");
    if (b_opt) cfg.b = *b_opt;
    cfg.u_left = s.number("u_left", cfg.u_left);
    cfg.u_right = s.number("u_right", cfg.u_right);
    cfg.source = s.number("source", cfg.source);
    cfg.initial = s.number("initial", cfg.initial);
    cfg.bulk_tensor_override = read_tensor(s, "bulk_tensor", origin + ".physics");
    cfg.dstar_override = read_tensor(s, "dstar", origin + ".physics");
    cfg.membrane_tensor_override = read_tensor(s, "membrane_tensor", origin + ".physics");
    s.finish();
  } else {
    (void)top.opt_number("physics");
  }

  if (top.has("numerics")) {
    Section s(top.raw("numerics"), origin + ".numerics");
    cfg.nx = s.integer("nx", cfg.nx);
    cfg.ny = s.integer("ny", cfg.ny);
    cfg.cell_resolution = s.integer("cell_resolution", cfg.cell_resolution);
    cfg.n_y2 = s.integer("n_y2", cfg.n_y2);
    cfg.dt = s.number("dt", cfg.dt);
    cfg.t_end = s.number("t_end", cfg.t_end);
    cfg.steady_tol = s.number("steady_tol", cfg.steady_tol);
    cfg.delta = s.opt_number("delta");
    cfg.solver.rel_tolerance = s.number("rel_tolerance", cfg.solver.rel_tolerance);
    cfg.solver.abs_tolerance = s.number("abs_tolerance", cfg.solver.abs_tolerance);
    cfg.solver.max_iterations = s.integer("max_iterations", cfg.solver.max_iterations);
    s.finish();
  } else {
    (void)top.opt_number("numerics");
  }

  if (top.has("experiment")) {
    Section s(top.raw("experiment"), origin + ".experiment");
    cfg.deltas = s.array("deltas", cfg.deltas);
    cfg.etas = s.array("etas", cfg.etas);
    cfg.b_values = s.array("b_values", cfg.b_values);
    cfg.eps_levels = s.array("eps_levels", cfg.eps_levels);
    cfg.output_dir = s.text("output_dir", cfg.output_dir);
    cfg.snapshot_fractions = s.array("snapshot_fractions", cfg.snapshot_fractions);
    s.finish();
  } else {
    (void)top.opt_number("experiment");
  }
  top.finish();

  // Cross-field validation with config-level diagnostics.
  try {
    cfg.geometry.validate();
    if (cfg.microstructure) cfg.microstructure->validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!(cfg.d1 > 0.0)) throw ConfigError(origin + ".physics.d1: must be positive");
  if (!(cfg.d2 > 0.0)) throw ConfigError(origin + ".physics.d2: must be positive");
  if (cfg.tau && !(*cfg.tau > 0.0)) throw ConfigError(origin + ".physics.tau: must be positive");
  if (cfg.nx < 2) throw ConfigError(origin + ".numerics.nx: must be at least 2");
  if (cfg.ny < 1) throw ConfigError(origin + ".numerics.ny: must be at least 1");
  if (cfg.cell_resolution < 8)
    throw ConfigError(origin + ".numerics.cell_resolution: must be at least 8");
  if (cfg.n_y2 < 4) throw ConfigError(origin + ".numerics.n_y2: must be at least 4");
  if (!(cfg.dt > 0.0)) throw ConfigError(origin + ".numerics.dt: must be positive");
  if (!(cfg.t_end > 0.0)) throw ConfigError(origin + ".numerics.t_end: must be positive");
  if (!(cfg.steady_tol > 0.0))
    throw ConfigError(origin + ".numerics.steady_tol: must be positive");
  if (cfg.delta && !(*cfg.delta > 0.0))
    throw ConfigError(origin + ".numerics.delta: must be positive");
  if (!(cfg.solver.rel_tolerance > 0.0) || !(cfg.solver.abs_tolerance > 0.0))
    throw ConfigError(origin + ".numerics: solver tolerances must be positive");
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string canonical_config(const ScenarioConfig& cfg) {
  json j;
  j["geometry"] = {{"ell", cfg.geometry.ell},
                   {"h", cfg.geometry.h},
                   {"w", cfg.geometry.w},
                   {"eta", cfg.geometry.eta}};
  if (cfg.microstructure) {
    if (cfg.microstructure->shape == MicrostructureSpec::Shape::rectangle)
      j["microstructure"] = {{"shape", "rectangle"},
                             {"width_fraction", cfg.microstructure->width_fraction},
                             {"height_fraction", cfg.microstructure->height_fraction}};
    else
      j["microstructure"] = {{"shape", "disk"},
                             {"diameter_fraction", cfg.microstructure->diameter_fraction}};
  } else {
    j["microstructure"] = {{"shape", "none"}};
  }
  json phys = {{"d1", cfg.d1},         {"d2", cfg.d2},           {"tau", cfg.resolved_tau()},
               {"u_left", cfg.u_left}, {"u_right", cfg.u_right}, {"source", cfg.source},
               {"initial", cfg.initial}};
  if (cfg.drift_coefficients)
    phys["drift_coefficients"] = *cfg.drift_coefficients;
  else
    phys["b"] = cfg.b;
  if (cfg.bulk_tensor_override) phys["bulk_tensor"] = tensor_to_json(*cfg.bulk_tensor_override);
  if (cfg.dstar_override) phys["dstar"] = tensor_to_json(*cfg.dstar_override);
  if (cfg.membrane_tensor_override)
    phys["membrane_tensor"] = tensor_to_json(*cfg.membrane_tensor_override);
  j["physics"] = phys;
  j["numerics"] = {{"nx", cfg.nx},
                   {"ny", cfg.ny},
                   {"cell_resolution", cfg.cell_resolution},
                   {"n_y2", cfg.n_y2},
                   {"dt", cfg.dt},
                   {"t_end", cfg.t_end},
                   {"steady_tol", cfg.steady_tol},
                   {"delta", cfg.resolved_delta()},
                   {"rel_tolerance", cfg.solver.rel_tolerance},
                   {"abs_tolerance", cfg.solver.abs_tolerance},
                   {"max_iterations", cfg.solver.max_iterations}};
  j["experiment"] = {{"deltas", cfg.deltas},
                     {"etas", cfg.etas},
                     {"b_values", cfg.b_values},
                     {"eps_levels", cfg.eps_levels},
                     {"snapshot_fractions", cfg.snapshot_fractions}};
  return j.dump();  // nlohmann objects iterate in sorted key order
}

std::string config_hash(const ScenarioConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical_config(cfg))));
  return buf;
}

ResolvedScenario resolve(const ScenarioConfig& cfg) {
  ResolvedScenario r;
  r.geom = nondimensionalize(cfg.geometry);
  r.tau = cfg.resolved_tau();
  const double ell = cfg.geometry.ell;
  if (cfg.bulk_tensor_override) {
    r.bulk = *cfg.bulk_tensor_override;
  } else {
    r.bulk = Tensor2::diagonal(4.0 * r.tau * cfg.d1 / (ell * ell),
                               4.0 * r.tau * cfg.d2 / (ell * ell));
  }
  if (cfg.drift_coefficients)
    r.drift = DriftPolynomial::from_physical(*cfg.drift_coefficients, ell, cfg.d1);
  else if (cfg.b != 0.0)
    r.drift = DriftPolynomial::logistic(cfg.b, ell, cfg.d1);
  r.u_left = cfg.u_left;
  r.u_right = cfg.u_right;
  r.source = r.tau * cfg.source;
  r.delta = cfg.resolved_delta();
  return r;
}

namespace {
std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}
}  // namespace

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  json j = {{"scenario_hash", manifest.scenario_hash},
            {"version", manifest.version},
            {"created", manifest.created.empty() ? now_iso8601() : manifest.created},
            {"verb", manifest.verb},
            {"outputs", manifest.outputs}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << j.dump(2) << '\n';
}

std::optional<RunManifest> read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) return std::nullopt;
  json j;
  try {
    in >> j;
  } catch (...) {
    return std::nullopt;
  }
  RunManifest m;
  m.scenario_hash = j.value("scenario_hash", "");
  m.version = j.value("version", "");
  m.created = j.value("created", "");
  m.verb = j.value("verb", "");
  if (j.contains("outputs"))
    for (const auto& o : j["outputs"]) m.outputs.push_back(o.get<std::string>());
  return m;
}

bool manifest_up_to_date(const std::filesystem::path& dir, const std::string& hash,
                         const std::string& verb) {
  const auto m = read_manifest(dir);
  if (!m || m->scenario_hash != hash || m->verb != verb) return false;
  for (const auto& o : m->outputs)
    if (!std::filesystem::exists(dir / o)) return false;
  return true;
}

}  // namespace memflux
