#include "fsrg/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace fsrg {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

void check_schema(const json& j, const std::string& where) {
  if (!j.contains("schema_version")) throw ConfigError(where + ": missing schema_version");
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
    throw ConfigError(where + ": unsupported schema_version");
}

Complex read_complex(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(where + ": expected a number or [re, im]");
}

Matrix read_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty matrix");
  const Index rows = static_cast<Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw ConfigError(where + ": rows must be arrays");
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Index>(j[r].size()) != cols)
      throw ConfigError(where + ": ragged matrix");
    for (Index c = 0; c < cols; ++c) m(r, c) = read_complex(j[r][c], where);
  }
  return m;
}

MatrixPolynomial read_polynomial(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a list of coefficients");
  MatrixPolynomial p;
  for (std::size_t k = 0; k < j.size(); ++k)
    p.coeffs.push_back(read_matrix(j[k], where + "[" + std::to_string(k) + "]"));
  return p;
}

FactoredSymmetry read_symmetry(const json& j, const std::string& where) {
  reject_unknown(j, {"name", "atomic", "fock", "antiunitary"}, where);
  FactoredSymmetry f;
  f.name = j.value("name", std::string());
  if (!j.contains("atomic")) throw ConfigError(where + ": missing atomic matrix");
  f.atomic = read_matrix(j["atomic"], where + ".atomic");
  const std::string fock = j.value("fock", std::string("identity"));
  if (fock == "identity")
    f.fock = FockAction::identity;
  else if (fock == "parity")
    f.fock = FockAction::parity;
  else
    throw ConfigError(where + ": fock must be identity or parity");
  f.antiunitary = j.value("antiunitary", false);
  return f;
}

template <typename T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": bad value for '" + key + "'");
  }
}

ModelSpec model_from_json(const json& j, bool require_schema) {
  const std::string where = "model";
  if (require_schema) check_schema(j, where);
  reject_unknown(j,
                 {"schema_version", "name", "atomic_dim", "degeneracy", "atomic_hamiltonian",
                  "profile", "coupling1", "coupling2", "infrared_exponent", "reference_point",
                  "symmetries", "reflection_symmetric", "conjugation", "polarization_factor",
                  "window", "comment"},
                 where);
  ModelSpec m;
  m.name = get<std::string>(j, "name", "", where);
  m.atomic_dim = get<int>(j, "atomic_dim", 1, where);
  m.degeneracy = get<int>(j, "degeneracy", 1, where);
  for (const char* key : {"atomic_hamiltonian", "coupling1"})
    if (!j.contains(key)) throw ConfigError(where + ": missing " + key);
  m.atomic_hamiltonian = read_polynomial(j["atomic_hamiltonian"], "atomic_hamiltonian");
  m.coupling1 = read_polynomial(j["coupling1"], "coupling1");
  m.coupling2 = j.contains("coupling2") ? read_polynomial(j["coupling2"], "coupling2") : m.coupling1;
  if (j.contains("profile")) {
    const json& p = j["profile"];
    reject_unknown(p, {"kind", "exponent", "width"}, "profile");
    const std::string kind = get<std::string>(p, "kind", "power", "profile");
    if (kind == "power")
      m.profile.kind = RadialProfile::Kind::power;
    else if (kind == "power_gauss")
      m.profile.kind = RadialProfile::Kind::power_gauss;
    else if (kind == "zero")
      m.profile.kind = RadialProfile::Kind::zero;
    else
      throw ConfigError("profile: unknown kind '" + kind + "'");
    m.profile.exponent = get<double>(p, "exponent", 1.0, "profile");
    m.profile.width = get<double>(p, "width", 1.0, "profile");
  }
  m.infrared_exponent = get<double>(j, "infrared_exponent", 0.5, where);
  if (j.contains("reference_point")) m.reference_point = read_complex(j["reference_point"], "reference_point");
  if (j.contains("symmetries")) {
    if (!j["symmetries"].is_array()) throw ConfigError("symmetries: expected a list");
    for (std::size_t k = 0; k < j["symmetries"].size(); ++k)
      m.symmetries.push_back(read_symmetry(j["symmetries"][k], "symmetries[" + std::to_string(k) + "]"));
  }
  m.reflection_symmetric = get<bool>(j, "reflection_symmetric", false, where);
  if (j.contains("conjugation")) m.conjugation = read_symmetry(j["conjugation"], "conjugation");
  m.polarization_factor = get<double>(j, "polarization_factor", 1.0, where);
  if (j.contains("window")) {
    const json& w = j["window"];
    reject_unknown(w, {"center", "contour_radius", "s_radius", "z_radius", "gap"}, "window");
    if (w.contains("center")) m.window.center = read_complex(w["center"], "window.center");
    m.window.contour_radius = get<double>(w, "contour_radius", m.window.contour_radius, "window");
    m.window.s_radius = get<double>(w, "s_radius", m.window.s_radius, "window");
    m.window.z_radius = get<double>(w, "z_radius", m.window.z_radius, "window");
    m.window.gap = get<double>(w, "gap", m.window.gap, "window");
  }
  try {
    m.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  // Declared symmetries must be (anti)unitary and leave H_at(s0) invariant;
  // antiunitary ones are checked only at a real reference point.
  const Matrix hat = m.atomic_hamiltonian(m.reference_point);
  auto validate = [&](const FactoredSymmetry& f) {
    SymmetryOp op = [&] {
      try {
        return atomic_part(f);
      } catch (const Error& e) {
        throw ConfigError("symmetry '" + f.name + "': " + e.what());
      }
    }();
    if (f.antiunitary && m.reference_point.imag() != 0) return;
    if (!is_symmetry_of(op, hat, 1e-10).ok)
      throw ConfigError("symmetry '" + f.name + "' does not commute with H_at(s0)");
  };
  for (const auto& f : m.symmetries) validate(f);
  if (m.conjugation) validate(*m.conjugation);
  return m;
}

json parse_text(const std::string& text, const std::string& where) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ConfigError(where + ": empty configuration");
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

ModelSpec parse_model(const std::string& json_text) {
  return model_from_json(parse_text(json_text, "model"), true);
}

ModelSpec load_model(const std::string& path) { return parse_model(read_file(path)); }

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
  const json j = parse_text(json_text, "run config");
  const std::string where = "run config";
  check_schema(j, where);
  reject_unknown(j,
                 {"schema_version", "model", "s", "g", "truncation", "rg", "probe", "sweep",
                  "cluster_rel", "seed", "output", "comment"},
                 where);
  RunConfig c;
  if (!j.contains("model")) throw ConfigError(where + ": missing model");
  if (j["model"].is_string()) {
    std::filesystem::path p = j["model"].get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    c.model_path = p.lexically_normal().string();
    c.model = load_model(c.model_path);
  } else {
    c.model = model_from_json(j["model"], false);
  }
  if (j.contains("s")) c.s = read_complex(j["s"], "s");
  c.g = get<double>(j, "g", c.g, where);
  if (!(c.g >= 0)) throw ConfigError(where + ": g must be non-negative");
  if (j.contains("truncation")) {
    const json& t = j["truncation"];
    reject_unknown(t, {"levels", "max_photons", "energy_cutoff"}, "truncation");
    c.truncation.levels = get<int>(t, "levels", c.truncation.levels, "truncation");
    c.truncation.max_photons = get<int>(t, "max_photons", c.truncation.max_photons, "truncation");
    c.truncation.energy_cutoff = get<double>(t, "energy_cutoff", c.truncation.energy_cutoff, "truncation");
    if (c.truncation.levels < 1 || c.truncation.max_photons < 1 || c.truncation.energy_cutoff < 1)
      throw ConfigError("truncation: need levels >= 1, max_photons >= 1, energy_cutoff >= 1");
  }
  if (j.contains("rg")) {
    const json& r = j["rg"];
    reject_unknown(r,
                   {"rho", "mu", "c_chi", "max_iterations", "tol_z", "stop_tol", "window_fraction",
                    "winding_nodes", "winding_check", "abort_on_polydisc"},
                   "rg");
    RGConfig& g = c.rg;
    g.rho = get<double>(r, "rho", g.rho, "rg");
    g.mu = get<double>(r, "mu", g.mu, "rg");
    g.c_chi = get<double>(r, "c_chi", g.c_chi, "rg");
    g.max_iterations = get<int>(r, "max_iterations", g.max_iterations, "rg");
    g.tol_z = get<double>(r, "tol_z", g.tol_z, "rg");
    g.stop_tol = get<double>(r, "stop_tol", g.stop_tol, "rg");
    g.window_fraction = get<double>(r, "window_fraction", g.window_fraction, "rg");
    g.winding_nodes = get<int>(r, "winding_nodes", g.winding_nodes, "rg");
    g.winding_check = get<bool>(r, "winding_check", g.winding_check, "rg");
    g.abort_on_polydisc = get<bool>(r, "abort_on_polydisc", g.abort_on_polydisc, "rg");
  }
  try {
    c.rg.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("probe")) {
    const json& p = j["probe"];
    reject_unknown(p, {"radius", "nodes", "cr_step", "reflection_points"}, "probe");
    c.probe.radius = get<double>(p, "radius", c.probe.radius, "probe");
    c.probe.nodes = get<int>(p, "nodes", c.probe.nodes, "probe");
    c.probe.cr_step = get<double>(p, "cr_step", c.probe.cr_step, "probe");
    if (p.contains("reflection_points")) {
      if (!p["reflection_points"].is_array()) throw ConfigError("probe: reflection_points must be a list");
      for (const auto& e : p["reflection_points"])
        c.probe.reflection_points.push_back(read_complex(e, "probe.reflection_points"));
    }
    if (!(c.probe.radius > 0) || c.probe.nodes < 4 || !(c.probe.cr_step > 0))
      throw ConfigError("probe: bad contour settings");
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    reject_unknown(s, {"g"}, "sweep");
    c.sweep = get<std::vector<double>>(s, "g", {}, "sweep");
  }
  c.cluster_rel = get<double>(j, "cluster_rel", c.cluster_rel, where);
  c.seed = get<std::uint64_t>(j, "seed", c.seed, where);
  if (j.contains("output")) {
    const json& o = j["output"];
    reject_unknown(o, {"dir", "formats"}, "output");
    c.out_dir = get<std::string>(o, "dir", "", "output");
    c.formats = get<std::vector<std::string>>(o, "formats", c.formats, "output");
    for (const auto& f : c.formats)
      if (f != "kv" && f != "digest") throw ConfigError("output: unknown format '" + f + "'");
  }

  // The run point and every probe node must lie in the declared region.
  try {
    check_region(c.model, c.s);
    for (int k = 0; k < c.probe.nodes; ++k)
      check_region(c.model, c.s + c.probe.radius * std::polar(1.0, 2 * std::numbers::pi * k / c.probe.nodes));
    for (const Complex& p : c.probe.reflection_points) {
      check_region(c.model, p);
      check_region(c.model, std::conj(p));
    }
  } catch (const WindowError& e) {
    throw ConfigError(std::string("region: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_file(path);
  RunConfig c = parse_run_config(text, std::filesystem::path(path).parent_path().string());
  c.source = path;
  return c;
}

}  // namespace fsrg
