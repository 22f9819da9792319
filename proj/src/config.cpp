#include "plastopt/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "plastopt/errors.hpp"

namespace plastopt {

namespace {

using nlohmann::json;

struct Collector {
  std::vector<std::string> vio;

  void add(const std::string& m) { vio.push_back(m); }
};

void check_known(const json& j, const std::string& where,
                 std::initializer_list<const char*> known, Collector& c) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) c.add(where + ": unknown key '" + key + "'");
  }
}

double get_num(const json& j, const std::string& where, const char* key, double def,
               Collector& c) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) {
    c.add(where + "." + key + ": expected a number");
    return def;
  }
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& where, const char* key, int def, Collector& c) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number_integer()) {
    c.add(where + "." + key + ": expected an integer");
    return def;
  }
  return j[key].get<int>();
}

std::string get_str(const json& j, const std::string& where, const char* key,
                    const std::string& def, Collector& c) {
  if (!j.contains(key)) return def;
  if (!j[key].is_string()) {
    c.add(where + "." + key + ": expected a string");
    return def;
  }
  return j[key].get<std::string>();
}

Expr get_expr(const json& j, const std::string& where, Collector& c) {
  if (!j.is_string()) {
    c.add(where + ": expected an expression string");
    return {};
  }
  try {
    return Expr::parse(j.get<std::string>());
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations) c.add(where + ": " + v);
    return {};
  }
}

// A load is a pair of component expressions, e.g. ["0", "-0.35*t"].
void get_load(const json& j, const std::string& where, const char* key, Expr& cx, Expr& cy,
              Collector& c) {
  if (!j.contains(key)) return;
  const json& a = j[key];
  if (!a.is_array() || a.size() != 2) {
    c.add(where + "." + key + ": expected an array of two expression strings");
    return;
  }
  cx = get_expr(a[0], where + "." + key + "[0]", c);
  cy = get_expr(a[1], where + "." + key + "[1]", c);
}

// Coefficient endpoints: [weak, strong], or a single number for the strong
// phase with the default 1e-3 contrast.
void get_endpoints(const json& j, const std::string& where, const char* key, double& weak,
                   double& strong, Collector& c) {
  if (!j.contains(key)) return;
  const json& v = j[key];
  if (v.is_number()) {
    strong = v.get<double>();
    weak = 1e-3 * strong;
    return;
  }
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    weak = v[0].get<double>();
    strong = v[1].get<double>();
    return;
  }
  c.add(where + "." + key + ": expected [weak, strong] or a single strong value");
}

void parse_mesh(const json& j, RunConfig& cfg, Collector& c) {
  if (!j.contains("mesh")) {
    c.add("mesh: required section is missing");
    return;
  }
  const json& m = j["mesh"];
  if (!m.is_object()) {
    c.add("mesh: expected an object");
    return;
  }
  check_known(m, "mesh", {"nx", "ny", "Lx", "Ly", "boundary"}, c);
  cfg.mesh.nx = get_int(m, "mesh", "nx", 0, c);
  cfg.mesh.ny = get_int(m, "mesh", "ny", 0, c);
  cfg.mesh.Lx = get_num(m, "mesh", "Lx", 1.0, c);
  cfg.mesh.Ly = get_num(m, "mesh", "Ly", 1.0, c);
  if (cfg.mesh.nx < 1) c.add("mesh.nx: must be at least 1");
  if (cfg.mesh.ny < 1) c.add("mesh.ny: must be at least 1");
  if (!(cfg.mesh.Lx > 0.0)) c.add("mesh.Lx: must be positive");
  if (!(cfg.mesh.Ly > 0.0)) c.add("mesh.Ly: must be positive");

  if (!m.contains("boundary") || !m["boundary"].is_array() || m["boundary"].empty()) {
    c.add("mesh.boundary: expected a nonempty array of tagging rules");
    return;
  }
  int idx = 0;
  for (const json& r : m["boundary"]) {
    const std::string where = "mesh.boundary[" + std::to_string(idx++) + "]";
    if (!r.is_object()) {
      c.add(where + ": expected an object");
      continue;
    }
    check_known(r, where, {"side", "range", "tag"}, c);
    TagRule rule{Side::left, -1e300, 1e300, FacetTag::free};
    const std::string side = get_str(r, where, "side", "", c);
    if (side == "left") rule.side = Side::left;
    else if (side == "right") rule.side = Side::right;
    else if (side == "bottom") rule.side = Side::bottom;
    else if (side == "top") rule.side = Side::top;
    else c.add(where + ".side: expected left|right|bottom|top, got '" + side + "'");
    const std::string tag = get_str(r, where, "tag", "", c);
    if (tag == "dirichlet") rule.tag = FacetTag::dirichlet;
    else if (tag == "neumann") rule.tag = FacetTag::neumann;
    else if (tag == "free") rule.tag = FacetTag::free;
    else c.add(where + ".tag: expected dirichlet|neumann|free, got '" + tag + "'");
    if (r.contains("range")) {
      const json& g = r["range"];
      if (g.is_array() && g.size() == 2 && g[0].is_number() && g[1].is_number()) {
        rule.lo = g[0].get<double>();
        rule.hi = g[1].get<double>();
      } else {
        c.add(where + ".range: expected [lo, hi]");
      }
    }
    cfg.mesh.boundary.push_back(rule);
  }
}

void parse_material(const json& j, RunConfig& cfg, Collector& c) {
  if (!j.contains("material")) return;  // defaults: unit strong phase, 1e-3 contrast
  const json& m = j["material"];
  if (!m.is_object()) {
    c.add("material: expected an object");
    return;
  }
  check_known(m, "material", {"mu", "lambda", "h", "d", "ell"}, c);
  get_endpoints(m, "material", "mu", cfg.law.mu0, cfg.law.mu1, c);
  get_endpoints(m, "material", "lambda", cfg.law.lambda0, cfg.law.lambda1, c);
  get_endpoints(m, "material", "h", cfg.law.h0, cfg.law.h1, c);
  get_endpoints(m, "material", "d", cfg.law.d0, cfg.law.d1, c);
  get_endpoints(m, "material", "ell", cfg.law.ell0, cfg.law.ell1, c);
  for (const auto& v : cfg.law.validate()) c.add("material: " + v);
}

void parse_grid(const json& j, RunConfig& cfg, Collector& c) {
  if (!j.contains("grid")) return;
  const json& g = j["grid"];
  if (!g.is_object()) {
    c.add("grid: expected an object");
    return;
  }
  check_known(g, "grid", {"k", "T", "times"}, c);
  cfg.k = get_int(g, "grid", "k", cfg.k, c);
  cfg.T = get_num(g, "grid", "T", cfg.T, c);
  if (cfg.k < 1) c.add("grid.k: must be at least 1");
  if (!(cfg.T > 0.0)) c.add("grid.T: must be positive");

  // Explicit node lists are accepted only when they spell out the uniform
  // grid; the solver relies on a constant step.
  if (g.contains("times")) {
    const json& ts = g["times"];
    if (!ts.is_array() || static_cast<int>(ts.size()) != cfg.k + 1) {
      c.add("grid.times: expected k+1 numbers when given");
      return;
    }
    for (int i = 0; i <= cfg.k; ++i) {
      if (!ts[i].is_number()) {
        c.add("grid.times: expected k+1 numbers when given");
        return;
      }
      const double want = cfg.T * i / cfg.k;
      if (std::abs(ts[i].get<double>() - want) > 1e-12 * std::max(1.0, cfg.T))
        c.add("grid.times: the time grid must be uniform (node " + std::to_string(i) +
              " is " + std::to_string(ts[i].get<double>()) + ", uniform grid has " +
              std::to_string(want) + ")");
    }
  }
}

void parse_optimizer(const json& j, RunConfig& cfg, Collector& c) {
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    if (!o.is_object()) {
      c.add("optimizer: expected an object");
      return;
    }
    check_known(o, "optimizer",
                {"max_outer_iters", "armijo_c1", "initial_step", "shrink", "grow",
                 "max_backtrack", "grad_tol", "clamp", "volume_penalty", "volume_target",
                 "gamma_schedule"},
                c);
    OptimizerConfig& oc = cfg.optimizer;
    oc.max_outer_iters = get_int(o, "optimizer", "max_outer_iters", oc.max_outer_iters, c);
    oc.armijo_c1 = get_num(o, "optimizer", "armijo_c1", oc.armijo_c1, c);
    oc.initial_step = get_num(o, "optimizer", "initial_step", oc.initial_step, c);
    oc.shrink = get_num(o, "optimizer", "shrink", oc.shrink, c);
    oc.grow = get_num(o, "optimizer", "grow", oc.grow, c);
    oc.max_backtrack = get_int(o, "optimizer", "max_backtrack", oc.max_backtrack, c);
    oc.grad_tol = get_num(o, "optimizer", "grad_tol", oc.grad_tol, c);
    oc.volume_penalty = get_num(o, "optimizer", "volume_penalty", oc.volume_penalty, c);
    oc.volume_target = get_num(o, "optimizer", "volume_target", oc.volume_target, c);
    if (o.contains("clamp")) {
      if (o["clamp"].is_boolean()) oc.clamp = o["clamp"].get<bool>();
      else c.add("optimizer.clamp: expected a boolean");
    }
    if (o.contains("gamma_schedule")) {
      const json& s = o["gamma_schedule"];
      if (!s.is_array()) {
        c.add("optimizer.gamma_schedule: expected an array of numbers");
      } else {
        double prev = 0.0;
        int i = 0;
        for (const json& v : s) {
          const std::string where = "optimizer.gamma_schedule[" + std::to_string(i++) + "]";
          if (!v.is_number()) {
            c.add(where + ": expected a number");
            continue;
          }
          const double g = v.get<double>();
          if (!(g > 0.0) || !std::isfinite(g)) c.add(where + ": must be positive and finite");
          if (!(g > prev)) c.add(where + ": schedule must be strictly increasing");
          prev = g;
          cfg.gamma_schedule.push_back(g);
        }
      }
    }
  }
  // The interface width lives at the top level; mirror it into the optimizer.
  cfg.optimizer.delta = cfg.delta;
  for (const auto& v : validate(cfg.optimizer)) c.add("optimizer: " + v);
}

void parse_lab(const json& j, RunConfig& cfg, Collector& c) {
  if (!j.contains("lab")) return;
  const json& l = j["lab"];
  if (!l.is_object()) {
    c.add("lab: expected an object");
    return;
  }
  check_known(l, "lab", {"study", "gammas", "ks", "deltas", "sizes", "cells", "length"}, c);
  cfg.lab.study = get_str(l, "lab", "study", "", c);
  static const char* known_studies[] = {"gamma_sweep", "timestep_sweep", "delta_sweep",
                                        "mm_profile", "adjoint_bounds", "lipschitz"};
  if (!cfg.lab.study.empty()) {
    bool ok = false;
    for (const char* s : known_studies) ok = ok || cfg.lab.study == s;
    if (!ok)
      c.add("lab.study: unknown study '" + cfg.lab.study +
            "' (gamma_sweep|timestep_sweep|delta_sweep|mm_profile|adjoint_bounds|lipschitz)");
  }
  const auto get_vec = [&](const char* key, std::vector<double>& out) {
    if (!l.contains(key)) return;
    if (!l[key].is_array() || l[key].empty()) {
      c.add(std::string("lab.") + key + ": expected a nonempty array of numbers");
      return;
    }
    out.clear();
    for (const json& v : l[key]) {
      if (!v.is_number()) {
        c.add(std::string("lab.") + key + ": expected a nonempty array of numbers");
        return;
      }
      out.push_back(v.get<double>());
    }
  };
  get_vec("gammas", cfg.lab.gammas);
  get_vec("deltas", cfg.lab.deltas);
  get_vec("sizes", cfg.lab.sizes);
  if (l.contains("ks")) {
    if (!l["ks"].is_array() || l["ks"].empty()) {
      c.add("lab.ks: expected a nonempty array of integers");
    } else {
      cfg.lab.ks.clear();
      for (const json& v : l["ks"]) {
        if (!v.is_number_integer() || v.get<int>() < 1) {
          c.add("lab.ks: expected a nonempty array of integers >= 1");
          break;
        }
        cfg.lab.ks.push_back(v.get<int>());
      }
    }
  }
  cfg.lab.cells = get_int(l, "lab", "cells", cfg.lab.cells, c);
  cfg.lab.length = get_num(l, "lab", "length", cfg.lab.length, c);
  if (cfg.lab.cells < 2) c.add("lab.cells: must be at least 2");
  if (!(cfg.lab.length > 0.0)) c.add("lab.length: must be positive");
}

}  // namespace

Mesh build_mesh(const MeshConfig& mc) {
  return build_rect_mesh(mc.nx, mc.ny, mc.Lx, mc.Ly, mc.boundary);
}

LoadProgram make_loads(const RunConfig& cfg) {
  LoadProgram loads;
  loads.T = cfg.T;
  const auto wrap = [](const Expr& ex, const Expr& ey) -> SpaceTimeFn {
    return [ex, ey](double t, double x, double y, double out[2]) {
      out[0] = ex.parsed() ? ex(x, y, t) : 0.0;
      out[1] = ey.parsed() ? ey(x, y, t) : 0.0;
    };
  };
  loads.f = wrap(cfg.fx, cfg.fy);
  loads.g = wrap(cfg.gx, cfg.gy);
  loads.w = wrap(cfg.wx, cfg.wy);
  return loads;
}

NodalScalarField initial_phase(const Mesh& mesh, const RunConfig& cfg) {
  NodalScalarField z(mesh, 0.5);
  if (!cfg.z0.parsed()) return z;
  for (int n = 0; n < mesh.n_nodes(); ++n)
    z[n] = cfg.z0(mesh.nodes[n][0], mesh.nodes[n][1], 0.0);
  return z;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({origin + ": " + e.what()});
  }

  Collector c;
  if (!j.is_object()) {
    c.add(origin + ": top level must be an object");
    throw ConfigError(c.vio);
  }
  check_known(j, "config",
              {"mesh", "material", "loads", "grid", "gamma", "delta", "initial_z",
               "optimizer", "lab", "seed", "output"},
              c);

  RunConfig cfg;
  parse_mesh(j, cfg, c);
  parse_material(j, cfg, c);
  parse_grid(j, cfg, c);

  if (j.contains("loads")) {
    const json& l = j["loads"];
    if (!l.is_object()) {
      c.add("loads: expected an object");
    } else {
      check_known(l, "loads", {"f", "g", "w"}, c);
      get_load(l, "loads", "f", cfg.fx, cfg.fy, c);
      get_load(l, "loads", "g", cfg.gx, cfg.gy, c);
      get_load(l, "loads", "w", cfg.wx, cfg.wy, c);
    }
  }

  if (j.contains("gamma")) {
    const json& g = j["gamma"];
    if (g.is_string() && (g.get<std::string>() == "inf" || g.get<std::string>() == "exact")) {
      cfg.gamma = RegularizationParam::exact();
    } else if (g.is_number() && g.get<double>() > 0.0) {
      cfg.gamma = RegularizationParam{g.get<double>()};
    } else {
      c.add("gamma: expected a positive number or \"inf\"");
    }
  }
  cfg.delta = get_num(j, "config", "delta", cfg.delta, c);
  if (!(cfg.delta > 0.0)) c.add("delta: must be positive");
  if (j.contains("initial_z")) cfg.z0 = get_expr(j["initial_z"], "initial_z", c);
  parse_optimizer(j, cfg, c);
  parse_lab(j, cfg, c);
  if (j.contains("seed")) {
    if (j["seed"].is_number_unsigned() || (j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      cfg.seed = j["seed"].get<unsigned long long>();
    else
      c.add("seed: expected a nonnegative integer");
  }
  cfg.output = get_str(j, "config", "output", cfg.output, c);

  // Structure is sound; now check the cross-field physics constraints. Loads
  // must vanish at t = 0 so the zero initial state is consistent.
  if (c.vio.empty()) {
    try {
      const Mesh mesh = build_mesh(cfg.mesh);
      const LoadProgram loads = make_loads(cfg);
      for (const auto& v : validate_loads(loads, mesh)) c.add("loads: " + v);
      const NodalScalarField z = initial_phase(mesh, cfg);
      if (!all_finite(z)) c.add("initial_z: evaluates to a non-finite value on the mesh");
    } catch (const ConfigError& e) {
      for (const auto& v : e.violations) c.add("mesh: " + v);
    }
  }

  if (!c.vio.empty()) throw ConfigError(c.vio);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace plastopt
