#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "plastopt/config.hpp"
#include "plastopt/errors.hpp"

using namespace plastopt;

namespace {

const char* kMinimal = R"({
  "mesh": {"nx": 4, "ny": 2, "Lx": 2.0, "Ly": 1.0,
           "boundary": [{"side": "left", "tag": "dirichlet"},
                        {"side": "right", "tag": "neumann"}]},
  "loads": {"g": ["0", "-0.3*t"]}
})";

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config_text(text, "<test>");
  } catch (const ConfigError& e) {
    return e.violations;
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& m : v)
    if (m.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const RunConfig cfg = parse_config_text(kMinimal, "<test>");
  CHECK(cfg.k == 4);
  CHECK(cfg.T == 1.0);
  CHECK(cfg.gamma.finite());
  CHECK(cfg.gamma.gamma == 100.0);
  CHECK(cfg.delta == 0.1);
  CHECK(cfg.optimizer.delta == 0.1);
  CHECK(cfg.law.mu1 == 1.0);
  CHECK(cfg.law.mu0 == 1e-3);  // default ersatz contrast
  CHECK(cfg.gamma_schedule.empty());
  CHECK(cfg.output == "out");
  CHECK(cfg.seed == 0);

  const Mesh mesh = build_mesh(cfg.mesh);
  CHECK(mesh.n_cells() == 8);
  const NodalScalarField z = initial_phase(mesh, cfg);
  for (int n = 0; n < mesh.n_nodes(); ++n) CHECK(z[n] == 0.5);  // default phase

  const LoadProgram loads = make_loads(cfg);
  double v[2];
  loads.g(0.5, 2.0, 0.5, v);
  CHECK(v[1] == -0.15);
  loads.f(0.5, 1.0, 0.5, v);
  CHECK(v[0] == 0.0);  // unset loads default to zero
}

TEST_CASE("single-number material endpoint applies the 1e-3 contrast") {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "material": {"mu": 2.0, "d": [0.01, 0.5]})");
  const RunConfig cfg = parse_config_text(text, "<test>");
  CHECK(cfg.law.mu1 == 2.0);
  CHECK(cfg.law.mu0 == 2e-3);
  CHECK(cfg.law.d0 == 0.01);
  CHECK(cfg.law.d1 == 0.5);
}

TEST_CASE("loads that do not vanish at t = 0 are rejected") {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "grid": {"k": 2, "T": 1.0})");
  text.replace(text.find("-0.3*t"), 6, "1 + t");
  const auto vio = violations_of(text);
  REQUIRE(!vio.empty());
  CHECK(mentions(vio, "vanish at t = 0"));
}

TEST_CASE("negative yield endpoint is rejected") {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "material": {"d": [-0.3, 0.3]})");
  const auto vio = violations_of(text);
  CHECK(mentions(vio, "d0"));
  CHECK(mentions(vio, "> 0"));
}

TEST_CASE("every violation is reported, not just the first") {
  const std::string text = R"({
    "mesh": {"nx": 0, "ny": 2, "Lx": -1.0, "Ly": 1.0,
             "boundary": [{"side": "nowhere", "tag": "dirichlet"}]},
    "loads": {"g": ["0", "-0.3*t"]},
    "grid": {"k": 0},
    "delta": -0.5,
    "gamma": -3
  })";
  const auto vio = violations_of(text);
  CHECK(vio.size() >= 5);
  CHECK(mentions(vio, "mesh.nx"));
  CHECK(mentions(vio, "mesh.Lx"));
  CHECK(mentions(vio, "side"));
  CHECK(mentions(vio, "grid.k"));
  CHECK(mentions(vio, "delta"));
  CHECK(mentions(vio, "gamma"));
}

TEST_CASE("nonuniform explicit time grids are rejected") {
  std::string text = kMinimal;
  text.insert(text.rfind('}'),
              R"(, "grid": {"k": 2, "T": 1.0, "times": [0.0, 0.3, 1.0]})");
  const auto vio = violations_of(text);
  CHECK(mentions(vio, "uniform"));

  std::string ok = kMinimal;
  ok.insert(ok.rfind('}'), R"(, "grid": {"k": 2, "T": 1.0, "times": [0.0, 0.5, 1.0]})");
  CHECK_NOTHROW(parse_config_text(ok, "<test>"));
}

TEST_CASE("unknown keys are caught everywhere") {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "optimzer": {"grad_tol": 1e-5})");
  const auto vio = violations_of(text);
  CHECK(mentions(vio, "unknown key 'optimzer'"));
}

TEST_CASE("expression errors are attributed to their field") {
  std::string text = kMinimal;
  text.replace(text.find("-0.3*t"), 6, "0.3*");
  const auto vio = violations_of(text);
  CHECK(mentions(vio, "loads.g[1]"));
  CHECK(mentions(vio, "column"));
}

TEST_CASE("gamma accepts inf and rejects junk") {
  std::string inf = kMinimal;
  inf.insert(inf.rfind('}'), R"(, "gamma": "inf")");
  CHECK(!parse_config_text(inf, "<test>").gamma.finite());

  std::string junk = kMinimal;
  junk.insert(junk.rfind('}'), R"(, "gamma": "soon")");
  CHECK(mentions(violations_of(junk), "gamma"));
}

TEST_CASE("schedule must be positive and strictly increasing") {
  std::string text = kMinimal;
  text.insert(text.rfind('}'),
              R"(, "optimizer": {"gamma_schedule": [10.0, 10.0, -3.0]})");
  const auto vio = violations_of(text);
  CHECK(mentions(vio, "gamma_schedule[1]"));
  CHECK(mentions(vio, "gamma_schedule[2]"));
  CHECK(mentions(vio, "strictly increasing"));
}

TEST_CASE("json syntax errors carry the parser position") {
  const auto vio = violations_of("{\"mesh\": }");
  REQUIRE(vio.size() == 1);
  CHECK(vio[0].find("<test>") != std::string::npos);
}

TEST_CASE("lab study names are validated") {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "lab": {"study": "voodoo"})");
  CHECK(mentions(violations_of(text), "unknown study 'voodoo'"));

  std::string ok = kMinimal;
  ok.insert(ok.rfind('}'),
            R"(, "lab": {"study": "timestep_sweep", "ks": [2, 4], "cells": 50})");
  const RunConfig cfg = parse_config_text(ok, "<test>");
  CHECK(cfg.lab.study == "timestep_sweep");
  REQUIRE(cfg.lab.ks.size() == 2);
  CHECK(cfg.lab.ks[1] == 4);
  CHECK(cfg.lab.cells == 50);
  CHECK(cfg.lab.gammas.size() == 4);  // untouched defaults
}
