#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "helpers.hpp"

#ifndef SPDEOPT_CONFIG_DIR
#define SPDEOPT_CONFIG_DIR "configs"
#endif

using namespace spdeopt;

TEST_CASE("experiment suites pass on the shipped small configuration") {
  const problem_config cfg =
      load_config_file(std::string(SPDEOPT_CONFIG_DIR) + "/porous_dirichlet_small.json");
  const problem p = assemble_problem(cfg);

  const experiment_report conv = run_convergence_suite(p);
  for (const auto& e : conv.entries) {
    INFO(e.id << " = " << e.value << " in [" << e.lo << ", " << e.hi << "] " << e.note);
    CHECK(e.pass);
  }
  REQUIRE(conv.find("gateaux_remainder_slope") != nullptr);
  REQUIRE(conv.find("spike_state_slope") != nullptr);
  REQUIRE(conv.find("heat_dt_slope") != nullptr);
  REQUIRE(conv.find("energy_bound_lhs_over_rhs") != nullptr);

  const experiment_report opt = run_optimality_suite(p);
  for (const auto& e : opt.entries) {
    INFO(e.id << " = " << e.value << " in [" << e.lo << ", " << e.hi << "] " << e.note);
    CHECK(e.pass);
  }
  REQUIRE(opt.find("duality_pathwise_rel_residual") != nullptr);
  REQUIRE(opt.find("fd_gradient_rel_error") != nullptr);
  REQUIRE(opt.find("optimizer_stationarity") != nullptr);
}

TEST_CASE("reports are deterministic given the config and schema-versioned") {
  json j = json::parse(R"({
    "dynamics": {"family": "divergence",
                 "nonlinearity": {"kind": "smooth_monotone", "slope_lo": 0.5, "slope_hi": 1.5}},
    "noise": {"n_modes": 3, "mu": {"kind": "power", "scale": 0.2, "rate": 2.0}},
    "cost": {"kind": "lq_tracking", "w_state": 1.0, "w_control": 0.05, "x_ref": "sin"},
    "grids": {"n_cells": 8, "n_steps": 32, "horizon": 0.25},
    "ensemble": {"n_samples": 6, "seed": 5150},
    "initial_state": {"kind": "bump", "scale": 0.5}
  })");
  const problem p = assemble_problem(parse_config(j));
  const experiment_report a = run_convergence_suite(p);
  const experiment_report b = run_convergence_suite(p);
  REQUIRE(report_to_csv(a) == report_to_csv(b));
  const json ja = report_to_json(a);
  REQUIRE(ja.at("schema_version").get<int>() == k_report_schema_version);
  REQUIRE(ja.at("suite").get<std::string>() == "convergence");
}

TEST_CASE("verify command writes reports, csv tables and a manifest") {
  json j = json::parse(R"({
    "dynamics": {"family": "porous_media", "bc": "dirichlet",
                 "nonlinearity": {"kind": "smooth_monotone", "slope_lo": 1.0, "slope_hi": 2.0}},
    "noise": {"n_modes": 3, "mu": {"kind": "power", "scale": 0.2, "rate": 2.0}},
    "cost": {"kind": "boundary_tracking", "w_state": 1.0, "w_control": 0.05,
             "w_boundary": 0.1, "x_ref": "sin_decay", "terminal_profile": "sin"},
    "box": {"interior": [-4.0, 4.0], "boundary": [-2.0, 2.0]},
    "grids": {"n_cells": 8, "n_steps": 32, "horizon": 0.25},
    "ensemble": {"n_samples": 6, "seed": 31},
    "initial_state": {"kind": "sin", "scale": 1.0}
  })");
  const auto dir = std::filesystem::temp_directory_path() / "spdeopt_verify_out";
  std::ostringstream sink;
  const int rc = cmd_verify(parse_config(j), dir, sink);
  REQUIRE(rc == 0);
  REQUIRE(std::filesystem::exists(dir / "convergence.json"));
  REQUIRE(std::filesystem::exists(dir / "optimality.csv"));
  REQUIRE(std::filesystem::exists(dir / "MANIFEST"));
  const std::string man = read_text_file(dir / "MANIFEST");
  REQUIRE(man.find("artifact convergence.csv") != std::string::npos);
  std::filesystem::remove_all(dir);
}
