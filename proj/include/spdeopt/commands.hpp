#pragma once

#include <iostream>

#include "verify.hpp"

namespace spdeopt {

/// Hypothesis validation surface: dynamics probes, cost growth, noise
/// summability, and the gating rule for Hamiltonian scans. Nonzero exit on
/// any hard failure, with the failing label named.
inline int cmd_validate(const problem_config& cfg, std::ostream& out) {
  int exit_code = 0;
  problem p;
  try {
    p = assemble_problem(cfg);
  } catch (const std::exception& e) {
    out << "FAIL assembly: " << e.what() << "\n";
    return 2;
  }

  const hypothesis_report hr = validate_hypotheses(*p.spec);
  for (const auto& c : hr.checks) {
    out << (c.pass ? "pass " : "FAIL ") << c.label << ": observed " << format_double(c.observed)
        << ", declared " << format_double(c.declared);
    if (!c.note.empty()) out << " (" << c.note << ")";
    out << "\n";
  }
  if (!hr.pass) exit_code = 1;

  // summability: (H2) with exponent (d-1)/2, (H7) with exponent (d+1)/2
  {
    sequence_rule mu = (cfg.mu_kind == "zero") ? mu_zero() : mu_power(cfg.mu_scale, cfg.mu_rate);
    const sequence_rule lam = (cfg.bc == "dirichlet") ? lambda_dirichlet_1d()
                                                      : lambda_neumann_shifted_1d();
    const summability_report h2 =
        validate_summability(mu, lam, cfg.dimension, summability_exponent::lower);
    const summability_report h7 =
        validate_summability(mu, lam, cfg.dimension, summability_exponent::upper);
    const bool require_h7 = (cfg.family == "porous_media");
    out << (h2.pass ? "pass " : (require_h7 ? "warn " : "FAIL ")) << "(H2) summability: "
        << h2.detail << ", tail " << format_double(h2.tail_estimate) << "\n";
    out << (h7.pass ? "pass " : (require_h7 ? "FAIL " : "warn ")) << "(H7) summability: "
        << h7.detail << ", tail " << format_double(h7.tail_estimate) << "\n";
    if (require_h7 && !h7.pass) exit_code = 1;
    if (!require_h7 && !h2.pass) exit_code = 1;
  }

  {
    const cost_growth_report cg = validate_cost_growth(p.cost, p.spec->space());
    out << (cg.pass ? "pass " : "FAIL ") << "(A3)/(A4) cost derivative growth: worst ratio "
        << format_double(cg.worst_ratio) << "\n";
    if (!cg.pass) exit_code = 1;
  }

  if (cfg.pontryagin && !p.spec->control_independent_sigma()) {
    out << "FAIL (A~): Hamiltonian scan requested but the diffusion depends on the control "
           "(Robin boundary noise, gamma != 0)\n";
    exit_code = 1;
  }

  out << (exit_code == 0 ? "validate: all checks passed\n" : "validate: failures above\n");
  return exit_code;
}

/// Forward ensemble solve; emits path CSV/binary, pathwise adjoint CSV and
/// a content-hash manifest.
inline int cmd_solve(const problem_config& cfg, const std::filesystem::path& out_dir,
                     std::ostream& out) {
  const problem p = assemble_problem(cfg);
  const brownian_driver driver = make_driver(p);
  const control_field u = zero_control(p);
  const state_path path = solve_forward(*p.spec, u, p.x0, driver, p.solve);
  const adjoint_path adj = solve_adjoint_pathwise(*p.spec, path, p.cost);

  std::filesystem::create_directories(out_dir);
  manifest man(cfg.hash, cfg.seed, cfg.n_samples);
  const std::string state_csv = path_to_csv(path);
  const std::string state_bin = path_to_binary(path);
  const std::string adj_csv = adjoint_to_csv(adj);
  write_text_file(out_dir / "state.csv", state_csv);
  write_text_file(out_dir / "state.bin", state_bin);
  write_text_file(out_dir / "adjoint_p.csv", adj_csv);
  man.add("state.csv", state_csv);
  man.add("state.bin", state_bin);
  man.add("adjoint_p.csv", adj_csv);
  write_text_file(out_dir / "MANIFEST", man.text());
  out << "solve: cost " << format_double(evaluate_cost(p.cost, path)) << ", wrote "
      << (out_dir / "MANIFEST").string() << "\n";
  return 0;
}

/// Projected-gradient run; emits the iteration history, the final control
/// and state, and the manifest.
inline int cmd_optimize(const problem_config& cfg, const std::filesystem::path& out_dir,
                        std::ostream& out) {
  const problem p = assemble_problem(cfg);
  const brownian_driver driver = make_driver(p);
  const optimize_result res =
      optimize(*p.spec, p.cost, p.box, p.x0, zero_control(p), driver, p.opt);

  std::filesystem::create_directories(out_dir);
  manifest man(cfg.hash, cfg.seed, cfg.n_samples);
  const std::string hist = history_to_csv(res.history);
  const std::string ctrl = control_to_csv(res.u);
  const state_path final_path = solve_forward(*p.spec, res.u, p.x0, driver, p.solve);
  const std::string state_csv = path_to_csv(final_path);
  write_text_file(out_dir / "history.csv", hist);
  write_text_file(out_dir / "control.csv", ctrl);
  write_text_file(out_dir / "state.csv", state_csv);
  man.add("history.csv", hist);
  man.add("control.csv", ctrl);
  man.add("state.csv", state_csv);
  write_text_file(out_dir / "MANIFEST", man.text());
  out << "optimize: " << (res.converged ? "converged" : "budget exhausted") << " after "
      << res.iters << " iterations, cost " << format_double(res.final_cost)
      << ", stationarity " << format_double(res.final_stationarity) << "\n";
  return res.converged ? 0 : 3;
}

/// Runs both experiment suites and emits versioned JSON + CSV reports.
/// Wall-clock lives only in the JSON, which is deliberately left out of the
/// manifest so reruns hash identically.
inline int cmd_verify(const problem_config& cfg, const std::filesystem::path& out_dir,
                      std::ostream& out) {
  const problem p = assemble_problem(cfg);
  if (cfg.pontryagin && !p.spec->control_independent_sigma())
    throw capability_error("verify: Hamiltonian scan requested but (A~) fails "
                           "(control-dependent diffusion)");
  const experiment_report conv = run_convergence_suite(p);
  const experiment_report optr = run_optimality_suite(p);

  std::filesystem::create_directories(out_dir);
  manifest man(cfg.hash, cfg.seed, cfg.n_samples);
  const std::string conv_csv = report_to_csv(conv);
  const std::string opt_csv = report_to_csv(optr);
  write_text_file(out_dir / "convergence.csv", conv_csv);
  write_text_file(out_dir / "optimality.csv", opt_csv);
  write_text_file(out_dir / "convergence.json", report_to_json(conv).dump(2) + "\n");
  write_text_file(out_dir / "optimality.json", report_to_json(optr).dump(2) + "\n");
  man.add("convergence.csv", conv_csv);
  man.add("optimality.csv", opt_csv);
  write_text_file(out_dir / "MANIFEST", man.text());

  int failures = 0;
  for (const auto* rep : {&conv, &optr}) {
    for (const auto& e : rep->entries) {
      out << (e.pass ? "pass " : "FAIL ") << rep->suite << "/" << e.id << " = "
          << format_double(e.value);
      if (!e.note.empty()) out << " (" << e.note << ")";
      out << "\n";
      if (!e.pass) ++failures;
    }
  }
  out << "verify: " << (failures == 0 ? "all verdicts pass" : std::to_string(failures) + " failures")
      << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace spdeopt
