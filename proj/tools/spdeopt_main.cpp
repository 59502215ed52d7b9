#include <iostream>

#include <CLI11.hpp>

#include "spdeopt/spdeopt.hpp"

namespace {

struct cli_options {
  std::string config_path;
  std::string out_dir = "out";
  std::int64_t seed_override = -1;
  int samples_override = 0;
};

spdeopt::problem_config load(const cli_options& o) {
  spdeopt::problem_config cfg = spdeopt::load_config_file(o.config_path);
  if (o.seed_override >= 0 || o.samples_override > 0) {
    spdeopt::json j = cfg.raw;
    if (!j.contains("ensemble")) j["ensemble"] = spdeopt::json::object();
    if (o.seed_override >= 0) j["ensemble"]["seed"] = static_cast<std::uint64_t>(o.seed_override);
    if (o.samples_override > 0) j["ensemble"]["n_samples"] = o.samples_override;
    cfg = spdeopt::parse_config(j);  // re-hash with the effective values
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spdeopt: open-loop control of monotone stochastic evolution equations"};
  app.require_subcommand(1);

  cli_options opt;
  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", opt.config_path, "problem configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_out) sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed_override, "override ensemble.seed");
    sub->add_option("--samples", opt.samples_override, "override ensemble.n_samples");
  };

  CLI::App* validate = app.add_subcommand("validate", "run hypothesis validators");
  add_common(validate, false);
  CLI::App* solve = app.add_subcommand("solve", "forward ensemble solve");
  add_common(solve, true);
  CLI::App* optimize = app.add_subcommand("optimize", "projected-gradient control optimization");
  add_common(optimize, true);
  CLI::App* verify = app.add_subcommand("verify", "run the experiment suites");
  add_common(verify, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const spdeopt::problem_config cfg = load(opt);
    if (app.got_subcommand(validate)) return spdeopt::cmd_validate(cfg, std::cout);
    if (app.got_subcommand(solve)) return spdeopt::cmd_solve(cfg, opt.out_dir, std::cout);
    if (app.got_subcommand(optimize)) return spdeopt::cmd_optimize(cfg, opt.out_dir, std::cout);
    if (app.got_subcommand(verify)) return spdeopt::cmd_verify(cfg, opt.out_dir, std::cout);
  } catch (const spdeopt::capability_error& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return 4;
  } catch (const spdeopt::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
