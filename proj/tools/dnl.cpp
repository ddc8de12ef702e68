#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "dnl/run.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "configuration file")->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides [output] directory)");
  cmd->add_option("--format", opts.format, "csv|json|both (overrides [output] format)");
  cmd->add_option("--seed", opts.seed, "RNG seed for the ineq sweep")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
}

int run(const std::string& command, const CommonOpts& opts) {
  dnl::RunConfig cfg = dnl::load_config(opts.config_path);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (!opts.format.empty()) {
    if (opts.format != "csv" && opts.format != "json" && opts.format != "both")
      throw dnl::config_error("--format must be csv, json, or both");
    cfg.format = opts.format;
  }
  if (opts.seed_set) {
    cfg.seed = opts.seed;
    cfg.seed_set = true;
  }
  const dnl::RunOutcome outcome = dnl::run_command(command, cfg);
  for (const auto& check : outcome.report["checks"]) {
    std::printf("%-28s %s (worst slack %.3e)\n", check["name"].get<std::string>().c_str(),
                check["pass"].get<bool>() ? "pass" : "FAIL", check["worst_slack"].get<double>());
  }
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D Galerkin solver and estimate checker for the doubly nonlinear "
               "diffusion equation d/dt(|u|^{p-2}u) = d/dx(|u'|^{p-2}u')"};
  app.require_subcommand(1);

  CommonOpts opts;
  const char* commands[] = {"solve", "verify", "squeeze", "convergence", "ineq"};
  const char* descriptions[] = {
      "march the scheme and evaluate the energy estimate",
      "order principles and weak-form residual on a solution",
      "three-solution squeeze with a shrinking gamma ladder",
      "refinement study over a diagonal ladder",
      "seeded sweep of the vector inequalities",
  };
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(commands[i], descriptions[i]), opts);

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opts);
  } catch (const dnl::config_error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 3;
  } catch (const dnl::solve_error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
}
