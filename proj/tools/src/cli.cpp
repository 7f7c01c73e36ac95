#include "cli.hpp"

#include <iostream>

#include <CLI11.hpp>
#include <omp.h>

#include "commands.hpp"
#include "nnreach/errors.hpp"

namespace nnreach::cli {

int run(int argc, char** argv) {
  CLI::App app{"nnreach: reachability-based safety verification of learned controllers"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config, out, run_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool strict = false, force = false, compare_mc = false;
  std::vector<double> z;
  app.add_option("--config", config, "Run configuration (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "Root random seed (overrides the config)");
  app.add_option("--out", out, "Output directory (overrides the config)");
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);

  auto* train = app.add_subcommand("train", "Fit a dynamics model and a distilled MPC policy");
  auto* verify = app.add_subcommand("verify", "Forward reachable tube and controller classification");
  verify->add_flag("--strict", strict, "Exit with code 4 when the controller is unsafe");
  auto* safe_set = app.add_subcommand("safe-set", "Backward reachable tubes and the safe initial states");
  safe_set->add_flag("--compare-mc", compare_mc, "Compare with Monte-Carlo ground truth");
  safe_set->add_flag("--force", force, "Run even when verify found the controller safe");
  auto* oracle = app.add_subcommand("oracle", "Monte-Carlo ground truth for the initial set");
  auto* plots = app.add_subcommand("export-plots", "Export CSV slices and scene polylines of a run");
  plots->add_option("--run", run_dir, "Run directory to export")->required();
  plots->add_option("--z", z, "z values of the slices for 3D tubes")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    RunConfig rc = load_run_config(config.empty() ? std::nullopt : std::optional<std::filesystem::path>(config));
    if (seed_opt->count() > 0) rc.seed = seed;
    if (!out.empty()) rc.out = out;
    if (threads > 0) rc.threads = threads;
    if (rc.threads > 0) omp_set_num_threads(rc.threads);
    rc.strict = strict;
    rc.force = force;
    rc.compare_mc = compare_mc;
    rc.z_slices = z;
    rc.run_dir = run_dir;

    if (train->parsed()) return cmd_train(rc);
    if (verify->parsed()) return cmd_verify(rc);
    if (safe_set->parsed()) return cmd_safe_set(rc);
    if (oracle->parsed()) return cmd_oracle(rc);
    if (plots->parsed()) return cmd_export_plots(rc);
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  return run(static_cast<int>(args.size()), argv.data());
}

}  // namespace nnreach::cli
