// Batch experiment runner. One subcommand per experiment id plus `plot`,
// which reshapes an output CSV to long format for external plotters.
//
// Exit status: 0 when every embedded acceptance threshold holds, 1 when an
// experiment ran but missed a threshold, 2 on configuration errors (nothing
// is written in that case).
//
// Shared flags can also come from the environment: QADAPT_SEED,
// QADAPT_TRIALS, QADAPT_OUT, QADAPT_CONFIG and QADAPT_THREADS. Command-line
// flags take precedence over the environment.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "qadapt/common.hpp"
#include "qadapt/csv.hpp"
#include "qadapt/runner.hpp"

namespace {

struct SharedFlags {
  std::uint64_t seed = 1;
  std::size_t trials = 0;
  std::string out = ".";
  std::string config;
  int threads = 0;
  std::vector<std::string> sets;
};

void add_shared(CLI::App* sub, SharedFlags& f) {
  sub->add_option("--seed", f.seed, "root seed of the derivation tree")->envname("QADAPT_SEED");
  sub->add_option("--trials", f.trials, "number of trials, runs or seeds (0 keeps the default)")->envname("QADAPT_TRIALS");
  sub->add_option("--out", f.out, "output directory")->envname("QADAPT_OUT");
  sub->add_option("--config", f.config, "flat key = value config file")->envname("QADAPT_CONFIG");
  sub->add_option("--threads", f.threads, "OpenMP threads (0 keeps the runtime default)")->envname("QADAPT_THREADS");
  sub->add_option("--set", f.sets, "override one config key, key=value")->allow_extra_args(false);
}

int run(const std::string& id, const SharedFlags& f, bool print_defaults) {
  using namespace qadapt;
  if (print_defaults) {
    for (const auto& [k, v] : experiment_defaults(id)) std::cout << k << " = " << v << "\n";
    return 0;
  }
  RunSpec spec;
  spec.id = id;
  spec.seed = f.seed;
  spec.trials = f.trials;
  if (!f.config.empty()) spec.overrides = read_config_file(f.config);
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::ConfigError, "--set expects key=value, got '" + kv + "'");
    spec.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (f.threads > 0) omp_set_num_threads(f.threads);
  const RunResult r = run_experiment(spec);
  write_outputs(r, id, f.out);
  for (const Criterion& c : r.criteria)
    std::cout << (c.pass ? "PASS " : "FAIL ") << id << " " << c.name << " = " << format_double(c.value) << " "
              << c.relation << " " << format_double(c.threshold) << "\n";
  std::cout << "wrote " << f.out << "/" << id << ".csv and " << f.out << "/" << id << "_summary.json\n";
  return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive shadow tomography experiment runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qadapt::build_id()));

  SharedFlags flags;
  bool print_defaults = false;
  std::string chosen;
  for (const std::string& id : qadapt::experiment_ids()) {
    CLI::App* sub = app.add_subcommand(id, "run the " + id + " experiment");
    add_shared(sub, flags);
    sub->add_flag("--print-defaults", print_defaults, "list the config keys and their defaults, then exit");
    sub->callback([&chosen, id] { chosen = id; });
  }

  std::string plot_in, plot_out;
  CLI::App* plot = app.add_subcommand("plot", "reshape an output CSV to long format");
  plot->add_option("--in", plot_in, "input CSV")->required();
  plot->add_option("--out", plot_out, "output CSV (stdout when omitted)");
  plot->callback([&chosen] { chosen = "plot"; });

  if (argc > 1 && argv[1][0] != '-' && !qadapt::is_experiment_id(argv[1]) && std::string(argv[1]) != "plot") {
    std::cerr << "error: unknown experiment id '" << argv[1] << "'\n";
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (chosen == "plot") {
      std::ifstream is(plot_in);
      if (!is) throw qadapt::Error(qadapt::ErrorKind::ConfigError, "cannot read " + plot_in);
      const qadapt::CsvTable long_table = qadapt::emit_plot_data(qadapt::read_csv(is));
      if (plot_out.empty()) {
        qadapt::write_csv(std::cout, long_table);
      } else {
        std::ofstream os(plot_out, std::ios::binary);
        qadapt::write_csv(os, long_table);
      }
      return 0;
    }
    return run(chosen, flags, print_defaults);
  } catch (const qadapt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
