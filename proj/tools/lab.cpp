#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "dtnlab/experiments.hpp"

using namespace dtnlab;

namespace {

const char* kExperiments[] = {"dtn-validate", "recover-sigma", "decay-profile", "stability-sweep",
                              "liouville",    "spectral",      "density"};

int fail(const std::string& stage, const Error& e) {
  std::cerr << "lab: error: stage=" << stage << " kind=" << to_string(e.kind()) << ": " << e.what() << "\n";
  return e.kind() == ErrorKind::usage ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet-to-Neumann boundary determination experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool have_seed = false;
  for (const char* name : kExperiments) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_path, "key = value scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (the config's out key takes precedence)");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s, have_seed = true; },
        "seed for randomised sampling (the config's seed key takes precedence)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  ScenarioConfig base;
  try {
    base.experiment = parse_experiment(experiment);
  } catch (const Error& e) {
    return fail("config", e);
  }
  if (!out_dir.empty()) base.out = out_dir;
  if (have_seed) base.seed = seed;

  ScenarioConfig config;
  try {
    // flags seed the base, the file overrides them
    config = load_config(config_path, base);
    if (config.experiment != base.experiment) {
      throw Error(ErrorKind::usage, "config names experiment '" + to_string(config.experiment) +
                                        "' but the command is '" + experiment + "'");
    }
  } catch (const Error& e) {
    return fail("config", e);
  }

  Bundle bundle;
  try {
    bundle = run_scenario(config);
  } catch (const StageError& e) {
    return fail(e.stage(), e);
  } catch (const Error& e) {
    return fail("run", e);
  } catch (const std::exception& e) {
    std::cerr << "lab: error: stage=run kind=internal: " << e.what() << "\n";
    return 1;
  }
  try {
    write_bundle(bundle, config.out);
    const auto entries = export_report(bundle, config.out);
    std::cout << experiment << ": wrote " << bundle.tables.size() << " tables and " << entries.size()
              << " plot files to " << config.out.string() << "\n";
  } catch (const Error& e) {
    return fail("output", e);
  }
  return 0;
}
