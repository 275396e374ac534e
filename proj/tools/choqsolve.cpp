#include <cstdint>
#include <string>

#include "CLI11.hpp"

#include "choq/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "choqsolve: steady states of the multi-state Choquard system via dual\n"
      "potential minimization, with a primal cross-check and a critical-\n"
      "coupling laboratory.\n\n"
      "Exit codes: 0 ok, 2 stalled, 3 unbounded-suspected, 4 config error,\n"
      "5 resource cap, 6 checkpoint mismatch, 7 solver error, 8 usage."};
  app.require_subcommand(1);

  choq::RunManifest mf;
  for (const char* name : {"solve-dual", "solve-primal", "duality-check",
                           "critical-scan", "barphi", "inequality-suite"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", mf.config_path, "JSON config document");
    sub->add_option("--out", mf.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", mf.seed, "deterministic seed recorded in all outputs")
        ->capture_default_str();
    sub->add_option("--resume", mf.resume_path, "checkpoint to resume from");
    sub->add_option("--max-iters", mf.max_iters, "iteration cap override");
    sub->add_option("--mem-cap", mf.mem_cap, "memory budget in bytes")
        ->capture_default_str();
    sub->add_flag("--dump-kernel", mf.dump_kernel,
                  "write the riesz kernel table profile (audit)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : choq::kExitUsage;
  }
  mf.command = app.get_subcommands().front()->get_name();
  return choq::run(mf);
}
