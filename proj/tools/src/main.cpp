// dualprobe - scenario configs in, plot-ready CSV/JSON out.

#include "commands.hpp"

#include "CLI11.hpp"

int main(int argc, char** argv) {
  using namespace dualprobe::cli;

  CLI::App app{"Dual-probe TLS spectroscopy: simulate, extract, threshold, scan, markov"};
  app.require_subcommand(1);

  CommandOptions opts;
  unsigned parallel = 1;
  std::string engine, input;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "Scenario JSON file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Output directory (created if missing)")->capture_default_str();
    sub->add_option("--parallel", parallel, "Worker threads for grid commands")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    sub->add_option("--engine", engine, "redfield_full, redfield_secular, lindblad or analytic");
  };

  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Propagate the probes and write the trajectory and a summary"},
      {"extract", "Spectrum, fitted peaks and recovered parameters"},
      {"threshold", "log10(M) map over (Gamma_1, Gamma_phi) and effective rates"},
      {"scan", "Coupling or decay-rate profile along a line scan, TLS characterization"},
      {"markov", "Trace distance between the two probe-excited states"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (std::string(name) == "extract")
      sub->add_option("--input", input, "Measured-style CSV with columns t,value")->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  opts.parallel = parallel;
  if (!engine.empty()) opts.engine = engine;
  if (!input.empty()) opts.input = input;
  return run_command(app.get_subcommands().front()->get_name(), opts);
}
