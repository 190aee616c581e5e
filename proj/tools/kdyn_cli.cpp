#include "kdyn/run.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace kdyn;

int main(int argc, char** argv) {
  CLI::App app{"kdyn: random walks and certificates for groups of homeomorphisms of Cantor sets"};
  app.require_subcommand(1);

  RunOptions opt;
  std::string scenario_path, certificate_path, out_dir;
  std::uint64_t seed = 0;
  std::size_t runs = 0;
  int depth = 0;
  bool series = false;

  struct Cmd {
    const char* name;
    ScenarioKind kind;
    const char* help;
  };
  const Cmd cmds[] = {
      {"simulate", ScenarioKind::simulate, "Run the walk diagnostics"},
      {"certify-free", ScenarioKind::certify_free, "Search for a ping-pong certificate"},
      {"find-measure", ScenarioKind::find_measure, "Solve for an invariant cell measure"},
      {"morse-smale", ScenarioKind::morse_smale, "Check or search for a Morse-Smale element"},
      {"giet-blowup", ScenarioKind::giet_blowup, "Blow up a GIET group into a homeomorphism group"},
  };
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    auto* s = sub->add_option("--seed", seed, "Seed (overrides the scenario)");
    auto* r = sub->add_option("--runs", runs, "Number of runs (overrides the budget)");
    auto* d = sub->add_option("--depth", depth, "Cell depth (overrides the budget)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_flag("--emit-series", series, "Write per-step series as CSV");
    sub->callback([&, kind = c.kind, s, r, d] {
      opt.command = kind;
      if (s->count()) opt.seed = seed;
      if (r->count()) opt.runs = runs;
      if (d->count()) opt.depth = depth;
    });
  }
  auto* verify = app.add_subcommand("verify", "Re-check a certificate file");
  verify->add_option("certificate", certificate_path, "Certificate JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : exit_input;
  }

  if (verify->parsed()) {
    auto r = verify_file(certificate_path);
    std::cout << r.verdict << '\n';
    return r.exit_code;
  }

  if (const char* p = std::getenv("KDYN_BUDGET")) opt.profile = p;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  opt.emit_series = series;
  try {
    budget_profile(opt.profile);
    auto s = parse_scenario(read_file(scenario_path));
    auto r = run_scenario(s, opt);
    std::cout << r.verdict << '\n';
    return r.exit_code;
  } catch (const SchemaError& e) {
    std::cout << "INPUT ERROR " << scenario_path << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cout << "ERROR: " << e.what() << '\n';
  }
  return exit_input;
}
