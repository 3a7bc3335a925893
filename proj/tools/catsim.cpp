// catsim: reproduce the cat-amplification tables and run ad-hoc schedules.
//
// Exit codes: 0 success, 1 invalid configuration or I/O failure,
// 2 numerical degeneracy (conditional probability below the floor).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "catsim/runner.hpp"

namespace {

using namespace catsim;
using namespace catsim::runner;

struct GridOption {
  std::vector<double> list;
  std::vector<double> range;  // start stop step

  std::vector<double> resolve(std::vector<double> fallback) const {
    if (!list.empty() && !range.empty()) throw ConfigError("--alphas and --grid are mutually exclusive");
    if (!list.empty()) return list;
    if (!range.empty()) return make_grid(range[0], range[1], range[2]);
    return fallback;
  }
};

void add_grid(CLI::App* cmd, GridOption& g) {
  cmd->add_option("--alphas", g.list, "Explicit comma-separated amplitude list")->delimiter(',');
  cmd->add_option("--grid", g.range, "Amplitude range as START STOP STEP")->expected(3);
}

void emit(const Table& t, const RunConfig& cfg) {
  if (!cfg.output_path) {
    write_table(t, cfg.format, std::cout);
    return;
  }
  std::ofstream out(*cfg.output_path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + *cfg.output_path + "'");
  write_table(t, cfg.format, out);
  if (!out) throw ConfigError("write failed for '" + *cfg.output_path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional cat-state amplification simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<int> cutoff;
  std::optional<double> eta;
  std::optional<std::string> format;
  std::optional<std::string> out_path;
  std::optional<std::string> config_path;
  app.add_option("--cutoff", cutoff, "Fock cutoff per mode (default 30)");
  app.add_option("--eta", eta, "Detector efficiency in [0,1] (default 1)");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", out_path, "Output file (default stdout)");
  app.add_option("--config", config_path, "key = value configuration file");

  GridOption fig2_grid, fig3_grid, fig4_grid;
  auto* fig2 = app.add_subcommand("fig2", "Success probability: closed form and simulation");
  add_grid(fig2, fig2_grid);
  auto* fig3 = app.add_subcommand("fig3", "Squeezed-photon fidelity against odd cats, maximized over r");
  add_grid(fig3, fig3_grid);
  auto* fig4 = app.add_subcommand("fig4", "Best fidelity and iteration count vs target amplitude");
  add_grid(fig4, fig4_grid);
  int max_n = kDefaultMaxIterations;
  fig4->add_option("--max-n", max_n, "Largest iteration count searched");

  auto* purify = app.add_subcommand("purify", "One iteration on mixed squeezed-photon inputs");
  std::vector<double> p_list{0.4, 0.25, 0.05};
  double alpha_i = 0.5;
  purify->add_option("--p", p_list, "Photon production inefficiencies")->delimiter(',');
  purify->add_option("--alpha-i", alpha_i, "Initial cat amplitude");

  auto* amplify = app.add_subcommand("amplify", "Run a schedule described by --config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    AmplifyConfig cfg;
    if (config_path) cfg = load_config(*config_path);
    // Explicit flags take precedence over the config file.
    if (cutoff) cfg.run.cutoff = *cutoff;
    if (eta) cfg.run.eta = *eta;
    if (format) cfg.run.format = parse_format(*format);
    if (out_path) cfg.run.output_path = *out_path;
    cfg.run.validate();

    Table table;
    if (*fig2) table = fig2_table(fig2_grid.resolve(default_fig2_grid()), cfg.run);
    else if (*fig3) table = fig3_table(fig3_grid.resolve(default_fig3_grid()), cfg.run);
    else if (*fig4) table = fig4_table(fig4_grid.resolve(default_fig4_grid()), max_n, cfg.run);
    else if (*purify) table = purify_table(p_list, alpha_i, cfg.run);
    else if (*amplify) {
      if (!config_path) throw ConfigError("amplify requires --config");
      table = amplify_table(cfg);
    }
    emit(table, cfg.run);
  } catch (const ConfigError& e) {
    std::cerr << "catsim: invalid configuration: " << e.what() << '\n';
    return 1;
  } catch (const DegenerateProbability& e) {
    std::cerr << "catsim: numerical degeneracy: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "catsim: invalid configuration: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "catsim: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
