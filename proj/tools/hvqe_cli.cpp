// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iostream>
#include <regex>

#include "CLI11.hpp"
#include "hvqe/experiment.hpp"

namespace {

void parse_grid(const std::string& s, int& n_x, int& n_y) {
  static const std::regex re(R"((\d+)[xX](\d+))");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw hvqe::InvalidArgument("grid must look like AxB, got '" + s + "'");
  n_x = std::stoi(m[1]);
  n_y = std::stoi(m[2]);
}

void print_result(const hvqe::ExperimentConfig& cfg, const hvqe::ExperimentResult& res) {
  if (cfg.mode == hvqe::Mode::Resources) {
    std::cout << res.resources_csv;
    return;
  }
  std::cout << hvqe::kSummaryHeader << "\n";
  for (const auto& r : res.runs) std::cout << hvqe::summary_row(r) << "\n";
  if (cfg.mode == hvqe::Mode::Represent || cfg.mode == hvqe::Mode::HalfFill) {
    if (res.depth_to_target)
      std::cout << "depth_to_target," << *res.depth_to_target << "\n";
    else
      std::cout << "depth_to_target,none (cap " << cfg.max_layers << " reached)\n";
  }
  if (cfg.mode == hvqe::Mode::Realistic || cfg.mode == hvqe::Mode::Noisy) {
    const auto s = hvqe::summarize_infidelity(res.runs);
    std::cout << "median_infidelity," << s.median << "\nmin_infidelity," << s.min
              << "\nmax_infidelity," << s.max << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational ground states of the Fermi-Hubbard model"};
  app.require_subcommand(1);

  std::string grid = "2x2", ansatz = "ehv", optimizer, ed = "off", out, config_file;
  std::optional<int> layers, runs, max_layers, restarts;
  std::optional<std::uint64_t> m, seed;
  std::optional<double> noise, U;

  for (const char* verb : {"represent", "realistic", "noisy", "usweep", "halffill", "resources"}) {
    auto* sub = app.add_subcommand(verb);
    sub->add_option("--grid", grid, "lattice size AxB");
    sub->add_option("--ansatz", ansatz, "hv, ehv or np")->check(CLI::IsMember({"hv", "ehv", "np"}));
    sub->add_option("--layers", layers, "ansatz depth");
    sub->add_option("--max-layers", max_layers, "depth cap for depth sweeps");
    sub->add_option("--restarts", restarts, "extra random starts per depth");
    sub->add_option("--optimizer", optimizer, "lbfgs, spsa or cd")
        ->check(CLI::IsMember({"lbfgs", "spsa", "cd"}));
    sub->add_option("--m", m, "shots per measurement setting");
    sub->add_option("--noise", noise, "depolarizing probability per two-qubit gate");
    sub->add_option("--ed", ed, "error detection")->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--U", U, "onsite interaction");
    sub->add_option("--seed", seed, "base random seed");
    sub->add_option("--runs", runs, "independent runs");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--config", config_file, "JSON config document")->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    hvqe::ExperimentConfig cfg;
    cfg.mode = hvqe::parse_mode(app.get_subcommands().front()->get_name());
    if (cfg.mode == hvqe::Mode::Realistic || cfg.mode == hvqe::Mode::Noisy)
      cfg.optimizer = hvqe::OptimizerKind::SPSA;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      cfg = hvqe::config_from_json(hvqe::Json::parse(in), cfg);
      cfg.mode = hvqe::parse_mode(app.get_subcommands().front()->get_name());
    }
    auto* sub = app.get_subcommands().front();
    if (sub->count("--grid")) parse_grid(grid, cfg.n_x, cfg.n_y);
    if (sub->count("--ansatz")) cfg.ansatz = hvqe::parse_ansatz_kind(ansatz);
    if (layers) cfg.layers = *layers;
    if (max_layers) cfg.max_layers = *max_layers;
    if (restarts) cfg.restarts = *restarts;
    if (!optimizer.empty()) cfg.optimizer = hvqe::parse_optimizer(optimizer);
    if (m) cfg.m = *m;
    if (noise) cfg.noise = *noise;
    if (sub->count("--ed")) cfg.error_detection = ed == "on";
    if (U) cfg.U = *U;
    if (seed) cfg.seed = *seed;
    if (runs) cfg.runs = *runs;
    if (!out.empty()) cfg.out_dir = out;

    const auto result = hvqe::run_experiment(cfg);
    print_result(cfg, result);
    for (const auto& f : hvqe::write_outputs(cfg, result)) std::cerr << "wrote " << f << "\n";
  } catch (const hvqe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
