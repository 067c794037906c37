// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hvqe/occupation.hpp"
#include "hvqe/oracle.hpp"
#include "hvqe/resources.hpp"
#include "hvqe/vqe.hpp"

namespace hvqe {

using Json = nlohmann::json;

enum class Mode { Represent, Realistic, Noisy, USweep, HalfFill, Resources };
enum class OptimizerKind { LBFGS, SPSA, CD };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::Represent: return "represent";
    case Mode::Realistic: return "realistic";
    case Mode::Noisy: return "noisy";
    case Mode::USweep: return "usweep";
    case Mode::HalfFill: return "halffill";
    case Mode::Resources: return "resources";
  }
  return "unknown";
}

inline Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::Represent, Mode::Realistic, Mode::Noisy, Mode::USweep, Mode::HalfFill,
                 Mode::Resources})
    if (to_string(m) == s) return m;
  throw InvalidArgument("unknown mode '" + s + "'");
}

inline std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::LBFGS: return "lbfgs";
    case OptimizerKind::SPSA: return "spsa";
    case OptimizerKind::CD: return "cd";
  }
  return "unknown";
}

inline OptimizerKind parse_optimizer(const std::string& s) {
  for (OptimizerKind k : {OptimizerKind::LBFGS, OptimizerKind::SPSA, OptimizerKind::CD})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown optimizer '" + s + "'");
}

struct ExperimentConfig {
  Mode mode = Mode::Represent;
  int n_x = 2, n_y = 2;
  double t = 1.0, U = 2.0;
  AnsatzKind ansatz = AnsatzKind::EHV;
  int layers = 1;
  int max_layers = 8;  // represent / halffill sweep cap
  double target_fidelity = 0.99;
  // Extra random starts per depth after the 1/L start (exact-measurement modes).
  int restarts = 0;
  OptimizerKind optimizer = OptimizerKind::LBFGS;
  std::uint64_t m = 10000;  // shots per setting for CD; SPSA uses its stage list
  bool error_detection = false;
  double noise = 0.0;
  std::uint64_t seed = 1;
  int runs = 1;
  int threads = 0;  // 0 = hardware concurrency
  std::optional<OccupationSector> sector;
  double epsilon = 1e-4;
  std::vector<double> u_values = {0.5, 1.0, 2.0, 3.0, 4.0};
  bool record_trace = true;
  QuasiNewtonConfig lbfgs;
  SpsaConfig spsa;
  CoordinateDescentConfig cd;
  std::string out_dir;

  HubbardModel model() const { return HubbardModel::oriented(n_x, n_y, t, U); }
  std::string grid() const { return std::to_string(n_x) + "x" + std::to_string(n_y); }

  void validate() const {
    require(n_x >= 1 && n_y >= 1 && n_x * n_y >= 2, "grid must have at least two sites");
    require(layers >= 1 && max_layers >= 1, "layer counts must be at least 1");
    require(runs >= 1, "run count must be at least 1");
    require(restarts >= 0, "restart count must be non-negative");
    require(noise >= 0.0 && noise <= 1.0, "noise probability must lie in [0, 1]");
    require(target_fidelity > 0.0 && target_fidelity <= 1.0, "target fidelity must lie in (0, 1]");
    if (mode == Mode::Realistic || mode == Mode::Noisy)
      require(optimizer != OptimizerKind::LBFGS, "sampled modes need the spsa or cd optimizer");
    if (optimizer == OptimizerKind::SPSA) spsa.validate();
    if (optimizer == OptimizerKind::CD) require(cd.budget > 0, "CD budget must be positive");
    if (mode == Mode::USweep) require(!u_values.empty(), "U sweep needs at least one value");
  }
};

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["mode"] = to_string(c.mode);
  j["grid"] = {c.n_x, c.n_y};
  j["t"] = c.t;
  j["U"] = c.U;
  j["ansatz"] = to_string(c.ansatz);
  j["layers"] = c.layers;
  j["max_layers"] = c.max_layers;
  j["target_fidelity"] = c.target_fidelity;
  j["restarts"] = c.restarts;
  j["optimizer"] = to_string(c.optimizer);
  j["m"] = c.m;
  j["error_detection"] = c.error_detection;
  j["noise"] = c.noise;
  j["seed"] = c.seed;
  j["runs"] = c.runs;
  j["epsilon"] = c.epsilon;
  j["u_values"] = c.u_values;
  j["sector"] = c.sector ? Json{c.sector->n_up, c.sector->n_down} : Json(nullptr);
  j["lbfgs"] = {{"budget", c.lbfgs.budget},
                {"fd_step", c.lbfgs.fd_step},
                {"memory", c.lbfgs.memory},
                {"gradient_tolerance", c.lbfgs.gradient_tolerance}};
  j["spsa"] = {{"a", c.spsa.a},           {"c", c.spsa.c},
               {"alpha", c.spsa.alpha},   {"gamma", c.spsa.gamma},
               {"A", c.spsa.A},           {"stage_m", c.spsa.stage_m},
               {"stage_ratio", c.spsa.stage_ratio}, {"stage_averaging", c.spsa.stage_averaging},
               {"budget", c.spsa.budget}};
  j["cd"] = {{"budget", c.cd.budget}, {"m", c.cd.m}, {"max_sweeps", c.cd.max_sweeps}};
  return j;
}

// Reads a config document; absent keys keep their defaults.
inline ExperimentConfig config_from_json(const Json& j, ExperimentConfig c = {}) {
  try {
    if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("grid")) {
      c.n_x = j.at("grid").at(0).get<int>();
      c.n_y = j.at("grid").at(1).get<int>();
    }
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    read("t", c.t);
    read("U", c.U);
    if (j.contains("ansatz")) c.ansatz = parse_ansatz_kind(j.at("ansatz").get<std::string>());
    read("layers", c.layers);
    read("max_layers", c.max_layers);
    read("target_fidelity", c.target_fidelity);
    read("restarts", c.restarts);
    if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    read("m", c.m);
    read("error_detection", c.error_detection);
    read("noise", c.noise);
    read("seed", c.seed);
    read("runs", c.runs);
    read("threads", c.threads);
    read("epsilon", c.epsilon);
    read("u_values", c.u_values);
    read("record_trace", c.record_trace);
    read("out_dir", c.out_dir);
    if (j.contains("sector") && !j.at("sector").is_null())
      c.sector = OccupationSector{j.at("sector").at(0).get<int>(), j.at("sector").at(1).get<int>()};
    if (j.contains("lbfgs")) {
      const auto& s = j.at("lbfgs");
      if (s.contains("budget")) c.lbfgs.budget = s.at("budget").get<std::uint64_t>();
      if (s.contains("fd_step")) c.lbfgs.fd_step = s.at("fd_step").get<double>();
      if (s.contains("memory")) c.lbfgs.memory = s.at("memory").get<std::size_t>();
      if (s.contains("gradient_tolerance"))
        c.lbfgs.gradient_tolerance = s.at("gradient_tolerance").get<double>();
    }
    if (j.contains("spsa")) {
      const auto& s = j.at("spsa");
      if (s.contains("a")) c.spsa.a = s.at("a").get<double>();
      if (s.contains("c")) c.spsa.c = s.at("c").get<double>();
      if (s.contains("alpha")) c.spsa.alpha = s.at("alpha").get<double>();
      if (s.contains("gamma")) c.spsa.gamma = s.at("gamma").get<double>();
      if (s.contains("A")) c.spsa.A = s.at("A").get<double>();
      if (s.contains("stage_m")) c.spsa.stage_m = s.at("stage_m").get<std::vector<std::uint64_t>>();
      if (s.contains("stage_ratio")) c.spsa.stage_ratio = s.at("stage_ratio").get<std::vector<double>>();
      if (s.contains("stage_averaging"))
        c.spsa.stage_averaging = s.at("stage_averaging").get<std::vector<int>>();
      if (s.contains("budget")) c.spsa.budget = s.at("budget").get<std::uint64_t>();
    }
    if (j.contains("cd")) {
      const auto& s = j.at("cd");
      if (s.contains("budget")) c.cd.budget = s.at("budget").get<std::uint64_t>();
      if (s.contains("m")) c.cd.m = s.at("m").get<std::uint64_t>();
      if (s.contains("max_sweeps")) c.cd.max_sweeps = s.at("max_sweeps").get<int>();
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("bad config document: ") + e.what());
  }
  return c;
}

// FNV-1a over the canonical config document, seed and run count excluded so
// that replicates of one experiment share a hash.
inline std::string config_hash(const ExperimentConfig& c) {
  Json j = to_json(c);
  j.erase("seed");
  j.erase("runs");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

struct RunRecord {
  std::string config_hash;
  std::string mode;
  std::string grid;
  std::string ansatz;
  int depth = 0;
  std::string optimizer;
  std::uint64_t seed = 0;
  double U = 0.0;
  OccupationSector sector;
  std::vector<Json> trace;
  std::vector<double> final_params;
  double final_fidelity = 0.0;
  double final_energy = 0.0;
  double ground_energy = 0.0;
  double double_occupancy_error = 0.0;
  std::uint64_t estimates = 0;
  std::uint64_t measurements_used = 0;
  std::uint64_t circuit_evaluations = 0;
  std::uint64_t discards = 0;
  bool converged = false;
  bool budget_exhausted = false;
  double wall_seconds = 0.0;

  double final_infidelity() const { return 1.0 - final_fidelity; }
  double final_energy_error() const { return final_energy - ground_energy; }
};

inline Json to_json(const RunRecord& r) {
  return Json{{"config_hash", r.config_hash},
              {"mode", r.mode},
              {"grid", r.grid},
              {"ansatz", r.ansatz},
              {"depth", r.depth},
              {"optimizer", r.optimizer},
              {"seed", r.seed},
              {"U", r.U},
              {"sector", {r.sector.n_up, r.sector.n_down}},
              {"final_params", r.final_params},
              {"final_fidelity", r.final_fidelity},
              {"final_infidelity", r.final_infidelity()},
              {"final_energy", r.final_energy},
              {"ground_energy", r.ground_energy},
              {"final_energy_error", r.final_energy_error()},
              {"double_occupancy_error", r.double_occupancy_error},
              {"estimates", r.estimates},
              {"measurements_used", r.measurements_used},
              {"circuit_evaluations", r.circuit_evaluations},
              {"discards", r.discards},
              {"converged", r.converged},
              {"budget_exhausted", r.budget_exhausted},
              {"wall_seconds", r.wall_seconds},
              {"trace", r.trace}};
}

inline const char* kSummaryHeader =
    "grid,ansatz,depth,optimizer,seed,final_infidelity,final_energy_error,measurements_used,"
    "discards,U,config_hash";

inline std::string summary_row(const RunRecord& r) {
  std::ostringstream os;
  os << std::setprecision(10) << r.grid << ',' << r.ansatz << ',' << r.depth << ',' << r.optimizer
     << ',' << r.seed << ',' << r.final_infidelity() << ',' << r.final_energy_error() << ','
     << r.measurements_used << ',' << r.discards << ',' << r.U << ',' << r.config_hash;
  return os.str();
}

struct Summary {
  double median = 0.0, min = 0.0, max = 0.0;
};

inline double median(std::vector<double> v) {
  require(!v.empty(), "median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline Summary summarize_infidelity(const std::vector<RunRecord>& runs) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.final_infidelity());
  return {median(v), *std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end())};
}

struct ExperimentResult {
  std::vector<RunRecord> runs;
  // Represent and half-fill modes: smallest depth reaching the target, if any.
  std::optional<int> depth_to_target;
  // Resources mode: CSV tables.
  std::string resources_csv;
};

namespace detail {

// Shared ingredients of one (model, sector, initial state) problem.
struct ProblemContext {
  HubbardModel model;
  OccupationSector sector;
  InitialStateSpec initial;
  SpectrumResult ground;
  StateVector ground_state;
  double ground_double_occupancy = 0.0;
};

inline ProblemContext make_context(const HubbardModel& model, std::optional<OccupationSector> sector,
                                   bool half_fill, double epsilon) {
  OccupationSector s;
  if (sector) {
    s = *sector;
  } else if (half_fill) {
    require(model.sites() % 2 == 0, "half filling needs an even number of sites");
    s = {model.sites() / 2, model.sites() / 2};
  } else {
    s = optimal_occupation(model);
  }
  const auto strategy = half_fill ? DegeneracyStrategy::perturb(epsilon) : DegeneracyStrategy::none();
  ProblemContext c{model, s, InitialStateSpec::noninteracting(s, strategy), exact_ground_state(model, s),
                   StateVector(1), 0.0};
  c.ground_state = c.ground.state();
  c.ground_double_occupancy = double_occupancy(c.ground_state);
  return c;
}

inline void finish_record(RunRecord& r, const ProblemContext& ctx, const VqeProblem& problem,
                          const OptimizerTrace& trace) {
  const StateVector psi = problem.state(trace.final_params);
  r.final_params = trace.final_params;
  r.final_fidelity = fidelity(psi, ctx.ground_state);
  r.final_energy = exact_energy(psi, ctx.model);
  r.ground_energy = ctx.ground.energy;
  r.double_occupancy_error = std::abs(double_occupancy(psi) - ctx.ground_double_occupancy);
  r.sector = ctx.sector;
  r.U = ctx.model.U;
  r.converged = trace.converged;
  r.budget_exhausted = trace.budget_exhausted;
  if (!trace.points.empty()) {
    r.estimates = trace.last().estimates;
    r.measurements_used = trace.last().energy_measurements;
    r.circuit_evaluations = trace.last().circuit_evaluations;
  }
}

inline Json trace_point_json(const TracePoint& p, const VqeProblem& problem, const StateVector& gs) {
  const StateVector psi = problem.state(p.params);
  return Json{{"estimates", p.estimates},
              {"energy_measurements", p.energy_measurements},
              {"circuit_evaluations", p.circuit_evaluations},
              {"stage", p.stage},
              {"value", p.value},
              {"energy", exact_energy(psi, problem.spec().model)},
              {"infidelity", 1.0 - fidelity(psi, gs)}};
}

inline RunRecord base_record(const ExperimentConfig& cfg, const std::string& hash, int depth,
                             OptimizerKind opt, std::uint64_t seed) {
  RunRecord r;
  r.config_hash = hash;
  r.mode = to_string(cfg.mode);
  r.grid = cfg.grid();
  r.ansatz = to_string(cfg.ansatz);
  r.depth = depth;
  r.optimizer = to_string(opt);
  r.seed = seed;
  return r;
}

// Exact-energy L-BFGS from 1/L and then from `restarts` random starts; keeps
// the highest-fidelity result.
inline RunRecord exact_run(const ExperimentConfig& cfg, const std::string& hash,
                           const ProblemContext& ctx, int depth, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const VqeProblem problem(AnsatzSpec(cfg.ansatz, depth, ctx.model), ctx.initial);
  RandomSource rng(seed);
  std::optional<RunRecord> best;
  std::uint64_t evaluations = 0;
  for (int attempt = 0; attempt <= cfg.restarts; ++attempt) {
    const auto x0 = attempt == 0 ? default_parameters(problem.spec())
                                 : random_parameters(problem.spec(), rng);
    const auto trace = minimize_quasinewton_fd(problem.exact_objective(), x0, cfg.lbfgs);
    RunRecord r = base_record(cfg, hash, depth, OptimizerKind::LBFGS, seed);
    finish_record(r, ctx, problem, trace);
    evaluations += r.estimates;
    if (cfg.record_trace)
      for (const auto& p : trace.points) r.trace.push_back(trace_point_json(p, problem, ctx.ground_state));
    if (!best || r.final_fidelity > best->final_fidelity) best = std::move(r);
    if (best->final_fidelity >= cfg.target_fidelity) break;
  }
  best->estimates = evaluations;
  best->wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return *best;
}

// One sampled optimization (SPSA or CD) under the configured measurement and noise.
inline RunRecord sampled_run(const ExperimentConfig& cfg, const std::string& hash,
                             const ProblemContext& ctx, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const VqeProblem problem(AnsatzSpec(cfg.ansatz, cfg.layers, ctx.model), ctx.initial);
  RandomSource rng(seed);
  MeasurementConfig mc;
  mc.error_detection = cfg.error_detection;
  const NoiseModel noise(cfg.noise);
  std::uint64_t discards = 0;
  Objective f;
  f.dimension = problem.dimension();
  f.evaluate = [&](std::span<const double> x, std::uint64_t m) {
    MeasurementConfig c = mc;
    c.m = m;
    const auto e = problem.estimate(x, c, noise, rng);
    discards += e.discarded();
    return Evaluation{e.value, m, e.circuit_evaluations()};
  };
  const auto x0 = default_parameters(problem.spec());
  OptimizerTrace trace;
  if (cfg.optimizer == OptimizerKind::SPSA) {
    trace = minimize_spsa(f, x0, cfg.spsa, rng);
  } else {
    CoordinateDescentConfig cd = cfg.cd;
    cd.m = cfg.m;
    trace = minimize_cd(f, x0, problem.coordinates(), cd);
  }
  RunRecord r = base_record(cfg, hash, cfg.layers, cfg.optimizer, seed);
  finish_record(r, ctx, problem, trace);
  r.discards = discards;
  if (cfg.record_trace) {
    // Thin long traces to at most about 500 points, always keeping the last.
    const std::size_t n = trace.points.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 500);
    for (std::size_t k = 0; k < n; ++k)
      if (k % stride == 0 || k + 1 == n)
        r.trace.push_back(trace_point_json(trace.points[k], problem, ctx.ground_state));
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// Runs job(i) for i in [0, n) over a small thread pool, preserving order.
template <class T, class F>
std::vector<T> parallel_map(int n, int threads, F job) {
  std::vector<std::optional<T>> out(n);
  std::vector<std::exception_ptr> errors(n);
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(1, n));
  std::mutex mu;
  int next = 0;
  auto worker = [&] {
    for (;;) {
      int i;
      {
        std::lock_guard lock(mu);
        if (next >= n) return;
        i = next++;
      }
      try {
        out[i] = job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> result;
  for (auto& o : out) result.push_back(std::move(*o));
  return result;
}

}  // namespace detail

// Sweeps depth upward with exact energies until the target fidelity is met.
inline ExperimentResult run_represent(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto hash = config_hash(cfg);
  const bool half = cfg.mode == Mode::HalfFill;
  const auto ctx = detail::make_context(cfg.model(), cfg.sector, half, cfg.epsilon);
  ExperimentResult out;
  for (int depth = 1; depth <= cfg.max_layers; ++depth) {
    out.runs.push_back(detail::exact_run(cfg, hash, ctx, depth, cfg.seed));
    if (out.runs.back().final_fidelity >= cfg.target_fidelity) {
      if (!out.depth_to_target) out.depth_to_target = depth;
      if (!half) break;
    }
  }
  return out;
}

inline ExperimentResult run_halffill(const ExperimentConfig& cfg) { return run_represent(cfg); }

// Median-of-runs sampled optimization; noisy mode is the same run with noise.
inline ExperimentResult run_realistic(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto hash = config_hash(cfg);
  const auto ctx = detail::make_context(cfg.model(), cfg.sector, false, cfg.epsilon);
  ExperimentResult out;
  out.runs = detail::parallel_map<RunRecord>(cfg.runs, cfg.threads, [&](int i) {
    return detail::sampled_run(cfg, hash, ctx, cfg.seed + static_cast<std::uint64_t>(i));
  });
  return out;
}

inline ExperimentResult run_noisy(const ExperimentConfig& cfg) { return run_realistic(cfg); }

// Fixed-depth exact optimization for each U.
inline ExperimentResult run_usweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto hash = config_hash(cfg);
  ExperimentResult out;
  out.runs = detail::parallel_map<RunRecord>(static_cast<int>(cfg.u_values.size()), cfg.threads,
                                             [&](int i) {
    const auto model = HubbardModel::oriented(cfg.n_x, cfg.n_y, cfg.t, cfg.u_values[i]);
    const auto ctx = detail::make_context(model, cfg.sector, false, cfg.epsilon);
    return detail::exact_run(cfg, hash, ctx, cfg.layers, cfg.seed);
  });
  return out;
}

inline ExperimentResult run_resources(const ExperimentConfig& cfg) {
  std::ostringstream os;
  std::vector<InitialStateDepths> fft;
  for (int n : {4, 6, 8}) fft.push_back(initial_state_depth_comparison(n, n));
  if (cfg.n_x != cfg.n_y || (cfg.n_x != 4 && cfg.n_x != 6 && cfg.n_x != 8))
    fft.push_back(initial_state_depth_comparison(cfg.n_x, cfg.n_y));
  write_initial_state_csv(os, fft);
  std::vector<DepthReport> depths;
  if (std::min(cfg.n_x, cfg.n_y) >= 2)
    for (auto a : all_architectures()) depths.push_back(depth_report(a, cfg.n_x, cfg.n_y, cfg.layers));
  if (!depths.empty()) {
    os << "\n";
    write_depth_csv(os, depths);
  }
  os << "\ncrossover_limit," << crossover_limit() << "\n";
  ExperimentResult out;
  out.resources_csv = os.str();
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case Mode::Represent: return run_represent(cfg);
    case Mode::HalfFill: return run_halffill(cfg);
    case Mode::Realistic: return run_realistic(cfg);
    case Mode::Noisy: return run_noisy(cfg);
    case Mode::USweep: return run_usweep(cfg);
    case Mode::Resources: return run_resources(cfg);
  }
  throw InvalidArgument("unhandled mode");
}

// Writes one JSON file per run, appends to summary.csv, and for resources
// mode writes resources.csv. Returns the files written.
inline std::vector<std::string> write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  if (cfg.out_dir.empty()) return files;
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  if (cfg.mode == Mode::Resources) {
    const auto path = dir / "resources.csv";
    std::ofstream(path) << res.resources_csv;
    files.push_back(path.string());
    return files;
  }
  for (const auto& r : res.runs) {
    std::ostringstream name;
    name << r.mode << '_' << r.grid << '_' << r.ansatz << "_L" << r.depth << '_' << r.optimizer;
    if (cfg.mode == Mode::USweep) name << "_U" << r.U;
    name << "_s" << r.seed << ".json";
    const auto path = dir / name.str();
    Json doc = to_json(r);
    doc["config"] = to_json(cfg);
    std::ofstream(path) << doc.dump(2) << "\n";
    files.push_back(path.string());
  }
  const auto summary = dir / "summary.csv";
  const bool fresh = !fs::exists(summary);
  std::string block = fresh ? std::string(kSummaryHeader) + "\n" : std::string();
  for (const auto& r : res.runs) block += summary_row(r) + "\n";
  // A single write per experiment keeps concurrent appenders line-atomic in practice.
  if (std::FILE* f = std::fopen(summary.string().c_str(), "a")) {
    std::fwrite(block.data(), 1, block.size(), f);
    std::fclose(f);
  } else {
    throw Error("cannot append to " + summary.string());
  }
  files.push_back(summary.string());
  return files;
}

}  // namespace hvqe
