// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]; with no arguments all run.

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "hvqe/experiment.hpp"
#include "test_support.hpp"

using namespace hvqe;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Criterion = std::function<void(Outcome&)>;

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Least-squares line through (x, y): returns (slope, intercept).
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean_of(x), my = mean_of(y);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    num += (x[k] - mx) * (y[k] - my);
    den += (x[k] - mx) * (x[k] - mx);
  }
  return {num / den, my - num / den * mx};
}

Eigen::MatrixXcd group_generator(const TermGroup& group, int qubits) {
  const Mask dim = Mask{1} << qubits;
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(dim, dim);
  if (group.kind == TermKind::Onsite) {
    for (const auto& pr : group.pairs)
      for (Mask m = 0; m < dim; ++m)
        if (bit(m, pr.i) && bit(m, pr.j)) g(m, m) += 1.0;
    return g;
  }
  for (const auto& s : group_pauli_strings(group)) g += 0.5 * dense_matrix(s, qubits);
  return g;
}

// Represent sweeps shared by criteria 3, 4 and 5.
std::map<std::string, ExperimentResult>& represent_cache() {
  static std::map<std::string, ExperimentResult> cache;
  return cache;
}

const ExperimentResult& represent(int n_x, int n_y, int cap) {
  const std::string key = std::to_string(n_x) + "x" + std::to_string(n_y);
  auto& cache = represent_cache();
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  ExperimentConfig c;
  c.mode = Mode::Represent;
  c.n_x = n_x;
  c.n_y = n_y;
  c.max_layers = cap;
  c.record_trace = false;
  return cache.emplace(key, run_experiment(c)).first->second;
}

struct RepresentCase {
  int n_x, n_y, depth;
  double infidelity_bound;
};

const std::vector<RepresentCase> kRepresentCases = {
    {2, 2, 1, 0.0132}, {2, 3, 3, 0.0150}, {1, 6, 5, 0.0196}, {3, 3, 6, 0.0136}};

void criterion1(Outcome& o) {
  const HubbardModel two(LatticeGeometry(1, 2), 1.0, 2.0);
  const double e = exact_ground_state(two, {1, 1}).energy;
  const double err = std::abs(e - (1.0 - std::sqrt(5.0)));
  o.detail << "1x2 energy error " << err;
  o.check(err < 1e-10, "1x2 closed form");
  double worst = 0.0;
  int grids = 0;
  for (auto [nx, ny] : {std::pair{1, 2}, {2, 1}, {1, 3}, {3, 1}, {1, 4}, {4, 1}, {2, 2}}) {
    const HubbardModel m(LatticeGeometry(nx, ny), 1.0, 2.0);
    const Eigen::MatrixXd fock = testing_support::second_quantized_hubbard(m);
    const int n = m.sites();
    for (int up = 0; up <= n; ++up)
      for (int dn = 0; dn <= n; ++dn) {
        auto basis = std::make_shared<const SectorBasis>(m, OccupationSector{up, dn});
        const Eigen::MatrixXd h = SectorHamiltonian(m, basis).dense();
        for (std::size_t r = 0; r < basis->size(); ++r)
          for (std::size_t c = 0; c < basis->size(); ++c)
            worst = std::max(worst, std::abs(h(r, c) - fock(basis->mask(r), basis->mask(c))));
      }
    ++grids;
  }
  o.detail << "; sector vs second-quantized max deviation " << worst << " over " << grids
           << " grids";
  o.check(worst < 1e-12, "sector matrix deviation");
}

void criterion2(Outcome& o) {
  int cases = 0;
  for (int nx = 2; nx <= 6; ++nx)
    for (int ny : {2, 3, 4, 5, 6}) {
      const HubbardModel m(LatticeGeometry(nx, ny));
      const AnsatzSpec spec(AnsatzKind::EHV, 1, m);
      const int depth = static_cast<int>(circuit_depth(ansatz_circuit(spec, default_parameters(spec))));
      const int expected = nx % 2 == 0 ? 2 * nx + 1 : 2 * nx + 2;
      o.check(depth == expected, std::to_string(nx) + "x" + std::to_string(ny) + " depth " +
                                     std::to_string(depth));
      ++cases;
    }
  const int d4 = ansatz_depth_per_layer(Architecture::FullyConnected, 4);
  const int d5 = ansatz_depth_per_layer(Architecture::FullyConnected, 5);
  const int d6 = ansatz_depth_per_layer(Architecture::FullyConnected, 6);
  o.check(d4 == 9 && d5 == 12 && d6 == 13, "fully-connected table values");
  o.detail << cases << " constructed layers match; table 4->" << d4 << " 5->" << d5 << " 6->" << d6;
}

void criterion3(Outcome& o) {
  for (const auto& c : kRepresentCases) {
    const auto& res = represent(c.n_x, c.n_y, c.depth + 1);
    const int found = res.depth_to_target.value_or(-1);
    o.detail << c.n_x << "x" << c.n_y << "->" << found << " ";
    o.check(found == c.depth, std::to_string(c.n_x) + "x" + std::to_string(c.n_y) + " expected " +
                                  std::to_string(c.depth));
  }
}

void criterion4(Outcome& o) {
  for (const auto& c : kRepresentCases) {
    const auto& res = represent(c.n_x, c.n_y, c.depth + 1);
    double infid = 1.0;
    for (const auto& r : res.runs)
      if (r.depth == c.depth) infid = r.final_infidelity();
    o.detail << c.n_x << "x" << c.n_y << " " << infid << " (<= " << c.infidelity_bound << ") ";
    o.check(infid <= c.infidelity_bound, std::to_string(c.n_x) + "x" + std::to_string(c.n_y));
  }
}

void criterion5(Outcome& o) {
  const auto& res = represent(1, 6, 6);
  std::vector<double> infid(6, 1.0);
  for (const auto& r : res.runs)
    if (r.depth <= 5) infid[r.depth] = r.final_infidelity();
  int plateaus = 0;
  for (int d = 1; d <= 5; ++d) o.detail << "L" << d << "=" << infid[d] << " ";
  for (int d = 2; d <= 5; ++d) {
    if (infid[d] > infid[d - 1] * 1.001) o.check(false, "increase at depth " + std::to_string(d));
    if (infid[d] > infid[d - 1] * 0.9) ++plateaus;
  }
  o.check(plateaus <= 1, std::to_string(plateaus) + " plateaus");
}

void criterion6(Outcome& o) {
  const HubbardModel m(LatticeGeometry(2, 2));
  const EnergyEstimator est(m);
  RandomSource rng(606);
  const auto dists = est.distributions(exact_ground_state(m, {1, 1}).state());
  std::vector<double> xs, ys;
  for (std::uint64_t n : {100ull, 1000ull, 10000ull, 100000ull}) {
    MeasurementConfig cfg;
    cfg.m = n;
    std::vector<double> values;
    for (int k = 0; k < 2000; ++k) values.push_back(est.sample(dists, cfg, rng).value);
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(stddev_of(values)));
  }
  const auto [slope, intercept] = fit_line(xs, ys);
  const double prefactor = std::exp(intercept);
  o.detail << "fit " << prefactor << " * m^" << slope;
  o.check(std::abs(slope + 0.5) <= 0.05, "slope");
  o.check(prefactor >= 0.5 && prefactor <= 2.5, "prefactor");
}

void criterion7(Outcome& o) {
  for (auto [nx, ny, depth] : {std::tuple{2, 2, 1}, {2, 3, 3}}) {
    const double bound = depth == 1 ? 0.02 : 0.04;
    for (auto opt : {OptimizerKind::SPSA, OptimizerKind::CD}) {
      ExperimentConfig c;
      c.mode = Mode::Realistic;
      c.n_x = nx;
      c.n_y = ny;
      c.layers = depth;
      c.optimizer = opt;
      c.runs = 5;
      c.record_trace = false;
      const auto s = summarize_infidelity(run_experiment(c).runs);
      o.detail << nx << "x" << ny << " " << to_string(opt) << " median " << s.median << " ";
      o.check(s.median <= bound, std::to_string(nx) + "x" + std::to_string(ny) + " " + to_string(opt));
    }
  }
}

void criterion8(Outcome& o) {
  // Median-of-3 noisy optimization with error detection.
  for (auto opt : {OptimizerKind::SPSA, OptimizerKind::CD}) {
    ExperimentConfig c;
    c.mode = Mode::Noisy;
    c.optimizer = opt;
    c.noise = 1e-3;
    c.error_detection = true;
    c.runs = 3;
    c.record_trace = false;
    const auto res = run_experiment(c);
    const auto s = summarize_infidelity(res.runs);
    std::uint64_t discards = 0;
    for (const auto& r : res.runs) discards += r.discards;
    o.detail << "2x2 " << to_string(opt) << " ED median " << s.median << " (" << discards
             << " discards); ";
    o.check(s.median <= 0.03, "noisy " + to_string(opt));
  }

  // Discard fraction against directly counted weight-changing trajectories.
  RandomSource rng(808);
  const HubbardModel m(LatticeGeometry(2, 2));
  const AnsatzSpec spec(AnsatzKind::EHV, 1, m);
  const auto inst = full_circuit(spec, default_parameters(spec), InitialStateSpec::noninteracting({1, 1}));
  const EnergyEstimator est(m);
  const double p = 1e-3;
  MeasurementConfig cfg;
  cfg.m = 100000;
  cfg.error_detection = true;
  const auto e = est.sample_noisy(inst.initial, inst.circuit, NoiseModel(p), cfg, rng);
  double hits = 0.0;
  std::uint64_t draws = 0;
  for (std::size_t k = 0; k < est.settings().size(); ++k) {
    const Circuit measured = est.measured_circuit(inst.circuit, k);
    for (int i = 0; i < 20000; ++i, ++draws) {
      const auto events = draw_noise(noise_slot_count(measured), p, rng);
      const auto out = run_circuit(inst.initial, measured, events);
      hits += popcount(Distribution::of(out).sample(1, rng).front()) != 2;
    }
  }
  const double f_est = static_cast<double>(e.discarded()) / static_cast<double>(e.circuit_evaluations());
  const double f_count = hits / static_cast<double>(draws);
  const double sigma = std::sqrt(f_count * (1 - f_count) / static_cast<double>(draws) +
                                 f_est * (1 - f_est) / static_cast<double>(e.circuit_evaluations()));
  o.detail << "discard fraction " << f_est << " vs counted " << f_count << " (sigma " << sigma << "); ";
  o.check(std::abs(f_est - f_count) <= 3 * sigma, "discard fraction");

  // Every sample kept by the filter has the right weight.
  std::vector<Mask> shots;
  for (int i = 0; i < 5000; ++i) {
    const auto out = run_circuit(inst.initial, inst.circuit, NoiseModel(0.05), rng);
    shots.push_back(Distribution::of(out).sample(1, rng).front());
  }
  const auto filtered = error_detect_filter(shots, 2);
  bool all_right = filtered.discarded > 0;
  for (Mask s : filtered.kept) all_right = all_right && popcount(s) == 2;
  o.detail << "filter kept " << filtered.kept.size() << "/" << shots.size() << "; ";
  o.check(all_right, "filter weight property");

  // Trajectory averages against the depolarizing channel on two qubits.
  double worst_z = 0.0;
  const double q = 0.15;
  const int n = 40000;
  RandomSource rng2(809);
  for (int trial = 0; trial < 4; ++trial) {
    Circuit c(2);
    const double a = rng2.uniform(0, kPi);
    c.add_moment({Gate::single(0, {std::cos(a), -std::sin(a), std::sin(a), std::cos(a)})});
    c.add_moment({Gate::number_preserving(0, 1, rng2.uniform(-kPi, kPi), rng2.uniform(-kPi, kPi))});
    const StateVector start = StateVector::basis(2, trial % 2 ? 0b10 : 0b01);
    Eigen::Vector4cd psi = testing_support::to_eigen(run_circuit(start, c));
    Eigen::Matrix4cd rho = psi * psi.adjoint();
    for (int qubit = 0; qubit < 2; ++qubit) {
      Eigen::Matrix4cd next = (1 - q) * rho;
      for (Pauli pp : {Pauli::X, Pauli::Y, Pauli::Z}) {
        Circuit pc(2);
        pc.add_moment({Gate::pauli(qubit, pp)});
        const Eigen::MatrixXcd u = circuit_unitary(pc);
        next += (q / 3) * u * rho * u.adjoint();
      }
      rho = next;
    }
    for (const PauliTerm& obs : {PauliTerm{1.0, {{0, Pauli::X}, {1, Pauli::Y}}},
                                 PauliTerm{1.0, {{0, Pauli::Z}}},
                                 PauliTerm{1.0, {{0, Pauli::X}, {1, Pauli::X}}}}) {
      const double exact = (dense_matrix(obs, 2) * rho).trace().real();
      double acc = 0.0;
      RandomSource traj(900 + trial);
      for (int k = 0; k < n; ++k)
        acc += pauli_expectation(run_circuit(start, c, NoiseModel(q), traj), obs.x_mask(),
                                 obs.z_mask(), obs.y_count());
      worst_z = std::max(worst_z, std::abs(acc / n - exact) * std::sqrt(double(n)));
    }
  }
  o.detail << "trajectory vs channel worst |z| " << worst_z;
  o.check(worst_z < 4.5, "trajectory-channel agreement");
}

void criterion9(Outcome& o) {
  RandomSource rng(909);
  double worst = 0.0;
  auto probe_parameter = [&](const VqeProblem& problem, std::size_t index, int degree, double unit) {
    std::vector<double> x(problem.dimension());
    for (auto& v : x) v = rng.uniform(-1, 1);
    std::vector<double> samples;
    for (double t : TrigPolynomial::nodes(degree)) {
      x[index] = t / unit;
      samples.push_back(problem.energy(x));
    }
    const auto poly = fit_trig_polynomial(degree, samples);
    for (int k = 0; k < 20; ++k) {
      const double t = rng.uniform(-kPi, kPi);
      x[index] = t / unit;
      worst = std::max(worst, std::abs(poly(t) - problem.energy(x)));
    }
  };
  const HubbardModel m(LatticeGeometry(2, 3));
  const VqeProblem np(AnsatzSpec(AnsatzKind::NP, 1, m), InitialStateSpec::noninteracting({2, 2}));
  const auto np_coords = np.coordinates();
  // An NP hopping theta has degree 2.
  std::size_t theta_index = 0;
  while (np_coords[theta_index].degree != 2) theta_index += 2;
  probe_parameter(np, theta_index, 2, np_coords[theta_index].unit);
  const VqeProblem ehv(AnsatzSpec(AnsatzKind::EHV, 2, m), InitialStateSpec::noninteracting({2, 2}));
  const auto coords = ehv.coordinates();
  int max_degree = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    probe_parameter(ehv, i, coords[i].degree, coords[i].unit);
    max_degree = std::max(max_degree, coords[i].degree);
  }
  o.detail << "NP theta D=2 and " << coords.size() << " shared EHV parameters (max D=" << max_degree
           << "); worst deviation " << worst;
  o.check(worst < 1e-8, "trig fit deviation");
}

void criterion10(Outcome& o) {
  const std::map<int, std::array<int, 3>> expected = {
      {4, {82, 27, 15}}, {6, {126, 65, 35}}, {8, {170, 119, 63}}};
  for (const auto& [n, cols] : expected) {
    const auto r = initial_state_depth_comparison(n, n);
    o.detail << n << "x" << n << " " << r.predicted << "/" << r.modified_swap_network << "/"
             << r.givens << " ";
    o.check(r.predicted == cols[0] && r.modified_swap_network == cols[1] && r.givens == cols[2],
            std::to_string(n) + "x" + std::to_string(n) + " table row");
  }
  const int limit = crossover_limit();
  o.detail << "crossover n<=" << limit << " ";
  o.check(limit == 11 && crossover_condition(11) && !crossover_condition(12), "crossover");
  const auto formula = total_gate_count(2, 4, 2);
  const auto built = constructed_gate_count(HubbardModel(LatticeGeometry(2, 4)), 2);
  o.detail << "2x4 L=2 formula " << formula << ", construction " << built.total();
  o.check(formula == 144 && formula >= 136, "gate formula");
  o.check(built.total() <= 136, "construction count");
}

void criterion11(Outcome& o) {
  RandomSource rng(1111);
  // Number conservation for every ansatz kind.
  bool conserved = true;
  for (auto [nx, ny] : {std::pair{2, 2}, {2, 3}, {3, 2}, {1, 5}})
    for (auto kind : {AnsatzKind::HV, AnsatzKind::EHV, AnsatzKind::NP}) {
      const HubbardModel m(LatticeGeometry(nx, ny));
      const AnsatzSpec spec(kind, 2, m);
      std::vector<double> p(spec.parameter_count());
      for (auto& v : p) v = rng.uniform(-kPi, kPi);
      auto init = initial_state(m, InitialStateSpec::top_corner({2, 1}));
      init.widen_to_full();
      const auto out = run_circuit(init, ansatz_circuit(spec, p));
      double leak = 0.0;
      for (Mask b = 0; b < out.dimension(); ++b) {
        const int up = popcount(b & range_mask(0, m.sites()));
        const int dn = popcount(b >> m.sites());
        // NP onsite gates may exchange spins, so only the total is fixed there.
        const bool ok = kind == AnsatzKind::NP ? up + dn == 3 : (up == 2 && dn == 1);
        if (!ok) leak += std::norm(out.amplitudes()[b]);
      }
      if (!(leak < 1e-20)) o.detail << to_string(kind) << " " << nx << "x" << ny << " leak " << leak << "; ";
      conserved = conserved && leak < 1e-20;
    }
  o.check(conserved, "number conservation");

  // Commutation inside every measurement/evolution group.
  bool commuting = true;
  for (int nx = 1; nx <= 4; ++nx)
    for (int ny = 2; ny <= 4; ++ny)
      for (const auto& g : group_commuting_terms(HubbardModel(LatticeGeometry(nx, ny))))
        commuting = commuting && group_commutes(g);
  o.check(commuting, "group commutation");

  // Swap-network layers against dense group exponentials on 2x2.
  double dense_dev = 0.0;
  {
    const HubbardModel m(LatticeGeometry(2, 2));
    const auto groups = group_commuting_terms(m);
    for (int trial = 0; trial < 3; ++trial) {
      const AnsatzSpec spec(AnsatzKind::EHV, 2, m);
      std::vector<double> p(spec.parameter_count());
      for (auto& v : p) v = rng.uniform(-1.5, 1.5);
      Eigen::MatrixXcd expected = Eigen::MatrixXcd::Identity(256, 256);
      const auto order = spec.ordering();
      for (int l = 0; l < spec.layers; ++l)
        for (std::size_t k = 0; k < order.size(); ++k) {
          const TermGroup* group = nullptr;
          for (const auto& g : groups)
            if (g.kind == order[k]) group = &g;
          const double angle = order[k] == TermKind::Onsite ? m.U * p[l * order.size() + k]
                                                            : -m.t * p[l * order.size() + k];
          expected = (Complex(0, angle) * group_generator(*group, 8)).exp() * expected;
        }
      dense_dev = std::max(dense_dev, testing_support::phase_distance(
                                          circuit_unitary(ansatz_circuit(spec, p)), expected));
    }
  }
  o.check(dense_dev < 1e-10, "swap network vs dense exponential");

  // Single-fermion states stay in the null space of the free Hamiltonian.
  double null_dev = 0.0;
  for (auto [nx, ny] : {std::pair{2, 3}, {3, 3}, {1, 5}}) {
    const HubbardModel free(LatticeGeometry(nx, ny), 1.0, 0.0);
    const auto h = jordan_wigner_encode(free);
    const AnsatzSpec spec(AnsatzKind::NP, 2, free);
    std::vector<double> p;
    for (int l = 0; l < spec.layers; ++l)
      for (const auto& in : layer_interactions(free.geometry)) {
        p.push_back(in.kind == TermKind::Onsite ? 0.0 : rng.uniform(-kPi, kPi));
        p.push_back(rng.uniform(-kPi, kPi));
      }
    for (int mode = 0; mode < free.sites(); ++mode) {
      const auto inst = full_circuit(spec, p, InitialStateSpec::explicit_modes({mode}, {1, 0}));
      null_dev = std::max(null_dev, std::abs(expectation_exact(inst.initial, h)));
      null_dev = std::max(null_dev,
                          std::abs(expectation_exact(ansatz_state(inst.initial, inst.circuit), h)));
    }
  }
  o.check(null_dev < 1e-10, "null-space preservation");

  // Number-preserving gates commute with Z x Z.
  double zz_dev = 0.0;
  Eigen::Matrix4cd zz = Eigen::Matrix4cd::Zero();
  for (int b = 0; b < 4; ++b) zz(b, b) = std::popcount(unsigned(b)) == 1 ? -1.0 : 1.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double th = rng.uniform(-kPi, kPi), ph = rng.uniform(-kPi, kPi);
    for (const Gate& g : {Gate::number_preserving(0, 1, th, ph), Gate::fswap(0, 1),
                          fused_fswap_number_preserving(0, 1, th, ph)}) {
      const Eigen::Matrix4cd u = to_eigen(g.matrix());
      zz_dev = std::max(zz_dev, (u.adjoint() * zz * u - zz).cwiseAbs().maxCoeff());
    }
  }
  o.check(zz_dev < 1e-12, "U^dagger ZZ U = ZZ");
  o.detail << "swap-vs-dense " << dense_dev << ", null-space " << null_dev << ", ZZ " << zz_dev;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Criterion>> criteria = {
      {"oracle exactness", criterion1},
      {"depth formulas vs construction", criterion2},
      {"depth to 0.99 fidelity", criterion3},
      {"exact-measurement final infidelities", criterion4},
      {"infidelity decreases with depth on 1x6", criterion5},
      {"statistical-error scaling", criterion6},
      {"realistic optimization", criterion7},
      {"noisy runs and error detection", criterion8},
      {"coordinate-descent premise", criterion9},
      {"resource tables", criterion10},
      {"property suites", criterion11},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << number << " (" << criteria[i].first
              << "): " << o.detail.str() << " [" << std::fixed << std::setprecision(1) << secs
              << "s]" << std::defaultfloat << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
