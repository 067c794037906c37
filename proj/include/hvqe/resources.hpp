// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "hvqe/ansatz.hpp"
#include "hvqe/measurement.hpp"

namespace hvqe {

enum class Architecture {
  FullyConnected,
  // Spin-up and spin-down rows alternate on an n_x by 2n_y lattice.
  NearestNeighbourInterlaced,
  // The two spin planes sit side by side.
  NearestNeighbourSeparated,
  // The nearest-neighbour headline figures quoted alongside the other
  // architectures; one lower than the interlaced count for even n_x.
  NearestNeighbourTabulated,
  Sycamore,
};

inline const std::vector<Architecture>& all_architectures() {
  static const std::vector<Architecture> all = {
      Architecture::FullyConnected, Architecture::NearestNeighbourInterlaced,
      Architecture::NearestNeighbourSeparated, Architecture::NearestNeighbourTabulated,
      Architecture::Sycamore};
  return all;
}

inline std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::FullyConnected: return "fully-connected";
    case Architecture::NearestNeighbourInterlaced: return "nearest-neighbour-interlaced";
    case Architecture::NearestNeighbourSeparated: return "nearest-neighbour-separated";
    case Architecture::NearestNeighbourTabulated: return "nearest-neighbour-tabulated";
    case Architecture::Sycamore: return "sycamore";
  }
  return "unknown";
}

// Short statement of the depth rule, carried into reports.
inline std::string depth_rule(Architecture a) {
  switch (a) {
    case Architecture::FullyConnected: return "2n_x+1 (even) / 2n_x+2 (odd)";
    case Architecture::NearestNeighbourInterlaced: return "4n_x+1";
    case Architecture::NearestNeighbourSeparated: return "4n_x-1 (even) / 4n_x (odd)";
    case Architecture::NearestNeighbourTabulated: return "4n_x (even) / 4n_x+1 (odd)";
    case Architecture::Sycamore: return "6n_x+1 (even) / 6n_x+2 (odd)";
  }
  return "";
}

// Width that minimizes the depth rules; a lattice can be transposed so the
// swap network runs along its shorter side.
inline int normalized_width(const LatticeGeometry& g) { return std::min(g.n_x(), g.n_y()); }

inline int ansatz_depth_per_layer(Architecture a, int n_x) {
  require(n_x >= 2, "depth rules need n_x >= 2, got " + std::to_string(n_x));
  const bool even = n_x % 2 == 0;
  switch (a) {
    case Architecture::FullyConnected: return 2 * n_x + (even ? 1 : 2);
    case Architecture::NearestNeighbourInterlaced: return 4 * n_x + 1;
    case Architecture::NearestNeighbourSeparated: return 4 * n_x - (even ? 1 : 0);
    case Architecture::NearestNeighbourTabulated: return 4 * n_x + (even ? 0 : 1);
    case Architecture::Sycamore: return 6 * n_x + (even ? 1 : 2);
  }
  return 0;
}

// Upper bound on two-qubit gates preparing a Slater determinant on both spin planes.
inline std::int64_t initial_state_gate_bound(int n_x, int n_y) {
  const std::int64_t n = std::int64_t{n_x} * n_y;
  return 2 * (n - 1) * (n / 2);
}

// Upper bound on two-qubit gates for preparation, L fully-connected layers
// and the final measurement basis change.
inline std::int64_t total_gate_count(int n_x, int n_y, int layers) {
  require(layers >= 1, "layer count must be at least 1");
  require(n_x >= 1 && n_y >= 1, "grid dimensions must be positive");
  const std::int64_t n = std::int64_t{n_x} * n_y;
  const std::int64_t per_step = n_x % 2 == 0 ? 2 * n_x + 1 : 2 * n_x + 2;
  const std::int64_t prep = n_x % 2 == 0 ? (n - 1) * n : 2 * (n - 1) * (n / 2);
  return prep + per_step * n * layers + n;
}

struct GateCount {
  std::int64_t initial_state = 0;
  std::int64_t ansatz = 0;
  std::int64_t measurement = 0;
  std::int64_t total() const { return initial_state + ansatz + measurement; }
};

// Counts two-qubit gates in the constructed EHV circuit and its widest
// measurement basis change; the preparation term uses the Givens bound.
inline GateCount constructed_gate_count(const HubbardModel& model, int layers) {
  const AnsatzSpec spec(AnsatzKind::EHV, layers, model);
  const auto params = default_parameters(spec);
  GateCount out;
  const auto& g = model.geometry;
  out.initial_state = initial_state_gate_bound(g.n_x(), g.n_y());
  out.ansatz = static_cast<std::int64_t>(ansatz_circuit(spec, params).two_qubit_gate_count());
  for (const auto& s : build_measurement_settings(model)) {
    std::int64_t n = 0;
    for (const auto& gate : s.basis_change()) n += gate.is_two_qubit();
    out.measurement = std::max(out.measurement, n);
  }
  return out;
}

struct DepthReport {
  Architecture architecture = Architecture::FullyConnected;
  int n_x = 0, n_y = 0, layers = 0;
  int layer_depth = 0;
  int initial_state_depth = 0;
  int measurement_depth = 0;
  std::int64_t gate_bound = 0;
  std::string rule;
  int total_depth() const { return initial_state_depth + layers * layer_depth + measurement_depth; }
};

// Depth report with a Givens-network preparation (depth N-1) and a single
// basis-change layer before readout.
inline DepthReport depth_report(Architecture a, int n_x, int n_y, int layers) {
  require(layers >= 1, "layer count must be at least 1");
  DepthReport r;
  r.architecture = a;
  r.n_x = n_x;
  r.n_y = n_y;
  r.layers = layers;
  const int w = std::min(n_x, n_y);
  r.layer_depth = ansatz_depth_per_layer(a, w);
  r.initial_state_depth = n_x * n_y - 1;
  r.measurement_depth = 1;
  r.gate_bound = total_gate_count(w, std::max(n_x, n_y), layers);
  r.rule = depth_rule(a);
  return r;
}

// Depth of a one-dimensional fermionic Fourier transform on n modes.
using FourierDepth = std::function<int(int)>;

inline int default_fourier_depth(int n) { return n - 1; }

struct InitialStateDepths {
  int n_x = 0, n_y = 0;
  int naive = 0;
  int predicted = 0;
  int modified_swap_network = 0;
  int givens = 0;
};

inline InitialStateDepths initial_state_depth_comparison(int n_x, int n_y,
                                                         const FourierDepth& t_f = default_fourier_depth) {
  require(n_x >= 1 && n_y >= 1, "grid dimensions must be positive");
  InitialStateDepths d;
  d.n_x = n_x;
  d.n_y = n_y;
  d.naive = t_f(n_x) + t_f(n_y) * n_x * n_x;
  d.predicted = t_f(n_x) + t_f(n_y) + 2 * (8 * n_x + 2 * n_y - 2);
  d.modified_swap_network = t_f(n_x) + 2 * n_x * t_f(n_y);
  d.givens = n_x * n_y - 1;
  return d;
}

// True when the modified swap network beats the asymptotically efficient
// construction on an n by n grid.
inline bool crossover_condition(int n, const FourierDepth& t_f = default_fourier_depth) {
  require(n >= 1, "grid size must be positive");
  return (2 * n - 1) * t_f(n) < 20 * n - 4;
}

// Largest n in [1, limit] for which the condition holds on every smaller grid.
inline int crossover_limit(int limit = 64, const FourierDepth& t_f = default_fourier_depth) {
  int n = 0;
  while (n < limit && crossover_condition(n + 1, t_f)) ++n;
  return n;
}

// CSV with columns grid,column,value,rule.
inline void write_initial_state_csv(std::ostream& out, const std::vector<InitialStateDepths>& rows) {
  out << "grid,column,value,rule\n";
  for (const auto& r : rows) {
    const std::string grid = std::to_string(r.n_x) + "x" + std::to_string(r.n_y);
    out << grid << ",naive," << r.naive << ",T_F(n_x)+T_F(n_y)*n_x^2\n";
    out << grid << ",predicted," << r.predicted << ",T_F(n_x)+T_F(n_y)+2(8n_x+2n_y-2)\n";
    out << grid << ",modified," << r.modified_swap_network << ",T_F(n_x)+2n_x*T_F(n_y)\n";
    out << grid << ",givens," << r.givens << ",n_x*n_y-1\n";
  }
}

// CSV with columns grid,column,value,rule.
inline void write_depth_csv(std::ostream& out, const std::vector<DepthReport>& rows) {
  out << "grid,column,value,rule\n";
  for (const auto& r : rows) {
    const std::string grid = std::to_string(r.n_x) + "x" + std::to_string(r.n_y);
    out << grid << "," << to_string(r.architecture) << "_layer_depth," << r.layer_depth << ","
        << r.rule << "\n";
    out << grid << "," << to_string(r.architecture) << "_total_depth," << r.total_depth()
        << ",N-1+L*layer+1\n";
    out << grid << "," << to_string(r.architecture) << "_gate_bound," << r.gate_bound
        << ",prep+per_step*N*L+N\n";
  }
}

}  // namespace hvqe
