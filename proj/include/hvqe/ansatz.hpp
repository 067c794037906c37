// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "hvqe/common.hpp"
#include "hvqe/model.hpp"
#include "hvqe/oracle.hpp"
#include "hvqe/simulator.hpp"

namespace hvqe {

enum class AnsatzKind { HV, EHV, NP };

inline const char* to_string(AnsatzKind k) {
  switch (k) {
    case AnsatzKind::HV: return "hv";
    case AnsatzKind::EHV: return "ehv";
    case AnsatzKind::NP: return "np";
  }
  return "?";
}

inline AnsatzKind parse_ansatz_kind(const std::string& s) {
  if (s == "hv" || s == "HV") return AnsatzKind::HV;
  if (s == "ehv" || s == "EHV") return AnsatzKind::EHV;
  if (s == "np" || s == "NP") return AnsatzKind::NP;
  throw InvalidArgument("unknown ansatz '" + s + "' (expected hv, ehv or np)");
}

struct AnsatzSpec {
  AnsatzKind kind = AnsatzKind::EHV;
  int layers = 1;
  HubbardModel model;

  AnsatzSpec() = default;
  AnsatzSpec(AnsatzKind k, int l, HubbardModel m) : kind(k), layers(l), model(std::move(m)) {
    require(layers >= 1, "ansatz needs at least one layer, got " + std::to_string(layers));
  }

  const LatticeGeometry& geometry() const { return model.geometry; }

  // Nonempty term groups in application order: (O, V1, V2) on single columns,
  // (O, H, V1, V2) on two columns, (O, H1, V1, V2, H2) otherwise.
  std::vector<TermKind> ordering() const {
    const int nx = geometry().n_x(), ny = geometry().n_y();
    std::vector<TermKind> out{TermKind::Onsite};
    if (nx >= 2) out.push_back(TermKind::H1);
    if (ny >= 2) out.push_back(TermKind::V1);
    if (ny >= 3) out.push_back(TermKind::V2);
    if (nx >= 3) out.push_back(TermKind::H2);
    return out;
  }

  // Grids wider than three columns reuse the three-column ordering.
  bool extrapolated_ordering() const { return geometry().n_x() >= 4; }

  int parameters_per_layer() const {
    if (kind == AnsatzKind::NP) {
      const int nx = geometry().n_x(), ny = geometry().n_y();
      return 10 * nx * ny - 4 * nx - 4 * ny;
    }
    return static_cast<int>(ordering().size());
  }

  int parameter_count() const { return parameters_per_layer() * layers; }
};

inline int parameter_count(AnsatzKind kind, const LatticeGeometry& g, int layers) {
  return AnsatzSpec(kind, layers, HubbardModel(g)).parameter_count();
}

// Column-swap network. orders[r][c] is the original column at position c after
// r applications of U_R U_L; exposed[r-1] lists the vertical bonds (lower
// site given) that are JW-adjacent in configuration r.
struct SwapNetworkSchedule {
  int n_x = 0;
  int n_y = 0;
  std::vector<std::vector<int>> orders;
  std::vector<std::vector<Site>> exposed;

  int repetitions() const { return static_cast<int>(exposed.size()); }

  // Original column at the left (rows y odd) and right (rows y even) edge.
  int left_edge(int r) const { return orders.at(r).front(); }
  int right_edge(int r) const { return orders.at(r).back(); }
};

namespace detail {

// Swaps positions (c, c+1) for c = first, first+2, ...
inline void swap_columns(std::vector<int>& order, int first) {
  for (std::size_t c = first; c + 1 < order.size(); c += 2) std::swap(order[c], order[c + 1]);
}

// Vertical bonds exposed at the edges for a given column order.
inline std::vector<Site> edge_bonds(int n_y, int left, int right, bool use_left, bool use_right) {
  std::vector<Site> out;
  for (int y = 0; y + 1 < n_y; ++y) {
    if (y % 2 == 0 && use_right) out.push_back({right, y});
    if (y % 2 == 1 && use_left) out.push_back({left, y});
  }
  return out;
}

}  // namespace detail

inline SwapNetworkSchedule swap_network(const LatticeGeometry& g) {
  if (g.n_x() < 2)
    throw InvalidArgument("swap network needs at least two columns, got " + g.label());
  SwapNetworkSchedule s;
  s.n_x = g.n_x();
  s.n_y = g.n_y();
  std::vector<int> order(g.n_x());
  std::iota(order.begin(), order.end(), 0);
  s.orders.push_back(order);
  for (int r = 1; r <= g.n_x(); ++r) {
    detail::swap_columns(order, 0);
    detail::swap_columns(order, 1);
    s.orders.push_back(order);
    s.exposed.push_back(detail::edge_bonds(g.n_y(), order.front(), order.back(), true, true));
  }
  return s;
}

// A two-body interaction of the lattice: an onsite pair (a == b) or a
// hopping bond from a to b within one spin plane.
struct Interaction {
  TermKind kind = TermKind::Onsite;
  Spin spin = Spin::Up;
  Site a;
  Site b;
};

inline TermKind bond_kind(Site a, Site b) {
  const Site lo{std::min(a.x, b.x), std::min(a.y, b.y)};
  if (a.y == b.y) return lo.x % 2 == 0 ? TermKind::H1 : TermKind::H2;
  return lo.y % 2 == 0 ? TermKind::V1 : TermKind::V2;
}

// Angles (theta, phi) of the U_NP gate realizing an interaction.
struct GateAngles {
  double theta = 0.0;
  double phi = 0.0;
};

namespace detail {

inline int network_qubit(const LatticeGeometry& g, int position, int y, Spin s) {
  const int nx = g.n_x();
  return static_cast<int>(s) * g.sites() + y * nx + (y % 2 == 0 ? position : nx - 1 - position);
}

template <class Angles>
void add_onsite_moment(Circuit& c, const LatticeGeometry& g, Angles& angles) {
  std::vector<Gate> gates;
  for (int p = 0; p < g.sites(); ++p) {
    const Site s = g.site_at(p);
    const GateAngles a = angles(Interaction{TermKind::Onsite, Spin::Up, s, s});
    gates.push_back(Gate::number_preserving(p, p + g.sites(), a.theta, a.phi));
  }
  c.add_moment(std::move(gates));
}

template <class Angles>
void add_edge_verticals(std::vector<Gate>& gates, const LatticeGeometry& g,
                        const std::vector<int>& order, bool left, bool right, Angles& angles) {
  const int nx = g.n_x();
  for (int s = 0; s < 2; ++s) {
    const auto spin = static_cast<Spin>(s);
    for (const Site lo : edge_bonds(g.n_y(), order.front(), order.back(), left, right)) {
      const int pos = lo.y % 2 == 0 ? nx - 1 : 0;
      const GateAngles a = angles(Interaction{bond_kind(lo, {lo.x, lo.y + 1}), spin, lo,
                                              Site{lo.x, lo.y + 1}});
      gates.push_back(Gate::number_preserving(network_qubit(g, pos, lo.y, spin),
                                              network_qubit(g, pos, lo.y + 1, spin), a.theta,
                                              a.phi));
    }
  }
}

// Swaps positions (c, c+1), c = first, first+2, ..., in every row of both
// planes; when fuse is set each swap also applies the hopping between the
// columns it exchanges.
template <class Angles>
void add_swap_gates(std::vector<Gate>& gates, const LatticeGeometry& g,
                    const std::vector<int>& order, int first, bool fuse, Angles& angles) {
  for (int s = 0; s < 2; ++s) {
    const auto spin = static_cast<Spin>(s);
    for (int y = 0; y < g.n_y(); ++y) {
      for (int c = first; c + 1 < g.n_x(); c += 2) {
        const int q0 = network_qubit(g, c, y, spin), q1 = network_qubit(g, c + 1, y, spin);
        if (!fuse) {
          gates.push_back(Gate::fswap(q0, q1));
          continue;
        }
        const Site a{std::min(order[c], order[c + 1]), y}, b{a.x + 1, y};
        require(std::abs(order[c] - order[c + 1]) == 1, "fused swap on non-adjacent columns");
        const GateAngles ang = angles(Interaction{bond_kind(a, b), spin, a, b});
        gates.push_back(fused_fswap_number_preserving(q0, q1, ang.theta, ang.phi));
      }
    }
  }
}

// One layer realized with the column-swap network: onsite gates, then n_x
// rounds of U_L and U_R with horizontal hopping folded into the first U_L and
// last U_R and vertical hopping applied at the edge columns.
template <class Angles>
Circuit network_layer(const LatticeGeometry& g, Angles&& angles) {
  Circuit c(g.modes());
  add_onsite_moment(c, g, angles);
  const int nx = g.n_x();
  if (nx == 1) {
    for (int parity : {0, 1}) {
      std::vector<Gate> gates;
      for (int s = 0; s < 2; ++s) {
        const auto spin = static_cast<Spin>(s);
        for (int y = parity; y + 1 < g.n_y(); y += 2) {
          const Site a{0, y}, b{0, y + 1};
          const GateAngles ang = angles(Interaction{bond_kind(a, b), spin, a, b});
          gates.push_back(Gate::number_preserving(g.mode_index(a, spin), g.mode_index(b, spin),
                                                  ang.theta, ang.phi));
        }
      }
      if (!gates.empty()) c.add_moment(std::move(gates));
    }
    return c;
  }
  const bool odd = nx % 2 == 1;
  std::vector<int> order(nx);
  std::iota(order.begin(), order.end(), 0);
  for (int r = 1; r <= nx; ++r) {
    std::vector<Gate> left;
    if (odd && r >= 2) add_edge_verticals(left, g, order, false, true, angles);
    add_swap_gates(left, g, order, 0, r == 1, angles);
    swap_columns(order, 0);
    c.add_moment(std::move(left));

    std::vector<Gate> right;
    add_swap_gates(right, g, order, 1, r == nx, angles);
    swap_columns(order, 1);
    add_edge_verticals(right, g, order, true, !odd, angles);
    if (!right.empty()) c.add_moment(std::move(right));
  }
  if (odd) {
    std::vector<Gate> last;
    add_edge_verticals(last, g, order, false, true, angles);
    if (!last.empty()) c.add_moment(std::move(last));
  }
  return c;
}

// exp(i theta (XX+YY)/2 Z...Z) on modes i < j: the Z-string parity is
// accumulated on qubit j-1 and used to flip the rotation sign on qubit i.
inline void append_string_rotation(Circuit& c, int i, int j, double theta) {
  if (j == i + 1) {
    c.append_packed(Gate::number_preserving(i, j, theta, 0.0));
    return;
  }
  for (int k = i + 1; k + 1 < j; ++k) c.append_packed(Gate::cnot(k, k + 1));
  c.append_packed(Gate::cz(j - 1, i));
  c.append_packed(Gate::number_preserving(i, j, theta, 0.0));
  c.append_packed(Gate::cz(j - 1, i));
  for (int k = j - 2; k >= i + 1; --k) c.append_packed(Gate::cnot(k, k + 1));
}

}  // namespace detail

// Angle assignment for the shared-parameter ansätze: U_NP(0, U p) on onsite
// pairs and U_NP(-t p, 0) on hopping pairs of the group.
inline GateAngles group_angles(const HubbardModel& m, TermKind kind, double p) {
  if (kind == TermKind::Onsite) return {0.0, m.U * p};
  return {-m.t * p, 0.0};
}

// Maps a layer's shared parameters, ordered as in AnsatzSpec::ordering(), to groups.
inline std::vector<std::pair<TermKind, double>> layer_group_values(const AnsatzSpec& spec,
                                                                   std::span<const double> p) {
  const auto order = spec.ordering();
  require(p.size() == order.size(), "layer expects " + std::to_string(order.size()) +
                                        " parameters, got " + std::to_string(p.size()));
  std::vector<std::pair<TermKind, double>> out;
  for (std::size_t k = 0; k < order.size(); ++k) out.emplace_back(order[k], p[k]);
  return out;
}

inline Circuit build_layer(const AnsatzSpec& spec, std::span<const double> params) {
  const auto& g = spec.geometry();
  if (params.size() != static_cast<std::size_t>(spec.parameters_per_layer()))
    throw InvalidArgument(std::string(to_string(spec.kind)) + " layer on " + g.label() +
                          " expects " + std::to_string(spec.parameters_per_layer()) +
                          " parameters, got " + std::to_string(params.size()));
  const auto& m = spec.model;

  if (spec.kind == AnsatzKind::NP) {
    std::size_t next = 0;
    Circuit c = detail::network_layer(g, [&](const Interaction&) {
      require(next + 1 < params.size(), "NP layer ran out of parameters");
      const GateAngles a{params[next], params[next + 1]};
      next += 2;
      return a;
    });
    require(next == params.size(), "NP layer left parameters unused");
    return c;
  }

  const auto values = layer_group_values(spec, params);
  auto value_of = [&](TermKind k) {
    for (const auto& [kind, v] : values)
      if (kind == k) return v;
    throw ComputationError(std::string("no parameter for group ") + to_string(k));
  };

  if (spec.kind == AnsatzKind::EHV) {
    return detail::network_layer(
        g, [&](const Interaction& in) { return group_angles(m, in.kind, value_of(in.kind)); });
  }

  Circuit c(g.modes());
  const auto groups = group_commuting_terms(m);
  for (const auto& [kind, v] : values) {
    const GateAngles a = group_angles(m, kind, v);
    for (const auto& grp : groups) {
      if (grp.kind != kind) continue;
      for (const auto& pair : grp.pairs) {
        if (kind == TermKind::Onsite)
          c.append_packed(Gate::number_preserving(pair.i, pair.j, a.theta, a.phi));
        else
          detail::append_string_rotation(c, pair.i, pair.j, a.theta);
      }
    }
  }
  return c;
}

// Interactions of one network layer in the order their gates are emitted;
// NP parameters come in (theta, phi) pairs following this order.
inline std::vector<Interaction> layer_interactions(const LatticeGeometry& g) {
  std::vector<Interaction> out;
  detail::network_layer(g, [&](const Interaction& in) {
    out.push_back(in);
    return GateAngles{};
  });
  return out;
}

// NP parameters that reproduce the shared-parameter layer: every gate of a
// group gets the angles that group would give it.
inline std::vector<double> constrained_np_parameters(const AnsatzSpec& np_spec,
                                                     std::span<const double> shared) {
  require(np_spec.kind == AnsatzKind::NP, "constrained parameters target an NP ansatz");
  AnsatzSpec hv = np_spec;
  hv.kind = AnsatzKind::HV;
  require(shared.size() == static_cast<std::size_t>(hv.parameter_count()),
          "expected " + std::to_string(hv.parameter_count()) + " shared parameters, got " +
              std::to_string(shared.size()));
  const auto interactions = layer_interactions(np_spec.geometry());
  const auto per = static_cast<std::size_t>(hv.parameters_per_layer());
  std::vector<double> out;
  for (int l = 0; l < hv.layers; ++l) {
    const auto values = layer_group_values(hv, shared.subspan(l * per, per));
    for (const auto& in : interactions) {
      double v = 0.0;
      for (const auto& [kind, value] : values)
        if (kind == in.kind) v = value;
      const GateAngles a = group_angles(np_spec.model, in.kind, v);
      out.push_back(a.theta);
      out.push_back(a.phi);
    }
  }
  return out;
}

// Frequency content of the energy as a function of one parameter: a
// trigonometric polynomial of degree `degree` in (unit * parameter).
struct ParameterFrequency {
  int degree = 0;
  double unit = 1.0;
};

inline std::vector<ParameterFrequency> parameter_frequencies(const AnsatzSpec& spec) {
  std::vector<ParameterFrequency> per_layer;
  if (spec.kind == AnsatzKind::NP) {
    for (int k = 0; k < spec.parameters_per_layer() / 2; ++k) {
      per_layer.push_back({2, 1.0});
      per_layer.push_back({1, 1.0});
    }
  } else {
    const auto groups = group_commuting_terms(spec.model);
    for (TermKind kind : spec.ordering()) {
      int gates = 0;
      for (const auto& g : groups)
        if (g.kind == kind) gates = static_cast<int>(g.pairs.size());
      if (kind == TermKind::Onsite)
        per_layer.push_back({spec.model.U == 0.0 ? 0 : gates, std::abs(spec.model.U)});
      else
        per_layer.push_back({spec.model.t == 0.0 ? 0 : 2 * gates, std::abs(spec.model.t)});
    }
  }
  std::vector<ParameterFrequency> out;
  for (int l = 0; l < spec.layers; ++l) out.insert(out.end(), per_layer.begin(), per_layer.end());
  return out;
}

inline std::vector<double> default_parameters(const AnsatzSpec& spec) {
  return std::vector<double>(spec.parameter_count(), 1.0 / spec.layers);
}

inline std::vector<double> random_parameters(const AnsatzSpec& spec, RandomSource& rng) {
  std::vector<double> p(spec.parameter_count());
  for (auto& v : p) v = rng.uniform(0.0, 2.0 * kPi / 100.0);
  return p;
}

struct InitialStateSpec {
  enum class Kind { NonInteracting, Basis } kind = Kind::NonInteracting;
  enum class Placement { TopCorner, Spread, Explicit } placement = Placement::TopCorner;
  OccupationSector sector;
  std::vector<int> modes;
  DegeneracyStrategy degeneracy;

  static InitialStateSpec noninteracting(OccupationSector s, DegeneracyStrategy d = {}) {
    InitialStateSpec spec;
    spec.sector = s;
    spec.degeneracy = d;
    return spec;
  }
  static InitialStateSpec top_corner(OccupationSector s) {
    return basis_placement(Placement::TopCorner, s);
  }
  static InitialStateSpec spread(OccupationSector s) { return basis_placement(Placement::Spread, s); }
  static InitialStateSpec explicit_modes(std::vector<int> modes, OccupationSector s) {
    InitialStateSpec spec = basis_placement(Placement::Explicit, s);
    spec.modes = std::move(modes);
    return spec;
  }

 private:
  static InitialStateSpec basis_placement(Placement p, OccupationSector s) {
    InitialStateSpec spec;
    spec.kind = Kind::Basis;
    spec.placement = p;
    spec.sector = s;
    return spec;
  }
};

namespace detail {

inline int lattice_distance(Site a, Site b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

// Site not in `taken` farthest (by minimum distance) from every site in
// `occupied`; ties go to the lowest plane index.
inline int farthest_site(const LatticeGeometry& g, const std::vector<int>& occupied,
                         const std::vector<bool>& taken) {
  int best = -1, best_d = -1;
  for (int p = 0; p < g.sites(); ++p) {
    if (taken[p]) continue;
    int d = occupied.empty() ? 0 : g.sites() + g.n_x() + g.n_y();
    for (int q : occupied) d = std::min(d, lattice_distance(g.site_at(p), g.site_at(q)));
    if (d > best_d) {
      best = p;
      best_d = d;
    }
  }
  return best;
}

}  // namespace detail

// Occupied modes of a computational-basis placement.
inline Mask placement_mask(const LatticeGeometry& g, const InitialStateSpec& spec) {
  const auto& s = spec.sector;
  s.validate(g);
  const int n = g.sites();
  Mask m = 0;
  switch (spec.placement) {
    case InitialStateSpec::Placement::TopCorner:
      m = range_mask(0, s.n_up) | (range_mask(0, s.n_down) << n);
      break;
    case InitialStateSpec::Placement::Explicit: {
      for (int q : spec.modes) {
        require(q >= 0 && q < g.modes(), "placement mode " + std::to_string(q) + " out of range");
        require(!bit(m, q), "placement mode " + std::to_string(q) + " listed twice");
        m |= Mask{1} << q;
      }
      const int up = popcount(m & range_mask(0, n)), down = popcount(m >> n);
      if (up != s.n_up || down != s.n_down)
        throw InvalidArgument("explicit placement has (" + std::to_string(up) + "," +
                              std::to_string(down) + ") particles, sector wants (" +
                              std::to_string(s.n_up) + "," + std::to_string(s.n_down) + ")");
      break;
    }
    case InitialStateSpec::Placement::Spread: {
      // Doubly occupied sites evenly along the diagonal from (0,0) to the far
      // corner, then the surplus spin on the sites farthest from those.
      const int k = std::min(s.n_up, s.n_down);
      std::vector<int> doubles;
      std::vector<bool> taken(n, false);
      for (int i = 0; i < k; ++i) {
        const double f = k == 1 ? 0.0 : static_cast<double>(i) / (k - 1);
        const int x = static_cast<int>(std::lround(f * (g.n_x() - 1)));
        const int y = static_cast<int>(std::lround(f * (g.n_y() - 1)));
        const int p = g.plane_index(x, y);
        if (taken[p]) continue;
        taken[p] = true;
        doubles.push_back(p);
      }
      while (static_cast<int>(doubles.size()) < k) {
        const int p = detail::farthest_site(g, doubles, taken);
        taken[p] = true;
        doubles.push_back(p);
      }
      std::vector<int> occupied = doubles;
      const int extra = std::max(s.n_up, s.n_down) - k;
      std::vector<int> singles;
      for (int i = 0; i < extra; ++i) {
        const int p = detail::farthest_site(g, occupied, taken);
        taken[p] = true;
        occupied.push_back(p);
        singles.push_back(p);
      }
      for (int p : doubles) m |= (Mask{1} << p) | (Mask{1} << (p + n));
      const int shift = s.n_up >= s.n_down ? 0 : n;
      for (int p : singles) m |= Mask{1} << (p + shift);
      break;
    }
  }
  return m;
}

inline StateVector initial_state(const HubbardModel& model, const InitialStateSpec& spec) {
  spec.sector.validate(model.geometry);
  if (spec.kind == InitialStateSpec::Kind::NonInteracting)
    return noninteracting_ground_state(model, spec.sector, spec.degeneracy);
  return StateVector::basis(model.modes(), placement_mask(model.geometry, spec));
}

inline Circuit ansatz_circuit(const AnsatzSpec& spec, std::span<const double> params) {
  if (params.size() != static_cast<std::size_t>(spec.parameter_count()))
    throw InvalidArgument(std::string(to_string(spec.kind)) + " ansatz with " +
                          std::to_string(spec.layers) + " layers on " + spec.geometry().label() +
                          " expects " + std::to_string(spec.parameter_count()) +
                          " parameters, got " + std::to_string(params.size()));
  Circuit c(spec.model.modes());
  const auto per = static_cast<std::size_t>(spec.parameters_per_layer());
  for (int l = 0; l < spec.layers; ++l) c.append(build_layer(spec, params.subspan(l * per, per)));
  return c;
}

struct AnsatzInstance {
  StateVector initial;
  Circuit circuit;
};

inline AnsatzInstance full_circuit(const AnsatzSpec& spec, std::span<const double> params,
                                   const InitialStateSpec& init) {
  return {initial_state(spec.model, init), ansatz_circuit(spec, params)};
}

// Output state of the ansatz. Parity ladders leave the number sector inside
// the circuit, so the support is narrowed again afterwards.
inline StateVector ansatz_state(const StateVector& initial, const Circuit& circuit) {
  StateVector out = run_circuit(initial, circuit);
  if (out.support().is_full() && !initial.support().is_full()) out.infer_support(1e-12);
  return out;
}

}  // namespace hvqe
