// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hvqe/common.hpp"

namespace hvqe {

enum class Spin { Up = 0, Down = 1 };

struct Site {
  int x = 0;
  int y = 0;
  bool operator==(const Site&) const = default;
};

// Open-boundary n_x (columns) by n_y (rows) grid. Modes are numbered in a
// snake: the spin-up plane occupies [0, N), spin-down [N, 2N), and each plane
// runs left-to-right on even rows and right-to-left on odd rows.
class LatticeGeometry {
 public:
  LatticeGeometry(int n_x, int n_y) : n_x_(n_x), n_y_(n_y) {
    if (n_x < 1 || n_y < 1)
      throw InvalidArgument("lattice must have positive width and height, got " +
                            std::to_string(n_x) + "x" + std::to_string(n_y));
    if (n_x == 1 && n_y == 1) throw InvalidArgument("a 1x1 lattice has no bonds");
  }

  int n_x() const { return n_x_; }
  int n_y() const { return n_y_; }
  int sites() const { return n_x_ * n_y_; }
  int modes() const { return 2 * sites(); }

  // Position of site (x, y) within a spin plane.
  int plane_index(int x, int y) const {
    check_site(x, y);
    return y * n_x_ + ((y % 2 == 0) ? x : n_x_ - 1 - x);
  }
  int plane_index(Site s) const { return plane_index(s.x, s.y); }

  int mode_index(int x, int y, Spin spin) const {
    return static_cast<int>(spin) * sites() + plane_index(x, y);
  }
  int mode_index(Site s, Spin spin) const { return mode_index(s.x, s.y, spin); }

  Site site_at(int plane_position) const {
    require(plane_position >= 0 && plane_position < sites(), "plane position out of range");
    const int y = plane_position / n_x_;
    const int r = plane_position % n_x_;
    return {(y % 2 == 0) ? r : n_x_ - 1 - r, y};
  }

  LatticeGeometry transposed() const { return {n_y_, n_x_}; }

  std::string label() const { return std::to_string(n_x_) + "x" + std::to_string(n_y_); }

  bool operator==(const LatticeGeometry&) const = default;

 private:
  void check_site(int x, int y) const {
    if (x < 0 || x >= n_x_ || y < 0 || y >= n_y_)
      throw InvalidArgument("site (" + std::to_string(x) + "," + std::to_string(y) +
                            ") outside " + label() + " lattice");
  }

  int n_x_;
  int n_y_;
};

struct HubbardModel {
  LatticeGeometry geometry{1, 2};
  double t = 1.0;
  double U = 2.0;
  // Set when the caller's grid was rotated so that n_x <= n_y.
  bool transposed = false;

  HubbardModel() = default;
  HubbardModel(LatticeGeometry g, double t_ = 1.0, double U_ = 2.0, bool transposed_ = false)
      : geometry(g), t(t_), U(U_), transposed(transposed_) {}

  // Builds the model with the shorter side laid out horizontally.
  static HubbardModel oriented(int n_x, int n_y, double t = 1.0, double U = 2.0) {
    if (n_y < n_x) return {LatticeGeometry(n_y, n_x), t, U, true};
    return {LatticeGeometry(n_x, n_y), t, U, false};
  }

  int sites() const { return geometry.sites(); }
  int modes() const { return geometry.modes(); }
};

// Closed-form term inventory: hopping bonds per spin plus one onsite term per site.
inline int hubbard_term_count(int n_x, int n_y) { return 5 * n_x * n_y - 2 * n_x - 2 * n_y; }

struct OccupationSector {
  int n_up = 0;
  int n_down = 0;

  int eta() const { return n_up + n_down; }

  void validate(const LatticeGeometry& g) const {
    if (n_up < 0 || n_down < 0 || n_up > g.sites() || n_down > g.sites())
      throw InvalidArgument("occupation (" + std::to_string(n_up) + "," + std::to_string(n_down) +
                            ") invalid for " + std::to_string(g.sites()) + " sites");
  }

  bool operator==(const OccupationSector&) const = default;
};

enum class TermKind { Onsite, H1, H2, V1, V2 };

inline const char* to_string(TermKind k) {
  switch (k) {
    case TermKind::Onsite: return "O";
    case TermKind::H1: return "H1";
    case TermKind::H2: return "H2";
    case TermKind::V1: return "V1";
    case TermKind::V2: return "V2";
  }
  return "?";
}

inline bool is_hopping(TermKind k) { return k != TermKind::Onsite; }
inline bool is_vertical(TermKind k) { return k == TermKind::V1 || k == TermKind::V2; }

// Fermionic term: hopping coefficient*(a_i^+ a_j + h.c.) or onsite coefficient*n_i n_j.
struct FermionTerm {
  TermKind kind = TermKind::Onsite;
  int i = 0;
  int j = 0;
  double coefficient = 0.0;
};

// With spin_resolved the indices are modes; otherwise they are plane
// positions, each hopping bond listed once and onsite terms as (p, p).
inline std::vector<FermionTerm> build_hubbard_terms(const HubbardModel& model,
                                                    bool spin_resolved = true) {
  const auto& g = model.geometry;
  std::vector<FermionTerm> out;
  const int planes = spin_resolved ? 2 : 1;
  for (int s = 0; s < planes; ++s) {
    const auto spin = static_cast<Spin>(s);
    auto idx = [&](int x, int y) {
      return spin_resolved ? g.mode_index(x, y, spin) : g.plane_index(x, y);
    };
    for (int y = 0; y < g.n_y(); ++y) {
      for (int x = 0; x < g.n_x(); ++x) {
        if (x + 1 < g.n_x()) {
          int a = idx(x, y), b = idx(x + 1, y);
          out.push_back({x % 2 == 0 ? TermKind::H1 : TermKind::H2, std::min(a, b), std::max(a, b),
                         -model.t});
        }
        if (y + 1 < g.n_y()) {
          int a = idx(x, y), b = idx(x, y + 1);
          out.push_back({y % 2 == 0 ? TermKind::V1 : TermKind::V2, std::min(a, b), std::max(a, b),
                         -model.t});
        }
      }
    }
  }
  for (int p = 0; p < g.sites(); ++p) {
    if (spin_resolved)
      out.push_back({TermKind::Onsite, p, p + g.sites(), model.U});
    else
      out.push_back({TermKind::Onsite, p, p, model.U});
  }
  return out;
}

enum class Pauli : char { X = 'X', Y = 'Y', Z = 'Z' };

struct PauliTerm {
  double coefficient = 0.0;
  std::map<int, Pauli> factors;

  Mask x_mask() const {
    Mask m = 0;
    for (auto [q, p] : factors)
      if (p != Pauli::Z) m |= Mask{1} << q;
    return m;
  }
  Mask z_mask() const {
    Mask m = 0;
    for (auto [q, p] : factors)
      if (p != Pauli::X) m |= Mask{1} << q;
    return m;
  }
  int y_count() const {
    int n = 0;
    for (auto [q, p] : factors) n += p == Pauli::Y;
    return n;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << coefficient;
    for (auto [q, p] : factors) os << ' ' << static_cast<char>(p) << q;
    return os.str();
  }
};

// Symplectic test: two Pauli strings commute iff they anticommute on an even
// number of qubits.
inline bool commutes(const PauliTerm& a, const PauliTerm& b) {
  const Mask anti = (a.x_mask() & b.z_mask()) ^ (a.z_mask() & b.x_mask());
  return popcount(anti) % 2 == 0;
}

struct QubitHamiltonian {
  int qubits = 0;
  double offset = 0.0;
  std::vector<PauliTerm> terms;

  // Adds a term, merging with an existing identical string. Identity strings
  // go to the offset and zero results are dropped.
  void add(PauliTerm term) {
    require(std::isfinite(term.coefficient), "Pauli coefficient must be finite");
    for (auto [q, p] : term.factors)
      require(q >= 0 && q < qubits, "Pauli factor on qubit " + std::to_string(q) + " out of range");
    if (term.factors.empty()) {
      offset += term.coefficient;
      return;
    }
    for (auto it = terms.begin(); it != terms.end(); ++it) {
      if (it->factors == term.factors) {
        it->coefficient += term.coefficient;
        if (it->coefficient == 0.0) terms.erase(it);
        return;
      }
    }
    if (term.coefficient != 0.0) terms.push_back(std::move(term));
  }
};

inline QubitHamiltonian jordan_wigner_encode(const HubbardModel& model) {
  QubitHamiltonian h;
  h.qubits = model.modes();
  for (const auto& term : build_hubbard_terms(model, true)) {
    const int i = term.i, j = term.j;
    if (is_hopping(term.kind)) {
      if (term.coefficient == 0.0) continue;
      for (Pauli p : {Pauli::X, Pauli::Y}) {
        PauliTerm pt;
        pt.coefficient = term.coefficient / 2.0;
        pt.factors[i] = p;
        pt.factors[j] = p;
        for (int k = i + 1; k < j; ++k) pt.factors[k] = Pauli::Z;
        h.add(std::move(pt));
      }
    } else {
      // (U/4)(I - Z_i)(I - Z_j)
      const double q = term.coefficient / 4.0;
      if (q == 0.0) continue;
      h.offset += q;
      h.add({-q, {{i, Pauli::Z}}});
      h.add({-q, {{j, Pauli::Z}}});
      h.add({q, {{i, Pauli::Z}, {j, Pauli::Z}}});
    }
  }
  return h;
}

struct ModePair {
  int i = 0;
  int j = 0;
  // Qubits strictly between the pair, i.e. the Jordan-Wigner string.
  Mask between() const { return range_mask(i + 1, j); }
  bool operator==(const ModePair&) const = default;
};

struct TermGroup {
  TermKind kind = TermKind::Onsite;
  std::vector<ModePair> pairs;
};

// Onsite pairs are (up mode, down mode) of each site; hopping pairs are the
// mode pairs of each bond in both spin planes, sorted by first index.
inline std::vector<TermGroup> group_commuting_terms(const HubbardModel& model) {
  std::vector<TermGroup> groups;
  for (TermKind kind :
       {TermKind::Onsite, TermKind::H1, TermKind::H2, TermKind::V1, TermKind::V2}) {
    TermGroup g{kind, {}};
    for (const auto& term : build_hubbard_terms(model, true))
      if (term.kind == kind) g.pairs.push_back({term.i, term.j});
    std::sort(g.pairs.begin(), g.pairs.end(),
              [](const ModePair& a, const ModePair& b) { return a.i < b.i; });
    if (!g.pairs.empty()) groups.push_back(std::move(g));
  }
  return groups;
}

// Jordan-Wigner images (unit coefficient) of the terms in one group.
inline std::vector<PauliTerm> group_pauli_strings(const TermGroup& group) {
  std::vector<PauliTerm> out;
  for (const auto& pr : group.pairs) {
    if (group.kind == TermKind::Onsite) {
      out.push_back({1.0, {{pr.i, Pauli::Z}}});
      out.push_back({1.0, {{pr.j, Pauli::Z}}});
      out.push_back({1.0, {{pr.i, Pauli::Z}, {pr.j, Pauli::Z}}});
      continue;
    }
    for (Pauli p : {Pauli::X, Pauli::Y}) {
      PauliTerm pt{1.0, {{pr.i, p}, {pr.j, p}}};
      for (int k = pr.i + 1; k < pr.j; ++k) pt.factors[k] = Pauli::Z;
      out.push_back(std::move(pt));
    }
  }
  return out;
}

inline bool group_commutes(const TermGroup& group) {
  const auto strings = group_pauli_strings(group);
  for (std::size_t a = 0; a < strings.size(); ++a)
    for (std::size_t b = a + 1; b < strings.size(); ++b)
      if (!commutes(strings[a], strings[b])) return false;
  return true;
}

}  // namespace hvqe
