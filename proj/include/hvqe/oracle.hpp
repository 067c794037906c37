// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hvqe/common.hpp"
#include "hvqe/model.hpp"
#include "hvqe/simulator.hpp"

namespace hvqe {

// Basis states with n_up particles in the low plane and n_down in the high
// plane, in increasing mask order.
class SectorBasis {
 public:
  SectorBasis(int plane, int n_up, int n_down)
      : plane_(plane), n_up_(n_up), n_down_(n_down) {
    require(plane >= 1 && plane <= 20, "sector basis supports 1..20 sites per plane");
    require(n_up >= 0 && n_up <= plane && n_down >= 0 && n_down <= plane,
            "occupation out of range for sector basis");
    const auto support = Support::of_planes(2 * plane, n_up, n_down);
    masks_.assign(support.masks().begin(), support.masks().end());
    up_count_ = binomial(plane, n_up);
    rank_.assign(std::size_t{1} << plane, 0);
    for (int w : {n_up, n_down}) {
      std::uint32_t r = 0;
      for (Mask m = 0; m < rank_.size(); ++m)
        if (popcount(m) == w) rank_[m] = r++;
    }
  }

  SectorBasis(const HubbardModel& model, OccupationSector s)
      : SectorBasis(model.sites(), s.n_up, s.n_down) {}

  int plane() const { return plane_; }
  int n_up() const { return n_up_; }
  int n_down() const { return n_down_; }
  std::size_t size() const { return masks_.size(); }
  Mask mask(std::size_t k) const { return masks_[k]; }
  const std::vector<Mask>& masks() const { return masks_; }

  // Position of a mask in the basis; the mask must lie in the sector.
  std::size_t index(Mask m) const {
    const Mask lo = m & range_mask(0, plane_), hi = m >> plane_;
    return static_cast<std::size_t>(rank_[hi]) * up_count_ + rank_[lo];
  }

  bool contains(Mask m) const {
    return m < (Mask{1} << (2 * plane_)) && popcount(m & range_mask(0, plane_)) == n_up_ &&
           popcount(m >> plane_) == n_down_;
  }

 private:
  int plane_;
  int n_up_;
  int n_down_;
  std::size_t up_count_ = 0;
  std::vector<Mask> masks_;
  std::vector<std::uint32_t> rank_;
};

// The Hubbard Hamiltonian acting on one occupation sector, built from
// creation/annihilation rules in the snake mode order.
class SectorHamiltonian {
 public:
  SectorHamiltonian(const HubbardModel& model, std::shared_ptr<const SectorBasis> basis)
      : model_(model), basis_(std::move(basis)) {
    for (const auto& term : build_hubbard_terms(model, true))
      if (is_hopping(term.kind)) hops_.push_back({term.i, term.j});
  }

  std::size_t dimension() const { return basis_->size(); }
  const SectorBasis& basis() const { return *basis_; }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    const int n = basis_->plane();
    y.setZero(x.size());
    for (std::size_t k = 0; k < basis_->size(); ++k) {
      const Mask m = basis_->mask(k);
      const double xk = x[k];
      y[k] += model_.U * popcount(m & (m >> n)) * xk;
      if (model_.t == 0.0) continue;
      for (const auto& p : hops_) {
        const Mask bi = Mask{1} << p.i, bj = Mask{1} << p.j;
        if (((m & bi) != 0) == ((m & bj) != 0)) continue;
        const Mask to = m ^ bi ^ bj;
        const double sign = (popcount(m & p.between()) & 1) ? -1.0 : 1.0;
        y[basis_->index(to)] += -model_.t * sign * xk;
      }
    }
  }

  Eigen::MatrixXd dense() const {
    const auto d = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd h(d, d);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d), col;
    for (Eigen::Index c = 0; c < d; ++c) {
      e[c] = 1.0;
      apply(e, col);
      h.col(c) = col;
      e[c] = 0.0;
    }
    return h;
  }

 private:
  HubbardModel model_;
  std::shared_ptr<const SectorBasis> basis_;
  std::vector<ModePair> hops_;
};

struct OracleOptions {
  std::size_t dimension_cap = 1'000'000;
  std::size_t dense_limit = 1500;
  double degeneracy_tolerance = 1e-8;
  double residual_tolerance = 1e-10;
};

struct SpectrumResult {
  double energy = 0.0;
  Eigen::VectorXd vector;
  int degeneracy = 1;
  double residual = 0.0;
  std::shared_ptr<const SectorBasis> basis;

  StateVector state() const {
    const int qubits = 2 * basis->plane();
    std::vector<Complex> amps(std::size_t{1} << qubits, Complex(0.0));
    for (std::size_t k = 0; k < basis->size(); ++k) amps[basis->mask(k)] = vector[k];
    return StateVector::from_amplitudes(qubits, std::move(amps));
  }
};

namespace detail {

// Largest-magnitude component made positive; lowest index wins ties.
inline void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k)
    if (std::abs(v[k]) > std::abs(v[best]) + 1e-12) best = k;
  if (v[best] < 0) v = -v;
}

// Lowest eigenpair of a symmetric operator orthogonal to `deflate`, by
// restarted Lanczos with full reorthogonalization.
template <class Apply>
std::pair<double, Eigen::VectorXd> lanczos_lowest(const Apply& apply, Eigen::Index dim,
                                                  const std::vector<Eigen::VectorXd>& deflate,
                                                  double tolerance) {
  const Eigen::Index krylov =
      std::min<Eigen::Index>(dim - static_cast<Eigen::Index>(deflate.size()),
                             dim > 200000 ? 40 : 80);
  require(krylov >= 1, "no room left for another eigenvector");
  auto orthogonalize = [&](Eigen::VectorXd& w, const Eigen::MatrixXd& V, Eigen::Index cols) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& d : deflate) w -= d.dot(w) * d;
      if (cols > 0) w -= V.leftCols(cols) * (V.leftCols(cols).transpose() * w);
    }
  };
  // A generic start vector; symmetric ones miss states of other symmetry classes.
  RandomSource rng(0x5eed + deflate.size());
  Eigen::VectorXd v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v[k] = rng.uniform(-1.0, 1.0);
  Eigen::MatrixXd V(dim, krylov);
  orthogonalize(v, V, 0);
  v.normalize();
  Eigen::VectorXd w, hv;
  double theta = 0.0;
  for (int restart = 0; restart < 200; ++restart) {
    V.col(0) = v;
    std::vector<double> alpha, beta;
    Eigen::Index m = 0;
    for (Eigen::Index k = 0; k < krylov; ++k) {
      apply(Eigen::VectorXd(V.col(k)), w);
      alpha.push_back(V.col(k).dot(w));
      orthogonalize(w, V, k + 1);
      m = k + 1;
      const double b = w.norm();
      if (k + 1 == krylov || b < 1e-12) break;
      beta.push_back(b);
      V.col(k + 1) = w / b;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      T(k, k) = alpha[k];
      if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    theta = es.eigenvalues()[0];
    v = V.leftCols(m) * es.eigenvectors().col(0);
    orthogonalize(v, V, 0);
    v.normalize();
    apply(v, hv);
    const double residual = (hv - theta * v).norm();
    if (residual < tolerance * std::max(1.0, std::abs(theta))) return {theta, v};
  }
  throw ComputationError("Lanczos did not converge");
}

}  // namespace detail

inline SpectrumResult exact_ground_state(const HubbardModel& model, OccupationSector sector,
                                         const OracleOptions& options = {}) {
  sector.validate(model.geometry);
  const std::size_t dim = binomial(model.sites(), sector.n_up) *
                          binomial(model.sites(), sector.n_down);
  if (dim > options.dimension_cap)
    throw CapacityError("sector dimension " + std::to_string(dim) + " exceeds cap " +
                        std::to_string(options.dimension_cap));
  auto basis = std::make_shared<const SectorBasis>(model, sector);
  SectorHamiltonian h(model, basis);
  SpectrumResult r;
  r.basis = basis;
  if (dim <= options.dense_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
    const auto& ev = es.eigenvalues();
    r.energy = ev[0];
    r.vector = es.eigenvectors().col(0);
    r.degeneracy = 1;
    while (r.degeneracy < ev.size() &&
           ev[r.degeneracy] - ev[0] < options.degeneracy_tolerance)
      ++r.degeneracy;
  } else {
    auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { h.apply(x, y); };
    const auto d = static_cast<Eigen::Index>(dim);
    auto [e0, v0] = detail::lanczos_lowest(apply, d, {}, options.residual_tolerance);
    r.energy = e0;
    r.vector = v0;
    std::vector<Eigen::VectorXd> found{v0};
    while (static_cast<Eigen::Index>(found.size()) < d) {
      auto [e, v] = detail::lanczos_lowest(apply, d, found, options.residual_tolerance);
      if (e - e0 >= options.degeneracy_tolerance) break;
      found.push_back(v);
    }
    r.degeneracy = static_cast<int>(found.size());
  }
  detail::fix_sign(r.vector);
  Eigen::VectorXd hv;
  h.apply(r.vector, hv);
  r.residual = (hv - r.energy * r.vector).norm();
  return r;
}

// N x N single-particle hopping matrix in plane (snake) order.
inline Eigen::MatrixXd hopping_matrix(const HubbardModel& model) {
  const int n = model.sites();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (const auto& term : build_hubbard_terms(model, false)) {
    if (!is_hopping(term.kind)) continue;
    h(term.i, term.j) = h(term.j, term.i) = term.coefficient;
  }
  return h;
}

struct DegeneracyStrategy {
  enum class Kind { None, EpsilonPerturb } kind = Kind::None;
  double epsilon = 1e-4;

  static DegeneracyStrategy none() { return {}; }
  static DegeneracyStrategy perturb(double eps = 1e-4) { return {Kind::EpsilonPerturb, eps}; }
};

// Occupied orbitals per spin of the free-fermion ground state.
struct SlaterState {
  Eigen::MatrixXd up_orbitals;
  Eigen::MatrixXd down_orbitals;
  std::vector<double> orbital_energies;
  bool perturbed = false;

  double energy() const {
    double e = 0.0;
    for (Eigen::Index k = 0; k < up_orbitals.cols(); ++k) e += orbital_energies[k];
    for (Eigen::Index k = 0; k < down_orbitals.cols(); ++k) e += orbital_energies[k];
    return e;
  }

  StateVector state() const {
    const auto plane = static_cast<int>(up_orbitals.rows());
    const int qubits = 2 * plane;
    const int nu = static_cast<int>(up_orbitals.cols()), nd = static_cast<int>(down_orbitals.cols());
    const SectorBasis basis(plane, nu, nd);
    auto minor_det = [](const Eigen::MatrixXd& phi, Mask rows) {
      const auto n = phi.cols();
      if (n == 0) return 1.0;
      Eigen::MatrixXd sub(n, n);
      Eigen::Index r = 0;
      for (int a = 0; a < phi.rows(); ++a)
        if (rows >> a & 1u) sub.row(r++) = phi.row(a);
      return sub.determinant();
    };
    std::vector<Complex> amps(std::size_t{1} << qubits, Complex(0.0));
    double norm2 = 0.0;
    for (Mask m : basis.masks()) {
      const double a = minor_det(up_orbitals, m & range_mask(0, plane)) *
                       minor_det(down_orbitals, m >> plane);
      amps[m] = a;
      norm2 += a * a;
    }
    const double s = 1.0 / std::sqrt(norm2);
    for (auto& a : amps) a *= s;
    return StateVector::from_amplitudes(qubits, std::move(amps));
  }
};

// Hopping coefficient between sites (0,0) and (1,0) (first vertical bond on
// single-column grids) shifted by epsilon.
inline Eigen::MatrixXd perturbed_hopping_matrix(const HubbardModel& model, double epsilon) {
  Eigen::MatrixXd h = hopping_matrix(model);
  const auto& g = model.geometry;
  const int a = g.plane_index(0, 0);
  const int b = g.n_x() > 1 ? g.plane_index(1, 0) : g.plane_index(0, 1);
  h(a, b) = h(b, a) = -(model.t + epsilon);
  return h;
}

inline SlaterState noninteracting_slater(const HubbardModel& model, OccupationSector sector,
                                         DegeneracyStrategy strategy = {}) {
  sector.validate(model.geometry);
  const int n = model.sites();
  auto solve = [&](const Eigen::MatrixXd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    return std::make_pair(Eigen::VectorXd(es.eigenvalues()), Eigen::MatrixXd(es.eigenvectors()));
  };
  auto degenerate_at = [&](const Eigen::VectorXd& e, int filled) {
    return filled > 0 && filled < n && std::abs(e[filled] - e[filled - 1]) < 1e-9;
  };
  auto [energies, vectors] = solve(hopping_matrix(model));
  bool perturbed = false;
  if (degenerate_at(energies, sector.n_up) || degenerate_at(energies, sector.n_down)) {
    std::ostringstream os;
    os << "degenerate free-fermion filling for (" << sector.n_up << "," << sector.n_down
       << ") on " << model.geometry.label() << "; orbital energies:";
    for (Eigen::Index k = 0; k < energies.size(); ++k) os << ' ' << energies[k];
    if (strategy.kind != DegeneracyStrategy::Kind::EpsilonPerturb) throw ComputationError(os.str());
    std::tie(energies, vectors) = solve(perturbed_hopping_matrix(model, strategy.epsilon));
    perturbed = true;
    if (degenerate_at(energies, sector.n_up) || degenerate_at(energies, sector.n_down))
      throw ComputationError(os.str() + " (unresolved by perturbation)");
  }
  SlaterState s;
  s.up_orbitals = vectors.leftCols(sector.n_up);
  s.down_orbitals = vectors.leftCols(sector.n_down);
  s.orbital_energies.assign(energies.data(), energies.data() + energies.size());
  s.perturbed = perturbed;
  return s;
}

inline StateVector noninteracting_ground_state(const HubbardModel& model, OccupationSector sector,
                                               DegeneracyStrategy strategy = {}) {
  return noninteracting_slater(model, sector, strategy).state();
}

inline double fidelity(const StateVector& a, const StateVector& b) {
  require(a.qubits() == b.qubits(), "fidelity of states with different qubit counts");
  Complex overlap = 0.0;
  const auto& x = a.amplitudes();
  const auto& y = b.amplitudes();
  if (a.support().is_full()) {
    b.support().for_each([&](Mask m) { overlap += std::conj(x[m]) * y[m]; });
  } else {
    a.support().for_each([&](Mask m) { overlap += std::conj(x[m]) * y[m]; });
  }
  return std::min(1.0, std::norm(overlap));
}

// FNV-1a over the vector rounded to 1e-8, for golden records.
inline std::string vector_hash(const Eigen::VectorXd& v) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const auto q = static_cast<std::int64_t>(std::llround(v[k] * 1e8));
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint64_t>(q >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline std::string golden_key(const HubbardModel& model, OccupationSector s) {
  std::ostringstream os;
  os << std::setprecision(17) << "hubbard " << model.geometry.label() << " t=" << model.t
     << " U=" << model.U << " up=" << s.n_up << " down=" << s.n_down;
  return os.str();
}

// Append-only text file of `key<TAB>energy<TAB>vector hash` records.
class GoldenCache {
 public:
  struct Record {
    double energy = 0.0;
    std::string hash;
  };

  explicit GoldenCache(std::string path) : path_(std::move(path)) {}

  std::optional<Record> find(const std::string& key) const {
    std::ifstream in(path_);
    std::string line;
    std::optional<Record> found;
    while (std::getline(in, line)) {
      const auto t1 = line.find('\t');
      const auto t2 = line.find('\t', t1 + 1);
      if (t1 == std::string::npos || t2 == std::string::npos) continue;
      if (line.compare(0, t1, key) != 0 || t1 != key.size()) continue;
      found = Record{std::stod(line.substr(t1 + 1, t2 - t1 - 1)), line.substr(t2 + 1)};
    }
    return found;
  }

  void append(const std::string& key, const Record& r) const {
    std::ostringstream os;
    os << key << '\t' << std::setprecision(17) << r.energy << '\t' << r.hash << '\n';
    const std::string line = os.str();
    // One fwrite on an O_APPEND stream keeps concurrent appends line-atomic.
    std::FILE* f = std::fopen(path_.c_str(), "a");
    if (!f) throw Error("cannot open golden cache " + path_);
    std::fwrite(line.data(), 1, line.size(), f);
    std::fclose(f);
  }

  // Returns the cached record, or computes, stores and returns it.
  Record lookup_or_compute(const HubbardModel& model, OccupationSector s,
                           const OracleOptions& options = {}) const {
    const auto key = golden_key(model, s);
    if (auto r = find(key)) return *r;
    const auto spec = exact_ground_state(model, s, options);
    Record r{spec.energy, vector_hash(spec.vector)};
    append(key, r);
    return r;
  }

 private:
  std::string path_;
};

}  // namespace hvqe
