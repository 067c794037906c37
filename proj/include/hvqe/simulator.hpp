// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hvqe/common.hpp"
#include "hvqe/model.hpp"

namespace hvqe {

// Row-major 4x4 unitary on (q0, q1); basis index is 2*bit(q0) + bit(q1).
using Matrix4 = std::array<Complex, 16>;
// Row-major 2x2 unitary.
using Matrix2 = std::array<Complex, 4>;

enum class GateKind { NumberPreserving, FSwap, BasisChange, Generic2Q, SingleQubit };

class Gate {
 public:
  // exp(i theta (XX+YY)/2) followed by a phase e^{i phi} on |11>.
  static Gate number_preserving(int q0, int q1, double theta, double phi) {
    const Complex c = std::cos(theta), s = Complex(0.0, std::sin(theta));
    Matrix4 m{};
    m[0] = 1.0;
    m[5] = c;
    m[6] = s;
    m[9] = s;
    m[10] = c;
    m[15] = std::polar(1.0, phi);
    Gate g(GateKind::NumberPreserving, q0, q1, m);
    g.theta_ = theta;
    g.phi_ = phi;
    return g;
  }

  static Gate fswap(int q0, int q1) {
    Matrix4 m{};
    m[0] = 1.0;
    m[6] = 1.0;
    m[9] = 1.0;
    m[15] = -1.0;
    return Gate(GateKind::FSwap, q0, q1, m);
  }

  // CNOT(q0->q1), Hadamard on q0 controlled by q1, CNOT(q0->q1). Maps
  // (XX+YY)/2 to |01><01| - |10><10| and leaves Z(x)Z invariant.
  static Gate basis_change(int q0, int q1) {
    const double r = 1.0 / std::sqrt(2.0);
    Matrix4 m{};
    m[0] = 1.0;
    m[5] = r;
    m[6] = r;
    m[9] = r;
    m[10] = -r;
    m[15] = 1.0;
    return Gate(GateKind::BasisChange, q0, q1, m);
  }

  static Gate two_qubit(int q0, int q1, const Matrix4& m) {
    return Gate(GateKind::Generic2Q, q0, q1, m);
  }

  static Gate single(int q, const Matrix2& m) {
    Matrix4 full{};
    std::copy(m.begin(), m.end(), full.begin());
    return Gate(GateKind::SingleQubit, q, -1, full);
  }

  static Gate pauli(int q, Pauli p) {
    switch (p) {
      case Pauli::X: return single(q, {0.0, 1.0, 1.0, 0.0});
      case Pauli::Y: return single(q, {0.0, Complex(0, -1), Complex(0, 1), 0.0});
      case Pauli::Z: return single(q, {1.0, 0.0, 0.0, -1.0});
    }
    throw InvalidArgument("unknown Pauli");
  }

  static Gate hadamard(int q) {
    const double r = 1.0 / std::sqrt(2.0);
    return single(q, {r, r, r, -r});
  }

  static Gate cnot(int control, int target) {
    Matrix4 m{};
    m[0] = 1.0;
    m[5] = 1.0;
    m[11] = 1.0;
    m[14] = 1.0;
    return two_qubit(control, target, m);
  }

  static Gate cz(int q0, int q1) {
    Matrix4 m{};
    m[0] = 1.0;
    m[5] = 1.0;
    m[10] = 1.0;
    m[15] = -1.0;
    return two_qubit(q0, q1, m);
  }

  GateKind kind() const { return kind_; }
  int q0() const { return q0_; }
  int q1() const { return q1_; }
  bool is_two_qubit() const { return q1_ >= 0; }
  const Matrix4& matrix() const { return m_; }
  Complex at(int r, int c) const { return is_two_qubit() ? m_[4 * r + c] : m_[2 * r + c]; }
  double theta() const { return theta_; }
  double phi() const { return phi_; }
  bool diagonal() const { return diagonal_; }
  bool number_preserving() const { return number_preserving_; }
  // True when the gate can move a particle between q0 and q1.
  bool exchanges() const { return number_preserving_ && !diagonal_; }

 private:
  Gate(GateKind kind, int q0, int q1, const Matrix4& m) : kind_(kind), q0_(q0), q1_(q1), m_(m) {
    require(q0 >= 0 && (q1 == -1 || q1 >= 0), "gate qubit index must be non-negative");
    require(q0 != q1, "two-qubit gate needs distinct qubits");
    const int d = is_two_qubit() ? 4 : 2;
    diagonal_ = true;
    number_preserving_ = true;
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        if (r == c || at(r, c) == Complex(0.0)) continue;
        diagonal_ = false;
        if (popcount(static_cast<Mask>(r)) != popcount(static_cast<Mask>(c)))
          number_preserving_ = false;
      }
    }
    if (!is_two_qubit() && !diagonal_) number_preserving_ = false;
  }

  GateKind kind_;
  int q0_;
  int q1_;
  Matrix4 m_;
  double theta_ = 0.0;
  double phi_ = 0.0;
  bool diagonal_ = true;
  bool number_preserving_ = true;
};

inline Matrix4 multiply(const Matrix4& a, const Matrix4& b) {
  Matrix4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) r[4 * i + j] += a[4 * i + k] * b[4 * k + j];
  return r;
}

// FSWAP * U_NP(theta, phi) as one gate, used to fold a horizontal hopping
// evolution into a network swap.
inline Gate fused_fswap_number_preserving(int q0, int q1, double theta, double phi) {
  return Gate::two_qubit(
      q0, q1,
      multiply(Gate::fswap(q0, q1).matrix(), Gate::number_preserving(q0, q1, theta, phi).matrix()));
}

struct Moment {
  std::vector<Gate> gates;
  bool has_two_qubit_gate() const {
    return std::any_of(gates.begin(), gates.end(), [](const Gate& g) { return g.is_two_qubit(); });
  }
};

class Circuit {
 public:
  explicit Circuit(int qubits = 0) : qubits_(qubits), frontier_(qubits, 0) {
    require(qubits >= 0, "qubit count must be non-negative");
  }

  int qubits() const { return qubits_; }
  const std::vector<Moment>& moments() const { return moments_; }
  bool empty() const { return moments_.empty(); }

  void add_moment(std::vector<Gate> gates) {
    std::vector<char> used(qubits_, 0);
    for (const auto& g : gates) {
      for (int q : {g.q0(), g.q1()}) {
        if (q < 0) continue;
        require(q < qubits_, "gate on qubit " + std::to_string(q) + " outside " +
                                 std::to_string(qubits_) + "-qubit circuit");
        require(!used[q], "qubit " + std::to_string(q) + " used twice in one moment");
        used[q] = 1;
      }
    }
    moments_.push_back({std::move(gates)});
    const int depth = static_cast<int>(moments_.size());
    for (int q = 0; q < qubits_; ++q)
      if (used[q]) frontier_[q] = depth;
  }

  // Places the gate in the earliest moment after every gate already touching its qubits.
  void append_packed(const Gate& g) {
    int slot = frontier_.at(g.q0());
    if (g.is_two_qubit()) slot = std::max(slot, frontier_.at(g.q1()));
    if (slot == static_cast<int>(moments_.size())) {
      add_moment({g});
      return;
    }
    for (int q : {g.q0(), g.q1()})
      if (q >= 0) require(q < qubits_, "gate qubit out of range");
    moments_[slot].gates.push_back(g);
    frontier_[g.q0()] = slot + 1;
    if (g.is_two_qubit()) frontier_[g.q1()] = slot + 1;
  }

  void append(const Circuit& other) {
    require(other.qubits_ == qubits_, "cannot append circuits of different width");
    for (const auto& m : other.moments_) add_moment(m.gates);
  }

  std::size_t two_qubit_gate_count() const {
    std::size_t n = 0;
    for (const auto& m : moments_)
      for (const auto& g : m.gates) n += g.is_two_qubit();
    return n;
  }

 private:
  int qubits_;
  std::vector<Moment> moments_;
  std::vector<int> frontier_;
};

// Number of moments with at least one two-qubit gate.
inline std::size_t circuit_depth(const Circuit& c) {
  return static_cast<std::size_t>(std::count_if(c.moments().begin(), c.moments().end(),
                                                [](const Moment& m) { return m.has_two_qubit_gate(); }));
}

// Set of basis states an amplitude array may be nonzero on. Plane weights
// assume the first half of the qubits is one spin plane.
class Support {
 public:
  enum class Kind { Full, Weight, PlaneWeights };

  static Support full(int qubits) { return Support(Kind::Full, qubits, -1, -1, -1); }
  static Support of_weight(int qubits, int weight) {
    require(weight >= 0 && weight <= qubits, "weight out of range");
    return Support(Kind::Weight, qubits, weight, -1, -1);
  }
  static Support of_planes(int qubits, int n_up, int n_down) {
    require(qubits % 2 == 0, "plane support needs an even qubit count");
    require(n_up >= 0 && n_down >= 0 && n_up <= qubits / 2 && n_down <= qubits / 2,
            "plane weights out of range");
    return Support(Kind::PlaneWeights, qubits, n_up + n_down, n_up, n_down);
  }

  Kind kind() const { return kind_; }
  int qubits() const { return qubits_; }
  int weight() const { return weight_; }
  int n_up() const { return n_up_; }
  int n_down() const { return n_down_; }
  bool is_full() const { return kind_ == Kind::Full; }
  // Sorted basis states; empty span for full support.
  std::span<const Mask> masks() const {
    return masks_ ? std::span<const Mask>(*masks_) : std::span<const Mask>();
  }
  std::size_t size() const { return masks_ ? masks_->size() : (std::size_t{1} << qubits_); }

  bool contains(Mask m) const {
    switch (kind_) {
      case Kind::Full: return m < (Mask{1} << qubits_);
      case Kind::Weight: return popcount(m) == weight_ && m < (Mask{1} << qubits_);
      case Kind::PlaneWeights: {
        const int half = qubits_ / 2;
        return m < (Mask{1} << qubits_) && popcount(m & range_mask(0, half)) == n_up_ &&
               popcount(m >> half) == n_down_;
      }
    }
    return false;
  }

  template <class F>
  void for_each(F&& f) const {
    if (masks_) {
      for (Mask m : *masks_) f(m);
    } else {
      const Mask n = Mask{1} << qubits_;
      for (Mask m = 0; m < n; ++m) f(m);
    }
  }

 private:
  Support(Kind kind, int qubits, int weight, int n_up, int n_down)
      : kind_(kind), qubits_(qubits), weight_(weight), n_up_(n_up), n_down_(n_down) {
    if (kind != Kind::Full) masks_ = cached_masks(kind, qubits, weight, n_up, n_down);
  }

  static std::vector<Mask> weight_masks(int bits, int weight) {
    std::vector<Mask> out;
    out.reserve(binomial(bits, weight));
    if (weight == 0) {
      out.push_back(0);
      return out;
    }
    // Gosper's hack enumerates in increasing order.
    Mask m = (Mask{1} << weight) - 1;
    const Mask limit = Mask{1} << bits;
    while (m < limit) {
      out.push_back(m);
      const Mask c = m & -m;
      const Mask r = m + c;
      m = (((r ^ m) >> 2) / c) | r;
    }
    return out;
  }

  static std::shared_ptr<const std::vector<Mask>> cached_masks(Kind kind, int qubits, int weight,
                                                               int n_up, int n_down) {
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int, int, int>, std::shared_ptr<const std::vector<Mask>>>
        cache;
    const auto key = std::make_tuple(static_cast<int>(kind), qubits, weight, n_up, n_down);
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    std::vector<Mask> masks;
    if (kind == Kind::Weight) {
      masks = weight_masks(qubits, weight);
    } else {
      const int half = qubits / 2;
      const auto lo = weight_masks(half, n_up);
      const auto hi = weight_masks(half, n_down);
      masks.reserve(lo.size() * hi.size());
      for (Mask h : hi)
        for (Mask l : lo) masks.push_back(l | (h << half));
    }
    auto ptr = std::make_shared<const std::vector<Mask>>(std::move(masks));
    cache.emplace(key, ptr);
    return ptr;
  }

  Kind kind_;
  int qubits_;
  int weight_;
  int n_up_;
  int n_down_;
  std::shared_ptr<const std::vector<Mask>> masks_;
};

class StateVector {
 public:
  static constexpr int kMaxQubits = 28;

  // |0...0>
  explicit StateVector(int qubits) : StateVector(qubits, Mask{0}) {}

  static StateVector basis(int qubits, Mask m) { return StateVector(qubits, m); }

  // Amplitudes must be normalized; the support is inferred from the nonzero entries.
  static StateVector from_amplitudes(int qubits, std::vector<Complex> amplitudes) {
    check_qubits(qubits);
    require(amplitudes.size() == (std::size_t{1} << qubits),
            "amplitude array length does not match qubit count");
    StateVector s(qubits, std::move(amplitudes), Support::full(qubits));
    const double n = s.norm();
    require(std::abs(n - 1.0) < 1e-10, "state is not normalized (norm " + std::to_string(n) + ")");
    s.infer_support();
    return s;
  }

  int qubits() const { return qubits_; }
  std::size_t dimension() const { return amps_.size(); }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  Complex amplitude(Mask m) const { return amps_.at(m); }
  const Support& support() const { return support_; }

  // Total particle number when the state is known to be confined to one.
  std::optional<int> sector_weight() const {
    if (support_.is_full()) return std::nullopt;
    return support_.weight();
  }

  double norm() const {
    double s = 0.0;
    support_.for_each([&](Mask m) { s += std::norm(amps_[m]); });
    return std::sqrt(s);
  }

  // Kernel access for gate application.
  std::vector<Complex>& data() { return amps_; }

  void widen_to_weight() {
    if (support_.kind() == Support::Kind::PlaneWeights)
      support_ = Support::of_weight(qubits_, support_.weight());
  }
  void widen_to_full() { support_ = Support::full(qubits_); }

  // Narrows the support if the amplitudes allow it (after circuits that leave
  // and re-enter a number sector, e.g. parity ladders).
  void infer_support(double tolerance = 1e-14) {
    int w = -1, up = -1, dn = -1;
    bool same_w = true, same_planes = qubits_ % 2 == 0;
    const int half = qubits_ / 2;
    for (Mask m = 0; m < amps_.size(); ++m) {
      if (std::abs(amps_[m]) <= tolerance) continue;
      const int wm = popcount(m);
      const int um = popcount(m & range_mask(0, half));
      if (w < 0) {
        w = wm;
        up = um;
        dn = wm - um;
      }
      same_w = same_w && wm == w;
      same_planes = same_planes && um == up && wm - um == dn;
    }
    if (w < 0 || !same_w) {
      support_ = Support::full(qubits_);
      return;
    }
    support_ = same_planes ? Support::of_planes(qubits_, up, dn) : Support::of_weight(qubits_, w);
    for (Mask m = 0; m < amps_.size(); ++m)
      if (!support_.contains(m)) amps_[m] = 0.0;
  }

 private:
  StateVector(int qubits, Mask m) : qubits_(qubits), support_(Support::full(0)) {
    check_qubits(qubits);
    require(m < (Mask{1} << qubits), "basis state outside register");
    amps_.assign(std::size_t{1} << qubits, Complex(0.0));
    amps_[m] = 1.0;
    support_ = qubits % 2 == 0
                   ? Support::of_planes(qubits, popcount(m & range_mask(0, qubits / 2)),
                                        popcount(m >> (qubits / 2)))
                   : Support::of_weight(qubits, popcount(m));
  }

  StateVector(int qubits, std::vector<Complex> amps, Support support)
      : qubits_(qubits), amps_(std::move(amps)), support_(std::move(support)) {}

  static void check_qubits(int qubits) {
    require(qubits >= 1 && qubits <= kMaxQubits,
            "qubit count " + std::to_string(qubits) + " outside simulator range");
  }

  int qubits_;
  std::vector<Complex> amps_;
  Support support_;
};

namespace detail {

inline void apply_full_two(std::vector<Complex>& a, int q0, int q1, const Matrix4& u) {
  const Mask b0 = Mask{1} << q0, b1 = Mask{1} << q1;
  const Mask n = a.size();
  for (Mask base = 0; base < n; ++base) {
    if (base & (b0 | b1)) continue;
    const Mask i1 = base | b1, i2 = base | b0, i3 = base | b0 | b1;
    const Complex v0 = a[base], v1 = a[i1], v2 = a[i2], v3 = a[i3];
    a[base] = u[0] * v0 + u[1] * v1 + u[2] * v2 + u[3] * v3;
    a[i1] = u[4] * v0 + u[5] * v1 + u[6] * v2 + u[7] * v3;
    a[i2] = u[8] * v0 + u[9] * v1 + u[10] * v2 + u[11] * v3;
    a[i3] = u[12] * v0 + u[13] * v1 + u[14] * v2 + u[15] * v3;
  }
}

inline void apply_full_single(std::vector<Complex>& a, int q, const Matrix4& u) {
  const Mask b = Mask{1} << q;
  for (Mask base = 0; base < a.size(); ++base) {
    if (base & b) continue;
    const Complex v0 = a[base], v1 = a[base | b];
    a[base] = u[0] * v0 + u[1] * v1;
    a[base | b] = u[2] * v0 + u[3] * v1;
  }
}

}  // namespace detail

inline void apply_gate(StateVector& state, const Gate& g) {
  const int n = state.qubits();
  if (g.q0() >= n || g.q1() >= n)
    throw InvalidArgument("gate addresses qubit outside " + std::to_string(n) + "-qubit state");
  auto& a = state.data();
  const auto& u = g.matrix();

  if (!g.is_two_qubit()) {
    if (g.diagonal()) {
      const Mask b = Mask{1} << g.q0();
      state.support().for_each([&](Mask m) { a[m] *= (m & b) ? u[3] : u[0]; });
      return;
    }
    state.widen_to_full();
    detail::apply_full_single(a, g.q0(), u);
    return;
  }

  if (!g.number_preserving()) {
    state.widen_to_full();
    detail::apply_full_two(a, g.q0(), g.q1(), u);
    return;
  }
  if (g.exchanges() && state.support().kind() == Support::Kind::PlaneWeights) {
    const int half = n / 2;
    if ((g.q0() < half) != (g.q1() < half)) state.widen_to_weight();
  }
  if (state.support().is_full()) {
    detail::apply_full_two(a, g.q0(), g.q1(), u);
    return;
  }
  const Mask b0 = Mask{1} << g.q0(), b1 = Mask{1} << g.q1();
  if (g.diagonal()) {
    state.support().for_each([&](Mask m) {
      const int idx = 2 * ((m & b0) != 0) + ((m & b1) != 0);
      a[m] *= u[5 * idx];
    });
    return;
  }
  state.support().for_each([&](Mask m) {
    const bool x0 = m & b0, x1 = m & b1;
    if (!x0 && !x1) {
      a[m] *= u[0];
    } else if (x0 && x1) {
      a[m] *= u[15];
    } else if (x1) {
      const Mask p = m ^ b0 ^ b1;
      const Complex v1 = a[m], v2 = a[p];
      a[m] = u[5] * v1 + u[6] * v2;
      a[p] = u[9] * v1 + u[10] * v2;
    }
  });
}

struct NoiseModel {
  double p = 0.0;

  explicit NoiseModel(double p_ = 0.0) : p(p_) {
    require(p >= 0.0 && p <= 1.0, "noise probability must lie in [0, 1]");
  }
};

// A Pauli inserted after a two-qubit gate. slot = 2 * (ordinal of the
// two-qubit gate in moment order) + (0 for q0, 1 for q1).
struct NoiseEvent {
  std::size_t slot = 0;
  Pauli pauli = Pauli::X;
  bool operator==(const NoiseEvent&) const = default;
};

inline std::size_t noise_slot_count(const Circuit& c) { return 2 * c.two_qubit_gate_count(); }

// Runs the circuit with the given Pauli insertions (sorted by slot).
inline StateVector run_circuit(StateVector state, const Circuit& circuit,
                               std::span<const NoiseEvent> events) {
  require(state.qubits() == circuit.qubits(), "state and circuit widths differ");
  std::size_t ordinal = 0;
  auto next = events.begin();
  for (const auto& moment : circuit.moments()) {
    for (const auto& g : moment.gates) {
      apply_gate(state, g);
      if (!g.is_two_qubit()) continue;
      for (int k = 0; k < 2; ++k) {
        const std::size_t slot = 2 * ordinal + k;
        while (next != events.end() && next->slot == slot) {
          apply_gate(state, Gate::pauli(k == 0 ? g.q0() : g.q1(), next->pauli));
          ++next;
        }
      }
      ++ordinal;
    }
  }
  require(next == events.end(), "noise event beyond the last gate slot");
  return state;
}

inline Pauli random_pauli(RandomSource& rng) {
  static constexpr Pauli kPaulis[3] = {Pauli::X, Pauli::Y, Pauli::Z};
  return kPaulis[rng.below(3)];
}

// Draws one depolarizing trajectory: each slot independently suffers a
// uniformly chosen Pauli with probability p.
inline std::vector<NoiseEvent> draw_noise(std::size_t slots, double p, RandomSource& rng) {
  std::vector<NoiseEvent> events;
  if (p <= 0.0) return events;
  for (std::size_t s = 0; s < slots; ++s)
    if (rng.bernoulli(p)) events.push_back({s, random_pauli(rng)});
  return events;
}

inline StateVector run_circuit(StateVector initial, const Circuit& circuit,
                               const NoiseModel& noise, RandomSource& rng) {
  const auto events = draw_noise(noise_slot_count(circuit), noise.p, rng);
  return run_circuit(std::move(initial), circuit, events);
}

inline StateVector run_circuit(StateVector initial, const Circuit& circuit) {
  return run_circuit(std::move(initial), circuit, std::span<const NoiseEvent>());
}

// Outcome distribution over the support, zero-probability outcomes dropped.
struct Distribution {
  std::vector<Mask> outcomes;
  std::vector<double> probabilities;

  static Distribution of(const StateVector& state) {
    Distribution d;
    const auto& a = state.amplitudes();
    state.support().for_each([&](Mask m) {
      const double p = std::norm(a[m]);
      if (p > 0.0) {
        d.outcomes.push_back(m);
        d.probabilities.push_back(p);
      }
    });
    double total = 0.0;
    for (double p : d.probabilities) total += p;
    if (!(total > 0.0)) throw InvalidArgument("cannot sample from a zero-norm state");
    for (double& p : d.probabilities) p /= total;
    return d;
  }

  // I.i.d. draws.
  std::vector<Mask> sample(std::size_t shots, RandomSource& rng) const {
    std::vector<double> cumulative(probabilities.size());
    double s = 0.0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) cumulative[k] = s += probabilities[k];
    std::vector<Mask> out;
    out.reserve(shots);
    for (std::size_t i = 0; i < shots; ++i) {
      const double u = rng.uniform() * s;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      if (it == cumulative.end()) --it;
      out.push_back(outcomes[static_cast<std::size_t>(it - cumulative.begin())]);
    }
    return out;
  }

  // Multinomial outcome counts for `shots` draws, as (outcome index, count).
  std::vector<std::pair<std::size_t, std::uint64_t>> sample_counts(std::uint64_t shots,
                                                                   RandomSource& rng) const {
    std::vector<std::pair<std::size_t, std::uint64_t>> out;
    if (shots < probabilities.size()) {
      std::vector<double> cumulative(probabilities.size());
      double s = 0.0;
      for (std::size_t k = 0; k < probabilities.size(); ++k) cumulative[k] = s += probabilities[k];
      std::map<std::size_t, std::uint64_t> counts;
      for (std::uint64_t i = 0; i < shots; ++i) {
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), rng.uniform() * s);
        if (it == cumulative.end()) --it;
        ++counts[static_cast<std::size_t>(it - cumulative.begin())];
      }
      out.assign(counts.begin(), counts.end());
      return out;
    }
    // Conditional binomials: exact multinomial in O(outcomes).
    double remaining_mass = 1.0;
    std::uint64_t remaining = shots;
    for (std::size_t k = 0; k < probabilities.size() && remaining > 0; ++k) {
      std::uint64_t c;
      if (k + 1 == probabilities.size() || probabilities[k] >= remaining_mass) {
        c = remaining;
      } else {
        c = rng.binomial(remaining, probabilities[k] / remaining_mass);
      }
      remaining_mass -= probabilities[k];
      if (c > 0) out.emplace_back(k, c);
      remaining -= c;
    }
    return out;
  }
};

inline std::vector<Mask> sample_bitstrings(const StateVector& state, std::size_t shots,
                                           RandomSource& rng) {
  return Distribution::of(state).sample(shots, rng);
}

// <psi|P|psi> for a Pauli string given by masks; real for Hermitian P.
inline double pauli_expectation(const StateVector& state, Mask x, Mask z, int y_count) {
  static const Complex kIPow[4] = {1.0, Complex(0, 1), -1.0, Complex(0, -1)};
  const auto& a = state.amplitudes();
  Complex acc = 0.0;
  state.support().for_each([&](Mask m) {
    const Complex v = std::conj(a[m ^ x]) * a[m];
    acc += (popcount(m & z) & 1) ? -v : v;
  });
  return (acc * kIPow[y_count & 3]).real();
}

inline double expectation_exact(const StateVector& state, const QubitHamiltonian& h) {
  require(state.qubits() == h.qubits, "Hamiltonian and state sizes differ");
  double e = h.offset;
  for (const auto& t : h.terms)
    e += t.coefficient * pauli_expectation(state, t.x_mask(), t.z_mask(), t.y_count());
  return e;
}

inline Eigen::MatrixXcd dense_matrix(const PauliTerm& t, int qubits) {
  static const Complex kIPow[4] = {1.0, Complex(0, 1), -1.0, Complex(0, -1)};
  const Mask dim = Mask{1} << qubits;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  const Mask x = t.x_mask(), z = t.z_mask();
  const Complex ph = kIPow[t.y_count() & 3];
  for (Mask c = 0; c < dim; ++c)
    m(c ^ x, c) = t.coefficient * ph * ((popcount(c & z) & 1) ? -1.0 : 1.0);
  return m;
}

inline Eigen::MatrixXcd dense_matrix(const QubitHamiltonian& h) {
  require(h.qubits <= 14, "dense matrix limited to 14 qubits");
  const Mask dim = Mask{1} << h.qubits;
  Eigen::MatrixXcd m = h.offset * Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& t : h.terms) m += dense_matrix(t, h.qubits);
  return m;
}

inline Eigen::MatrixXcd circuit_unitary(const Circuit& c) {
  require(c.qubits() <= 12, "unitary reconstruction limited to 12 qubits");
  const Mask dim = Mask{1} << c.qubits();
  Eigen::MatrixXcd u(dim, dim);
  for (Mask col = 0; col < dim; ++col) {
    const auto out = run_circuit(StateVector::basis(c.qubits(), col), c);
    for (Mask row = 0; row < dim; ++row) u(row, col) = out.amplitude(row);
  }
  return u;
}

inline Eigen::Matrix4cd to_eigen(const Matrix4& m) {
  Eigen::Matrix4cd e;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) e(r, c) = m[4 * r + c];
  return e;
}

}  // namespace hvqe
