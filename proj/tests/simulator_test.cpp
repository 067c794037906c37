// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "hvqe/simulator.hpp"
#include "test_support.hpp"

using namespace hvqe;
using testing_support::to_eigen;

namespace {

// |b0 b1> on qubits (0, 1) as a mask.
Mask ket(int b0, int b1) { return Mask(b0) | (Mask(b1) << 1); }

bool is_unitary(const Gate& g) {
  const int d = g.is_two_qubit() ? 4 : 2;
  Eigen::MatrixXcd m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = g.at(r, c);
  return (m.adjoint() * m - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12;
}

StateVector random_state(int qubits, RandomSource& rng) {
  std::vector<Complex> a(std::size_t{1} << qubits);
  double n = 0;
  for (auto& x : a) {
    x = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    n += std::norm(x);
  }
  for (auto& x : a) x /= std::sqrt(n);
  return StateVector::from_amplitudes(qubits, a);
}

}  // namespace

TEST(Gates, AllFactoriesAreUnitary) {
  RandomSource rng(3);
  for (int k = 0; k < 20; ++k) {
    const double th = rng.uniform(-4, 4), ph = rng.uniform(-4, 4);
    EXPECT_TRUE(is_unitary(Gate::number_preserving(0, 1, th, ph)));
    EXPECT_TRUE(is_unitary(fused_fswap_number_preserving(0, 1, th, ph)));
  }
  EXPECT_TRUE(is_unitary(Gate::fswap(0, 1)));
  EXPECT_TRUE(is_unitary(Gate::basis_change(0, 1)));
  EXPECT_TRUE(is_unitary(Gate::cnot(0, 1)));
  EXPECT_TRUE(is_unitary(Gate::hadamard(0)));
  for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) EXPECT_TRUE(is_unitary(Gate::pauli(0, p)));
  EXPECT_TRUE(Gate::number_preserving(0, 1, 0.3, 0.2).number_preserving());
  EXPECT_TRUE(Gate::fswap(0, 1).number_preserving());
  EXPECT_TRUE(Gate::basis_change(0, 1).number_preserving());
  EXPECT_FALSE(Gate::cnot(0, 1).number_preserving());
}

TEST(Gates, RejectsRepeatedQubit) { EXPECT_THROW(Gate::fswap(2, 2), InvalidArgument); }

TEST(ApplyGate, NumberPreservingZeroIsIdentity) {
  RandomSource rng(1);
  auto s = random_state(3, rng);
  const auto before = to_eigen(s);
  apply_gate(s, Gate::number_preserving(0, 2, 0.0, 0.0));
  EXPECT_LT((to_eigen(s) - before).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ApplyGate, FswapActions) {
  auto s = StateVector::basis(2, ket(1, 1));
  apply_gate(s, Gate::fswap(0, 1));
  EXPECT_NEAR(std::abs(s.amplitude(ket(1, 1)) + 1.0), 0.0, 1e-15);
  auto t = StateVector::basis(2, ket(0, 1));
  apply_gate(t, Gate::fswap(0, 1));
  EXPECT_NEAR(std::abs(t.amplitude(ket(1, 0)) - 1.0), 0.0, 1e-15);
}

TEST(ApplyGate, NumberPreservingQuarterTurn) {
  auto s = StateVector::basis(2, ket(0, 1));
  apply_gate(s, Gate::number_preserving(0, 1, kPi / 2, 0.0));
  EXPECT_NEAR(std::abs(s.amplitude(ket(1, 0)) - Complex(0, 1)), 0.0, 1e-15);
}

TEST(ApplyGate, OutOfRangeThrows) {
  StateVector s(2);
  EXPECT_THROW(apply_gate(s, Gate::fswap(0, 2)), InvalidArgument);
}

TEST(ApplyGate, FusedGateIdentity) {
  // FSWAP * U(theta, phi) = (Z^{3/2} (x) Z^{3/2}) * U(theta + pi/2, phi)
  const Eigen::Vector4cd zz(1.0, Complex(0, -1), Complex(0, -1), -1.0);
  for (double th : {0.0, 0.4, -1.3}) {
    for (double ph : {0.0, 0.7}) {
      const auto lhs = to_eigen(fused_fswap_number_preserving(0, 1, th, ph).matrix());
      const Eigen::Matrix4cd rhs =
          zz.asDiagonal() * to_eigen(Gate::number_preserving(0, 1, th + kPi / 2, ph).matrix());
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(ApplyGate, BasisChangeProperties) {
  const auto u = to_eigen(Gate::basis_change(0, 1).matrix());
  Eigen::Matrix4cd zz = Eigen::Matrix4cd::Zero(), hop = Eigen::Matrix4cd::Zero(),
                   target = Eigen::Matrix4cd::Zero();
  zz.diagonal() << 1, -1, -1, 1;
  hop(1, 2) = hop(2, 1) = 1.0;  // (XX+YY)/2
  target(1, 1) = 1.0;            // |01><01|
  target(2, 2) = -1.0;           // |10><10|
  EXPECT_LT((u.adjoint() * zz * u - zz).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((u * hop * u.adjoint() - target).cwiseAbs().maxCoeff(), 1e-14);
  // Matches CNOT(0->1), controlled-H(control 1, target 0), CNOT(0->1).
  Circuit c(2);
  c.add_moment({Gate::cnot(0, 1)});
  const double r = 1 / std::sqrt(2.0);
  Matrix4 ch{};
  ch[0] = 1.0;
  ch[10] = 1.0;  // |10> unchanged
  ch[5] = r;
  ch[7] = r;
  ch[13] = r;
  ch[15] = -r;
  c.add_moment({Gate::two_qubit(0, 1, ch)});
  c.add_moment({Gate::cnot(0, 1)});
  // circuit_unitary indexes by mask (bit q = qubit q); gate matrices by 2*b0+b1.
  Eigen::Matrix4cd swap01 = Eigen::Matrix4cd::Zero();
  swap01(0, 0) = swap01(1, 2) = swap01(2, 1) = swap01(3, 3) = 1.0;
  EXPECT_LT((circuit_unitary(c) - swap01 * u * swap01).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ApplyGate, SupportFastPathMatchesFullKernel) {
  // Random number-preserving circuits on 8 qubits, including cross-plane
  // exchanges, evaluated with and without the support shortcut.
  RandomSource rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    StateVector fast = StateVector::basis(8, 0b00110101);
    std::vector<Complex> raw(fast.amplitudes());
    for (int k = 0; k < 40; ++k) {
      const int a = static_cast<int>(rng.below(8));
      int b = static_cast<int>(rng.below(7));
      if (b >= a) ++b;
      Gate g = Gate::fswap(a, b);
      switch (rng.below(4)) {
        case 0: g = Gate::number_preserving(a, b, rng.uniform(-3, 3), rng.uniform(-3, 3)); break;
        case 1: g = Gate::number_preserving(a, b, 0.0, rng.uniform(-3, 3)); break;
        case 2: g = fused_fswap_number_preserving(a, b, rng.uniform(-3, 3), 0.2); break;
        default: break;
      }
      apply_gate(fast, g);
      detail::apply_full_two(raw, g.q0(), g.q1(), g.matrix());
    }
    double diff = 0;
    for (Mask m = 0; m < raw.size(); ++m) diff = std::max(diff, std::abs(raw[m] - fast.amplitude(m)));
    EXPECT_LT(diff, 1e-12);
    EXPECT_NEAR(fast.norm(), 1.0, 1e-10);
    ASSERT_TRUE(fast.sector_weight().has_value());
    EXPECT_EQ(*fast.sector_weight(), 4);
    for (Mask m = 0; m < raw.size(); ++m) {
      if (!fast.support().contains(m)) {
        EXPECT_EQ(fast.amplitude(m), Complex(0.0));
      }
    }
  }
}

TEST(ApplyGate, NumberConservationKeepsPlaneSupport) {
  RandomSource rng(5);
  StateVector s = StateVector::basis(8, 0b00010011);
  for (int k = 0; k < 50; ++k) {
    const int plane = static_cast<int>(rng.below(2)) * 4;
    const int a = plane + static_cast<int>(rng.below(3));
    apply_gate(s, rng.bernoulli(0.5) ? Gate::fswap(a, a + 1)
                                     : Gate::number_preserving(a, a + 1, rng.uniform(-2, 2),
                                                               rng.uniform(-2, 2)));
  }
  EXPECT_EQ(s.support().kind(), Support::Kind::PlaneWeights);
  EXPECT_EQ(s.support().n_up(), 2);
  EXPECT_EQ(s.support().n_down(), 1);
  EXPECT_NEAR(s.norm(), 1.0, 1e-10);
}

TEST(ApplyGate, InferSupportRecoversSector) {
  StateVector s = StateVector::basis(4, 0b0101);
  apply_gate(s, Gate::cnot(0, 1));
  EXPECT_TRUE(s.support().is_full());
  apply_gate(s, Gate::cnot(0, 1));
  s.infer_support();
  EXPECT_EQ(s.support().kind(), Support::Kind::PlaneWeights);
}

TEST(RunCircuit, EmptyCircuitReturnsInput) {
  RandomSource rng(2);
  auto s = random_state(3, rng);
  Circuit c(3);
  EXPECT_EQ(circuit_depth(c), 0u);
  const auto out = run_circuit(s, c, NoiseModel(0.5), rng);
  EXPECT_LT((to_eigen(out) - to_eigen(s)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RunCircuit, CertainNoiseHitsEveryTouchedQubitOnce) {
  RandomSource rng(4);
  for (int k = 0; k < 20; ++k) {
    const auto events = draw_noise(2, 1.0, rng);
    ASSERT_EQ(events.size(), 2u);
    EXPECT_EQ(events[0].slot, 0u);
    EXPECT_EQ(events[1].slot, 1u);
  }
  Circuit c(2);
  c.add_moment({Gate::number_preserving(0, 1, 0, 0)});
  const auto out = run_circuit(StateVector(2), c, NoiseModel(1.0), rng);
  // Each qubit got exactly one of X/Y/Z, so the output is a basis state.
  int nonzero = 0;
  for (Mask m = 0; m < 4; ++m) nonzero += std::abs(out.amplitude(m)) > 1e-12;
  EXPECT_EQ(nonzero, 1);
}

TEST(RunCircuit, DepolarizedZMatchesChannel) {
  const double p = 0.3;
  Circuit c(2);
  c.add_moment({Gate::number_preserving(0, 1, 0, 0)});
  RandomSource rng(99);
  const int n = 100000;
  double z0 = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto out = run_circuit(StateVector(2), c, NoiseModel(p), rng);
    z0 += pauli_expectation(out, 0, 1, 0);
  }
  z0 /= n;
  const double expected = 1 - 4 * p / 3;
  const double sigma = std::sqrt((1 - expected * expected) / n);
  EXPECT_NEAR(z0, expected, 3 * sigma);
}

TEST(RunCircuit, TrajectoryAverageMatchesDensityMatrix) {
  // Entangling gate then depolarizing noise, compared with the Kraus map.
  const double p = 0.2;
  Circuit c(2);
  c.add_moment({Gate::single(0, {std::cos(0.4), -std::sin(0.4), std::sin(0.4), std::cos(0.4)})});
  c.add_moment({Gate::number_preserving(0, 1, 0.7, 0.3)});
  const auto clean = run_circuit(StateVector::basis(2, ket(1, 0)), c);
  Eigen::Vector4cd psi = to_eigen(clean);
  Eigen::Matrix4cd rho = psi * psi.adjoint();
  auto kraus = [&](int q) {
    Eigen::Matrix4cd out = (1 - p) * rho;
    for (Pauli pp : {Pauli::X, Pauli::Y, Pauli::Z}) {
      Circuit pc(2);
      pc.add_moment({Gate::pauli(q, pp)});
      const Eigen::MatrixXcd u = circuit_unitary(pc);
      out += (p / 3) * u * rho * u.adjoint();
    }
    rho = out;
  };
  kraus(0);
  kraus(1);
  PauliTerm obs{1.0, {{0, Pauli::X}, {1, Pauli::Y}}};
  const double exact = (dense_matrix(obs, 2) * rho).trace().real();
  PauliTerm obs2{1.0, {{0, Pauli::Z}}};
  const double exact2 = (dense_matrix(obs2, 2) * rho).trace().real();
  RandomSource rng(7);
  const int n = 100000;
  double acc = 0, acc2 = 0;
  for (int k = 0; k < n; ++k) {
    const auto out = run_circuit(StateVector::basis(2, ket(1, 0)), c, NoiseModel(p), rng);
    acc += pauli_expectation(out, obs.x_mask(), obs.z_mask(), obs.y_count());
    acc2 += pauli_expectation(out, obs2.x_mask(), obs2.z_mask(), obs2.y_count());
  }
  EXPECT_NEAR(acc / n, exact, 4.0 / std::sqrt(n));
  EXPECT_NEAR(acc2 / n, exact2, 4.0 / std::sqrt(n));
}

TEST(RunCircuit, SameSeedSameTrajectory) {
  Circuit c(4);
  c.add_moment({Gate::number_preserving(0, 1, 0.3, 0.1), Gate::fswap(2, 3)});
  c.add_moment({Gate::number_preserving(1, 2, 0.5, 0.2)});
  RandomSource a(123), b(123);
  for (int k = 0; k < 50; ++k) {
    const auto x = run_circuit(StateVector::basis(4, 0b0011), c, NoiseModel(0.3), a);
    const auto y = run_circuit(StateVector::basis(4, 0b0011), c, NoiseModel(0.3), b);
    EXPECT_EQ(x.amplitudes(), y.amplitudes());
  }
}

TEST(Sampling, AllZeroState) {
  RandomSource rng(1);
  const auto s = sample_bitstrings(StateVector(4), 100, rng);
  ASSERT_EQ(s.size(), 100u);
  for (Mask m : s) EXPECT_EQ(m, 0u);
}

TEST(Sampling, BalancedSuperposition) {
  std::vector<Complex> a(4, 0.0);
  a[ket(0, 1)] = a[ket(1, 0)] = 1 / std::sqrt(2.0);
  const auto s = StateVector::from_amplitudes(2, a);
  RandomSource rng(8);
  const auto draws = sample_bitstrings(s, 10000, rng);
  const double f = std::count(draws.begin(), draws.end(), ket(0, 1)) / 10000.0;
  EXPECT_NEAR(f, 0.5, 0.015);
  for (Mask m : draws) EXPECT_EQ(popcount(m), 1);
}

TEST(Sampling, CountsAreMultinomial) {
  RandomSource rng(21);
  auto s = random_state(4, rng);
  const auto d = Distribution::of(s);
  for (std::uint64_t shots : {5ull, 100000ull}) {
    std::vector<double> freq(d.outcomes.size(), 0.0);
    std::uint64_t total = 0;
    const int reps = shots < 100 ? 20000 : 5;
    for (int r = 0; r < reps; ++r) {
      for (auto [k, c] : d.sample_counts(shots, rng)) {
        freq[k] += c;
        total += c;
      }
    }
    EXPECT_EQ(total, shots * reps);
    for (std::size_t k = 0; k < freq.size(); ++k) {
      const double p = d.probabilities[k];
      const double sigma = std::sqrt(p * (1 - p) / double(total));
      EXPECT_NEAR(freq[k] / double(total), p, 5 * sigma + 1e-12);
    }
  }
}

TEST(Sampling, ZeroNormRejected) {
  EXPECT_THROW(StateVector::from_amplitudes(1, {0.0, 0.0}), InvalidArgument);
}

TEST(Expectation, HoppingOperatorOnSmallStates) {
  PauliTerm xx{0.5, {{0, Pauli::X}, {1, Pauli::X}}};
  PauliTerm yy{0.5, {{0, Pauli::Y}, {1, Pauli::Y}}};
  QubitHamiltonian h{2, 0.0, {xx, yy}};
  EXPECT_NEAR(expectation_exact(StateVector(2), h), 0.0, 1e-15);
  std::vector<Complex> a(4, 0.0);
  a[ket(0, 1)] = a[ket(1, 0)] = 1 / std::sqrt(2.0);
  EXPECT_NEAR(expectation_exact(StateVector::from_amplitudes(2, a), h), 1.0, 1e-14);
}

TEST(Expectation, MatchesDenseContraction) {
  RandomSource rng(17);
  auto s = random_state(4, rng);
  const auto h = jordan_wigner_encode(HubbardModel(LatticeGeometry(1, 2), 1.0, 2.0));
  const Eigen::VectorXcd v = to_eigen(s);
  const Complex ref = v.adjoint() * dense_matrix(h) * v;
  EXPECT_NEAR(expectation_exact(s, h), ref.real(), 1e-12);
  EXPECT_LT(std::abs(ref.imag()), 1e-10);
}

TEST(Circuit, DepthCountsOnlyTwoQubitMoments) {
  Circuit c(3);
  c.add_moment({Gate::hadamard(0)});
  c.add_moment({Gate::fswap(0, 1)});
  c.add_moment({Gate::hadamard(2)});
  c.add_moment({Gate::fswap(1, 2)});
  EXPECT_EQ(circuit_depth(c), 2u);
  EXPECT_THROW(c.add_moment({Gate::fswap(0, 1), Gate::hadamard(1)}), InvalidArgument);
  EXPECT_THROW(c.add_moment({Gate::hadamard(3)}), InvalidArgument);
}

TEST(Circuit, PackedAppendIsAsap) {
  Circuit c(4);
  c.append_packed(Gate::fswap(0, 1));
  c.append_packed(Gate::fswap(2, 3));
  c.append_packed(Gate::fswap(1, 2));
  c.append_packed(Gate::hadamard(0));
  EXPECT_EQ(c.moments().size(), 2u);
  EXPECT_EQ(c.moments()[0].gates.size(), 2u);
  EXPECT_EQ(c.moments()[1].gates.size(), 2u);
}
