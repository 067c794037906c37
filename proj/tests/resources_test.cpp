// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "hvqe/resources.hpp"

using namespace hvqe;

TEST(Resources, LayerDepthExamples) {
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::FullyConnected, 4), 9);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::FullyConnected, 5), 12);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::FullyConnected, 6), 13);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::Sycamore, 4), 25);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::Sycamore, 5), 32);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::Sycamore, 6), 37);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::NearestNeighbourInterlaced, 4), 17);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::NearestNeighbourSeparated, 4), 15);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::NearestNeighbourSeparated, 5), 20);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::NearestNeighbourTabulated, 4), 16);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::NearestNeighbourTabulated, 5), 21);
  EXPECT_EQ(ansatz_depth_per_layer(Architecture::NearestNeighbourTabulated, 6), 24);
  EXPECT_THROW(ansatz_depth_per_layer(Architecture::FullyConnected, 1), InvalidArgument);
}

TEST(Resources, DepthMonotoneInWidth) {
  for (auto a : all_architectures())
    for (int n = 2; n < 20; ++n)
      EXPECT_LE(ansatz_depth_per_layer(a, n), ansatz_depth_per_layer(a, n + 1)) << to_string(a);
}

TEST(Resources, FullyConnectedFormulaMatchesConstruction) {
  for (int nx = 2; nx <= 6; ++nx)
    for (int ny : {2, 3, 4}) {
      const HubbardModel m(LatticeGeometry(nx, ny));
      const AnsatzSpec spec(AnsatzKind::EHV, 1, m);
      const auto c = ansatz_circuit(spec, default_parameters(spec));
      EXPECT_EQ(static_cast<int>(circuit_depth(c)),
                ansatz_depth_per_layer(Architecture::FullyConnected, nx))
          << nx << "x" << ny;
    }
}

TEST(Resources, GateCountFormula) {
  EXPECT_EQ(total_gate_count(2, 4, 2), 144);
  EXPECT_EQ(total_gate_count(2, 2, 1), 36);
  EXPECT_EQ(total_gate_count(5, 5, 10), 3601);
  EXPECT_THROW(total_gate_count(2, 2, 0), InvalidArgument);
}

TEST(Resources, RefinedTwoByFourCount) {
  const HubbardModel m(LatticeGeometry(2, 4));
  const auto count = constructed_gate_count(m, 2);
  EXPECT_EQ(count.ansatz, 72);
  EXPECT_LE(count.measurement, 8);
  EXPECT_LE(count.total(), 136);
  EXPECT_GE(total_gate_count(2, 4, 2), 136);
}

TEST(Resources, FormulaBoundsConstruction) {
  for (int nx = 2; nx <= 5; ++nx)
    for (int ny = nx; ny <= 5; ++ny)
      for (int layers : {1, 3}) {
        const HubbardModel m(LatticeGeometry(nx, ny));
        EXPECT_LE(constructed_gate_count(m, layers).total(), total_gate_count(nx, ny, layers))
            << nx << "x" << ny << " L=" << layers;
      }
}

TEST(Resources, InitialStateComparisonTable) {
  const auto a = initial_state_depth_comparison(4, 4);
  EXPECT_EQ(a.predicted, 82);
  EXPECT_EQ(a.modified_swap_network, 27);
  EXPECT_EQ(a.givens, 15);
  const auto b = initial_state_depth_comparison(6, 6);
  EXPECT_EQ(b.predicted, 126);
  EXPECT_EQ(b.modified_swap_network, 65);
  EXPECT_EQ(b.givens, 35);
  const auto c = initial_state_depth_comparison(8, 8);
  EXPECT_EQ(c.predicted, 170);
  EXPECT_EQ(c.modified_swap_network, 119);
  EXPECT_EQ(c.givens, 63);
  EXPECT_EQ(initial_state_depth_comparison(1, 7).givens, 6);
  EXPECT_EQ(a.naive, 3 + 3 * 16);
}

TEST(Resources, Crossover) {
  EXPECT_TRUE(crossover_condition(2));
  EXPECT_TRUE(crossover_condition(11));
  EXPECT_FALSE(crossover_condition(12));
  EXPECT_EQ(crossover_limit(), 11);
}

TEST(Resources, CsvSchema) {
  std::ostringstream out;
  write_initial_state_csv(out, {initial_state_depth_comparison(4, 4)});
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("grid,column,value,rule\n", 0), 0u);
  EXPECT_NE(s.find("4x4,predicted,82,"), std::string::npos);
  EXPECT_NE(s.find("4x4,givens,15,"), std::string::npos);

  std::ostringstream d;
  write_depth_csv(d, {depth_report(Architecture::Sycamore, 6, 6, 2)});
  EXPECT_NE(d.str().find("6x6,sycamore_layer_depth,37,"), std::string::npos);
  const auto r = depth_report(Architecture::FullyConnected, 4, 4, 3);
  EXPECT_EQ(r.total_depth(), 15 + 27 + 1);
}
