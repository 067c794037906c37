// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <utility>

#include "hvqe/model.hpp"
#include "hvqe/oracle.hpp"

namespace hvqe {

// Particle number of the lowest-energy sector at t=1, U=2 for the grids
// studied, keyed by (short side, long side).
inline std::optional<int> tabulated_particle_number(int a, int b) {
  static constexpr int kTable[][3] = {
      {1, 2, 2},  {1, 3, 2},  {2, 2, 2},  {1, 4, 3},  {1, 5, 4},  {1, 6, 4},  {2, 3, 4},
      {1, 7, 6},  {1, 8, 6},  {2, 4, 6},  {3, 3, 6},  {1, 9, 7},  {1, 10, 8}, {1, 11, 8},
      {2, 5, 8},  {2, 6, 8},  {1, 12, 9}, {3, 4, 9},
  };
  const int lo = std::min(a, b), hi = std::max(a, b);
  for (const auto& row : kTable)
    if (row[0] == lo && row[1] == hi) return row[2];
  return std::nullopt;
}

// Splits eta as evenly as possible, the extra particle spin-up.
inline OccupationSector balanced_sector(int eta) { return {(eta + 1) / 2, eta / 2}; }

struct OccupationOptions {
  // Skip the table and diagonalize every sector.
  bool brute_force = false;
  OracleOptions oracle;
};

// Lowest-energy sector over all (n_up >= n_down). Ties within 1e-9 go to the
// smaller |n_up - n_down|, then to the smaller particle number.
inline OccupationSector sweep_occupation(const HubbardModel& model,
                                         const OracleOptions& oracle = {}) {
  const int n = model.sites();
  std::optional<std::pair<double, OccupationSector>> best;
  for (int up = 0; up <= n; ++up) {
    for (int dn = 0; dn <= up; ++dn) {
      const OccupationSector s{up, dn};
      const std::size_t dim = binomial(n, up) * binomial(n, dn);
      if (dim > oracle.dimension_cap)
        throw CapacityError("occupation sweep needs sector (" + std::to_string(up) + "," +
                            std::to_string(dn) + ") of dimension " + std::to_string(dim) +
                            " above cap " + std::to_string(oracle.dimension_cap));
      const double e = exact_ground_state(model, s, oracle).energy;
      if (!best || e < best->first - 1e-9) {
        best = {e, s};
      } else if (std::abs(e - best->first) <= 1e-9) {
        const auto& b = best->second;
        const auto key = [](OccupationSector x) {
          return std::make_pair(x.n_up - x.n_down, x.eta());
        };
        if (key(s) < key(b)) best = {e, s};
      }
    }
  }
  return best->second;
}

inline OccupationSector optimal_occupation(const HubbardModel& model,
                                           const OccupationOptions& options = {}) {
  const bool paper_couplings = model.t == 1.0 && model.U == 2.0;
  if (!options.brute_force && paper_couplings) {
    if (auto eta = tabulated_particle_number(model.geometry.n_x(), model.geometry.n_y()))
      return balanced_sector(*eta);
  }
  return sweep_occupation(model, options.oracle);
}

}  // namespace hvqe
