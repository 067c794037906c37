// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hvqe/ansatz.hpp"
#include "hvqe/measurement.hpp"
#include "hvqe/optimize.hpp"
#include "hvqe/simulator.hpp"

namespace hvqe {

// An ansatz applied to a fixed initial state, with energy objectives for the
// optimizers: exact (m = 0), sampled, or sampled under circuit noise.
class VqeProblem {
 public:
  VqeProblem(AnsatzSpec spec, const InitialStateSpec& init)
      : spec_(std::move(spec)),
        initial_(initial_state(spec_.model, init)),
        estimator_(spec_.model) {}

  const AnsatzSpec& spec() const { return spec_; }
  const StateVector& initial() const { return initial_; }
  const EnergyEstimator& estimator() const { return estimator_; }
  std::size_t dimension() const { return static_cast<std::size_t>(spec_.parameter_count()); }

  Circuit circuit(std::span<const double> params) const { return ansatz_circuit(spec_, params); }

  StateVector state(std::span<const double> params) const {
    return ansatz_state(initial_, circuit(params));
  }

  double energy(std::span<const double> params) const {
    return exact_energy(state(params), spec_.model);
  }

  // Sampled estimate; noise with p > 0 switches to trajectory sampling.
  EnergyEstimate estimate(std::span<const double> params, const MeasurementConfig& config,
                          const NoiseModel& noise, RandomSource& rng) const {
    const Circuit c = circuit(params);
    if (noise.p > 0.0 || config.error_detection)
      return estimator_.sample_noisy(initial_, c, noise, config, rng);
    return estimator_.sample(ansatz_state(initial_, c), config, rng);
  }

  // Objective over the parameters. The returned function keeps a reference
  // to this problem and to rng.
  Objective objective(const MeasurementConfig& base, const NoiseModel& noise,
                      RandomSource& rng) const {
    Objective f;
    f.dimension = dimension();
    f.deterministic = false;
    f.evaluate = [this, base, noise, &rng](std::span<const double> x, std::uint64_t m) {
      if (m == 0) return Evaluation{energy(x), 0, 0};
      MeasurementConfig cfg = base;
      cfg.m = m;
      const auto e = estimate(x, cfg, noise, rng);
      return Evaluation{e.value, m, e.circuit_evaluations()};
    };
    return f;
  }

  // Deterministic objective with exact energies.
  Objective exact_objective() const {
    Objective f;
    f.dimension = dimension();
    f.deterministic = true;
    f.evaluate = [this](std::span<const double> x, std::uint64_t) {
      return Evaluation{energy(x), 0, 0};
    };
    return f;
  }

  std::vector<CoordinateSpec> coordinates() const {
    std::vector<CoordinateSpec> out;
    for (const auto& f : parameter_frequencies(spec_)) out.push_back({f.degree, f.unit});
    return out;
  }

 private:
  AnsatzSpec spec_;
  StateVector initial_;
  EnergyEstimator estimator_;
};

}  // namespace hvqe
