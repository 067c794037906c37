// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hvqe/common.hpp"
#include "hvqe/model.hpp"
#include "hvqe/simulator.hpp"

namespace hvqe {

// One computational-basis measurement covering a commuting group. Hopping
// groups get a basis-change gate on every pair, after which a pair reads
// +1 on |01>, -1 on |10> (bits of i, j), times the parity of the string.
struct MeasurementSetting {
  TermGroup group;
  double coefficient = 0.0;

  bool hopping() const { return is_hopping(group.kind); }

  std::vector<Gate> basis_change() const {
    std::vector<Gate> gates;
    if (hopping())
      for (const auto& p : group.pairs) gates.push_back(Gate::basis_change(p.i, p.j));
    return gates;
  }

  // Sum of the group's term values (without coefficient) on one sample.
  double readout(Mask sample) const {
    double v = 0.0;
    for (const auto& p : group.pairs) {
      const bool bi = bit(sample, p.i), bj = bit(sample, p.j);
      if (!hopping()) {
        v += (bi && bj) ? 1.0 : 0.0;
        continue;
      }
      if (bi == bj) continue;
      const double sign = popcount(sample & p.between()) % 2 ? -1.0 : 1.0;
      v += (bj ? 1.0 : -1.0) * sign;
    }
    return v;
  }
};

inline std::vector<MeasurementSetting> build_measurement_settings(const HubbardModel& model) {
  require(model.modes() <= 64, "measurement settings support at most 64 modes");
  std::vector<MeasurementSetting> out;
  for (auto& g : group_commuting_terms(model)) {
    const double c = g.kind == TermKind::Onsite ? model.U : -model.t;
    out.push_back({std::move(g), c});
  }
  return out;
}

struct MeasurementConfig {
  // Energy measurements per estimate, i.e. shots per setting.
  std::uint64_t m = 1000;
  bool error_detection = false;
  // Expected Hamming weight; taken from the initial state when unset.
  std::optional<int> eta;
  // Error detection gives up once discards exceed this multiple of m.
  double max_discard_ratio = 1000.0;
};

struct GroupTally {
  TermKind kind = TermKind::Onsite;
  std::uint64_t valid = 0;
  std::uint64_t discarded = 0;
  double mean = 0.0;
};

struct EnergyEstimate {
  double value = 0.0;
  std::vector<GroupTally> groups;

  std::uint64_t discarded() const {
    std::uint64_t d = 0;
    for (const auto& g : groups) d += g.discarded;
    return d;
  }
  // Circuit evaluations, discarded ones included.
  std::uint64_t circuit_evaluations() const {
    std::uint64_t n = discarded();
    for (const auto& g : groups) n += g.valid;
    return n;
  }
};

// <H> evaluated directly on the amplitudes.
inline double exact_energy(const StateVector& state, const HubbardModel& model) {
  const auto& a = state.amplitudes();
  double e = 0.0;
  for (const auto& term : build_hubbard_terms(model, true)) {
    const Mask bi = Mask{1} << term.i, bj = Mask{1} << term.j;
    if (term.kind == TermKind::Onsite) {
      state.support().for_each([&](Mask m) {
        if ((m & bi) && (m & bj)) e += term.coefficient * std::norm(a[m]);
      });
      continue;
    }
    const Mask string = range_mask(term.i + 1, term.j);
    state.support().for_each([&](Mask m) {
      if (!(m & bj) || (m & bi)) return;
      const Mask to = m ^ bi ^ bj;
      const double sign = popcount(m & string) % 2 ? -1.0 : 1.0;
      e += 2.0 * term.coefficient * sign * std::real(std::conj(a[to]) * a[m]);
    });
  }
  return e;
}

inline double double_occupancy(const StateVector& state) {
  const int n = state.qubits() / 2;
  const Mask low = range_mask(0, n);
  const auto& a = state.amplitudes();
  double d = 0.0;
  state.support().for_each([&](Mask m) { d += popcount(m & low & (m >> n)) * std::norm(a[m]); });
  return d;
}

inline double sampled_double_occupancy(std::span<const Mask> onsite_samples, int qubits) {
  require(!onsite_samples.empty(), "no samples for double occupancy");
  const int n = qubits / 2;
  const Mask low = range_mask(0, n);
  double d = 0.0;
  for (Mask m : onsite_samples) d += popcount(m & low & (m >> n));
  return d / static_cast<double>(onsite_samples.size());
}

struct FilterResult {
  std::vector<Mask> kept;
  std::uint64_t discarded = 0;
};

inline FilterResult error_detect_filter(std::span<const Mask> samples, int eta) {
  FilterResult r;
  for (Mask m : samples) {
    if (popcount(m) == eta)
      r.kept.push_back(m);
    else
      ++r.discarded;
  }
  return r;
}

namespace detail {

// Noise events of one trajectory conditioned on at least one error among
// `slots` slots, each failing independently with probability p.
inline std::vector<NoiseEvent> draw_conditioned_noise(std::size_t slots, double p,
                                                      RandomSource& rng) {
  std::vector<NoiseEvent> events;
  if (slots == 0 || p <= 0.0) return events;
  if (p >= 1.0) {
    for (std::size_t s = 0; s < slots; ++s) events.push_back({s, random_pauli(rng)});
    return events;
  }
  const double log_keep = std::log1p(-p);
  const double q = -std::expm1(static_cast<double>(slots) * log_keep);
  auto first = static_cast<std::size_t>(std::floor(std::log1p(-rng.uniform() * q) / log_keep));
  first = std::min(first, slots - 1);
  events.push_back({first, random_pauli(rng)});
  double s = static_cast<double>(first) + 1.0;
  while (true) {
    s += std::floor(std::log1p(-rng.uniform()) / log_keep);
    if (s >= static_cast<double>(slots)) break;
    events.push_back({static_cast<std::size_t>(s), random_pauli(rng)});
    s += 1.0;
  }
  return events;
}

}  // namespace detail

// Samples energy estimates for one ansatz circuit. The noiseless final state
// is simulated once; shots without a circuit error come from its per-setting
// distributions and errorful trajectories are simulated individually.
class EnergyEstimator {
 public:
  explicit EnergyEstimator(const HubbardModel& model)
      : model_(model), settings_(build_measurement_settings(model)) {}

  const HubbardModel& model() const { return model_; }
  const std::vector<MeasurementSetting>& settings() const { return settings_; }

  // Circuit followed by the setting's basis-change moment.
  Circuit measured_circuit(const Circuit& circuit, std::size_t setting) const {
    Circuit c = circuit;
    auto gates = settings_.at(setting).basis_change();
    if (!gates.empty()) c.add_moment(std::move(gates));
    return c;
  }

  // Outcome distribution of each setting for a final state.
  std::vector<Distribution> distributions(const StateVector& final_state) const {
    std::vector<Distribution> out;
    for (const auto& s : settings_) {
      StateVector rotated = final_state;
      for (const auto& g : s.basis_change()) apply_gate(rotated, g);
      out.push_back(Distribution::of(rotated));
    }
    return out;
  }

  // Exact expectation assembled from the setting distributions.
  double expectation(const std::vector<Distribution>& dists) const {
    double e = 0.0;
    for (std::size_t k = 0; k < settings_.size(); ++k) {
      double mean = 0.0;
      for (std::size_t o = 0; o < dists[k].outcomes.size(); ++o)
        mean += dists[k].probabilities[o] * settings_[k].readout(dists[k].outcomes[o]);
      e += settings_[k].coefficient * mean;
    }
    return e;
  }

  // Noiseless estimate with m shots per setting.
  EnergyEstimate sample(const std::vector<Distribution>& dists, const MeasurementConfig& config,
                        RandomSource& rng) const {
    require(config.m >= 1, "measurement count m must be at least 1");
    EnergyEstimate est;
    for (std::size_t k = 0; k < settings_.size(); ++k) {
      double sum = 0.0;
      for (auto [o, count] : dists[k].sample_counts(config.m, rng))
        sum += static_cast<double>(count) * settings_[k].readout(dists[k].outcomes[o]);
      finish(est, k, sum, config.m, 0);
    }
    return est;
  }

  EnergyEstimate sample(const StateVector& final_state, const MeasurementConfig& config,
                        RandomSource& rng) const {
    return sample(distributions(final_state), config, rng);
  }

  // Estimate under depolarizing noise: each of the m shots per setting is a
  // trajectory of the measured circuit. With error detection, shots of the
  // wrong Hamming weight are discarded and replaced.
  EnergyEstimate sample_noisy(const StateVector& initial, const Circuit& circuit,
                              const NoiseModel& noise, const MeasurementConfig& config,
                              RandomSource& rng) const {
    require(config.m >= 1, "measurement count m must be at least 1");
    const auto dists = distributions(run_circuit(initial, circuit));
    const int eta = expected_weight(initial, config);
    EnergyEstimate est;
    for (std::size_t k = 0; k < settings_.size(); ++k) {
      const Circuit measured = measured_circuit(circuit, k);
      const std::size_t slots = noise_slot_count(measured);
      const double q = noise.p >= 1.0 ? 1.0
                                      : -std::expm1(static_cast<double>(slots) * std::log1p(-noise.p));
      std::uint64_t need = config.m, discarded = 0;
      double sum = 0.0;
      while (need > 0) {
        const std::uint64_t errorful = slots == 0 ? 0 : rng.binomial(need, q);
        for (auto [o, count] : dists[k].sample_counts(need - errorful, rng))
          sum += static_cast<double>(count) * settings_[k].readout(dists[k].outcomes[o]);
        std::uint64_t invalid = 0;
        for (std::uint64_t e = 0; e < errorful; ++e) {
          const auto events = detail::draw_conditioned_noise(slots, noise.p, rng);
          const Mask shot = trajectory_shot(initial, measured, events, rng);
          if (config.error_detection && popcount(shot) != eta) {
            ++invalid;
            continue;
          }
          sum += settings_[k].readout(shot);
        }
        discarded += invalid;
        need = invalid;
        if (static_cast<double>(discarded) > config.max_discard_ratio * static_cast<double>(config.m))
          throw ComputationError("error detection discarded " + std::to_string(discarded) +
                                 " runs without collecting " + std::to_string(config.m) +
                                 " valid measurements (noise p = " + std::to_string(noise.p) + ")");
      }
      finish(est, k, sum, config.m, discarded);
    }
    return est;
  }

  // Reference path: every shot is an independently simulated trajectory.
  EnergyEstimate sample_trajectories(const StateVector& initial, const Circuit& circuit,
                                     const NoiseModel& noise, const MeasurementConfig& config,
                                     RandomSource& rng) const {
    require(config.m >= 1, "measurement count m must be at least 1");
    const int eta = expected_weight(initial, config);
    EnergyEstimate est;
    for (std::size_t k = 0; k < settings_.size(); ++k) {
      const Circuit measured = measured_circuit(circuit, k);
      std::uint64_t valid = 0, discarded = 0;
      double sum = 0.0;
      while (valid < config.m) {
        const auto events = draw_noise(noise_slot_count(measured), noise.p, rng);
        const Mask shot = trajectory_shot(initial, measured, events, rng);
        if (config.error_detection && popcount(shot) != eta) {
          ++discarded;
          if (static_cast<double>(discarded) > config.max_discard_ratio * static_cast<double>(config.m))
            throw ComputationError("error detection discarded every run");
          continue;
        }
        sum += settings_[k].readout(shot);
        ++valid;
      }
      finish(est, k, sum, config.m, discarded);
    }
    return est;
  }

 private:
  static int expected_weight(const StateVector& initial, const MeasurementConfig& config) {
    if (config.eta) return *config.eta;
    if (!config.error_detection) return -1;
    const auto w = initial.sector_weight();
    require(w.has_value(), "error detection needs a fixed-weight initial state or an explicit eta");
    return *w;
  }

  static Mask trajectory_shot(const StateVector& initial, const Circuit& measured,
                              std::span<const NoiseEvent> events, RandomSource& rng) {
    const StateVector out = run_circuit(initial, measured, events);
    return Distribution::of(out).sample(1, rng).front();
  }

  void finish(EnergyEstimate& est, std::size_t k, double sum, std::uint64_t m,
              std::uint64_t discarded) const {
    const double mean = sum / static_cast<double>(m);
    est.groups.push_back({settings_[k].group.kind, m, discarded, mean});
    est.value += settings_[k].coefficient * mean;
  }

  HubbardModel model_;
  std::vector<MeasurementSetting> settings_;
};

}  // namespace hvqe
