// Copyright 2026 The hvqe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hvqe/common.hpp"

namespace hvqe {

// One objective evaluation and what it cost.
struct Evaluation {
  double value = 0.0;
  std::uint64_t energy_measurements = 0;
  std::uint64_t circuit_evaluations = 0;
};

// m = 0 requests an exact evaluation; otherwise m energy measurements.
struct Objective {
  std::function<Evaluation(std::span<const double> params, std::uint64_t m)> evaluate;
  std::size_t dimension = 0;
  bool deterministic = false;
};

struct TracePoint {
  std::vector<double> params;
  double value = 0.0;
  std::uint64_t estimates = 0;
  std::uint64_t energy_measurements = 0;
  std::uint64_t circuit_evaluations = 0;
  int stage = 0;
};

struct OptimizerTrace {
  std::vector<TracePoint> points;
  std::vector<double> final_params;
  double final_value = 0.0;
  std::vector<double> best_params;
  double best_value = std::numeric_limits<double>::infinity();
  bool budget_exhausted = false;
  bool converged = false;
  std::vector<std::size_t> stage_starts;

  const TracePoint& last() const {
    require(!points.empty(), "empty optimizer trace");
    return points.back();
  }
};

namespace detail {

struct BudgetExhausted {};

// Counts evaluations against an estimate budget and keeps the best point seen.
class CountingObjective {
 public:
  CountingObjective(const Objective& f, std::uint64_t budget) : f_(f), budget_(budget) {
    require(static_cast<bool>(f.evaluate), "objective has no evaluation function");
  }

  double operator()(std::span<const double> x, std::uint64_t m) {
    if (estimates_ >= budget_) throw BudgetExhausted{};
    const Evaluation e = f_.evaluate(x, m);
    ++estimates_;
    measurements_ += e.energy_measurements;
    circuits_ += e.circuit_evaluations;
    if (e.value < best_value_) {
      best_value_ = e.value;
      best_.assign(x.begin(), x.end());
    }
    return e.value;
  }

  std::uint64_t remaining() const { return budget_ > estimates_ ? budget_ - estimates_ : 0; }

  void record(OptimizerTrace& t, std::span<const double> x, double value, int stage = 0) const {
    t.points.push_back({std::vector<double>(x.begin(), x.end()), value, estimates_, measurements_,
                        circuits_, stage});
  }

  void finish(OptimizerTrace& t, std::span<const double> x, double value) const {
    t.final_params.assign(x.begin(), x.end());
    t.final_value = value;
    t.best_params = best_.empty() ? t.final_params : best_;
    t.best_value = best_.empty() ? value : best_value_;
  }

 private:
  const Objective& f_;
  std::uint64_t budget_;
  std::uint64_t estimates_ = 0;
  std::uint64_t measurements_ = 0;
  std::uint64_t circuits_ = 0;
  double best_value_ = std::numeric_limits<double>::infinity();
  std::vector<double> best_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double max_abs(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace detail

struct QuasiNewtonConfig {
  std::uint64_t budget = 100000;  // objective evaluations
  double fd_step = 1e-5;
  std::size_t memory = 10;
  double gradient_tolerance = 1e-6;
  double value_tolerance = 1e-12;
  int max_iterations = 10000;
  double c1 = 1e-4;
  double c2 = 0.9;
};

// L-BFGS with central finite-difference gradients and a strong Wolfe line search.
inline OptimizerTrace minimize_quasinewton_fd(const Objective& objective, std::vector<double> x,
                                              const QuasiNewtonConfig& cfg = {}) {
  require(x.size() == objective.dimension, "start point has wrong dimension");
  detail::CountingObjective f(objective, cfg.budget);
  OptimizerTrace trace;
  const std::size_t n = x.size();

  auto value_and_gradient = [&](const std::vector<double>& p, std::vector<double>& g) {
    const double v = f(p, 0);
    g.assign(n, 0.0);
    std::vector<double> q = p;
    for (std::size_t k = 0; k < n; ++k) {
      q[k] = p[k] + cfg.fd_step;
      const double up = f(q, 0);
      q[k] = p[k] - cfg.fd_step;
      const double down = f(q, 0);
      q[k] = p[k];
      g[k] = (up - down) / (2.0 * cfg.fd_step);
    }
    return v;
  };

  double fx = 0.0;
  std::vector<double> g;
  try {
    fx = value_and_gradient(x, g);
    f.record(trace, x, fx);
    std::deque<std::vector<double>> S, Y;
    int flat = 0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      if (detail::max_abs(g) < cfg.gradient_tolerance) {
        trace.converged = true;
        break;
      }
      // Two-loop recursion.
      std::vector<double> d = g;
      std::vector<double> alpha(S.size());
      for (std::size_t k = S.size(); k-- > 0;) {
        alpha[k] = detail::dot(S[k], d) / detail::dot(Y[k], S[k]);
        for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * Y[k][i];
      }
      const double gamma =
          S.empty() ? 1.0 : detail::dot(S.back(), Y.back()) / detail::dot(Y.back(), Y.back());
      for (double& v : d) v *= gamma;
      for (std::size_t k = 0; k < S.size(); ++k) {
        const double beta = detail::dot(Y[k], d) / detail::dot(Y[k], S[k]);
        for (std::size_t i = 0; i < n; ++i) d[i] += S[k][i] * (alpha[k] - beta);
      }
      for (double& v : d) v = -v;
      double slope = detail::dot(g, d);
      if (slope >= 0.0) {
        S.clear();
        Y.clear();
        d = g;
        for (double& v : d) v = -v;
        slope = detail::dot(g, d);
      }

      // Strong Wolfe line search (bracketing and bisection-safeguarded zoom).
      auto trial = [&](double a, std::vector<double>& xa, std::vector<double>& ga) {
        xa = x;
        for (std::size_t i = 0; i < n; ++i) xa[i] += a * d[i];
        return value_and_gradient(xa, ga);
      };
      double a_prev = 0.0, f_prev = fx, s_prev = slope;
      double a = S.empty() ? std::min(1.0, 1.0 / std::sqrt(detail::dot(g, g))) : 1.0;
      std::vector<double> xa, ga, x_new, g_new;
      double f_new = fx;
      bool found = false;
      auto zoom = [&](double lo, double f_lo, double s_lo, double hi, double f_hi) {
        for (int z = 0; z < 30; ++z) {
          // Quadratic interpolation from (lo, f_lo, s_lo) and (hi, f_hi), kept inside the bracket.
          const double w = hi - lo;
          double aj = lo - s_lo * w * w / (2.0 * (f_hi - f_lo - s_lo * w));
          const double lo_b = std::min(lo, hi) + 0.1 * std::abs(w);
          const double hi_b = std::max(lo, hi) - 0.1 * std::abs(w);
          if (!std::isfinite(aj) || aj < lo_b || aj > hi_b) aj = 0.5 * (lo + hi);
          const double fj = trial(aj, xa, ga);
          const double sj = detail::dot(ga, d);
          if (fj > fx + cfg.c1 * aj * slope || fj >= f_lo) {
            hi = aj;
            f_hi = fj;
          } else {
            if (std::abs(sj) <= -cfg.c2 * slope) {
              x_new = xa;
              g_new = ga;
              f_new = fj;
              return true;
            }
            if (sj * (hi - lo) >= 0.0) {
              hi = lo;
              f_hi = f_lo;
            }
            lo = aj;
            f_lo = fj;
            s_lo = sj;
          }
          if (fj < f_new) {
            x_new = xa;
            g_new = ga;
            f_new = fj;
          }
        }
        return false;
      };
      for (int ls = 0; ls < 30 && !found; ++ls) {
        const double fa = trial(a, xa, ga);
        const double sa = detail::dot(ga, d);
        if (fa > fx + cfg.c1 * a * slope || (ls > 0 && fa >= f_prev)) {
          found = zoom(a_prev, f_prev, s_prev, a, fa);
          break;
        }
        if (std::abs(sa) <= -cfg.c2 * slope) {
          x_new = xa;
          g_new = ga;
          f_new = fa;
          found = true;
          break;
        }
        if (sa >= 0.0) {
          found = zoom(a, fa, sa, a_prev, f_prev);
          break;
        }
        a_prev = a;
        f_prev = fa;
        s_prev = sa;
        x_new = xa;
        g_new = ga;
        f_new = fa;
        a *= 2.0;
      }
      if (x_new.empty() || f_new >= fx) {
        if (S.empty()) break;  // no descent even along -g
        S.clear();
        Y.clear();
        continue;
      }
      std::vector<double> s(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = x_new[i] - x[i];
        y[i] = g_new[i] - g[i];
      }
      if (detail::dot(s, y) > 1e-16) {
        S.push_back(std::move(s));
        Y.push_back(std::move(y));
        if (S.size() > cfg.memory) {
          S.pop_front();
          Y.pop_front();
        }
      }
      const double decrease = fx - f_new;
      x = std::move(x_new);
      g = std::move(g_new);
      fx = f_new;
      f.record(trace, x, fx);
      flat = decrease <= cfg.value_tolerance * std::max(1.0, std::abs(fx)) ? flat + 1 : 0;
      if (flat >= 3) {
        trace.converged = true;
        break;
      }
    }
  } catch (const detail::BudgetExhausted&) {
    trace.budget_exhausted = true;
  }
  if (trace.points.empty()) f.record(trace, x, fx);
  f.finish(trace, x, fx);
  return trace;
}

struct SpsaConfig {
  double a = 0.15;
  double c = 0.2;
  double alpha = 0.602;
  double gamma = 0.101;
  double A = 100.0;
  std::vector<std::uint64_t> stage_m = {100, 1000, 10000};
  std::vector<double> stage_ratio = {10.0, 3.0, 1.0};
  std::vector<int> stage_averaging = {1, 1, 2};
  std::uint64_t budget = 12000;  // energy estimates over all stages

  double a_k(std::uint64_t k) const { return a / std::pow(static_cast<double>(k) + 1.0 + A, alpha); }
  double c_k(std::uint64_t k) const { return c / std::pow(static_cast<double>(k) + 1.0, gamma); }

  void validate() const {
    require(a > 0 && c > 0 && alpha > 0 && gamma > 0 && A >= 0, "SPSA constants must be positive");
    require(!stage_m.empty() && stage_m.size() == stage_ratio.size() &&
                stage_m.size() == stage_averaging.size(),
            "SPSA stage lists must have equal, nonzero length");
    for (double r : stage_ratio) require(r > 0, "SPSA stage ratios must be positive");
    for (int g : stage_averaging) require(g >= 1, "SPSA gradient averaging must be at least 1");
  }

  // Estimates given to each stage: the budget split by the stage ratios.
  std::vector<std::uint64_t> stage_budgets() const {
    double total = 0.0;
    for (double r : stage_ratio) total += r;
    std::vector<std::uint64_t> out;
    std::uint64_t used = 0;
    for (std::size_t s = 0; s < stage_ratio.size(); ++s) {
      auto b = static_cast<std::uint64_t>(std::floor(static_cast<double>(budget) * stage_ratio[s] / total));
      if (s + 1 == stage_ratio.size()) b = budget - used;
      out.push_back(b);
      used += b;
    }
    return out;
  }
};

// Two-sided simultaneous-perturbation gradient averaged over `samples` directions.
inline std::vector<double> spsa_gradient(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> x, double ck, int samples,
                                         RandomSource& rng, double* mean_value = nullptr) {
  const std::size_t n = x.size();
  std::vector<double> g(n, 0.0), plus(n), minus(n), delta(n);
  double values = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      delta[i] = rng.sign();
      plus[i] = x[i] + ck * delta[i];
      minus[i] = x[i] - ck * delta[i];
    }
    const double fp = f(plus), fm = f(minus);
    values += fp + fm;
    for (std::size_t i = 0; i < n; ++i) g[i] += (fp - fm) / (2.0 * ck) / delta[i] / samples;
  }
  if (mean_value) *mean_value = values / (2.0 * samples);
  return g;
}

// Three-stage SPSA; each stage restarts the gain sequences from k = 0 and
// runs until its share of the estimate budget is spent.
inline OptimizerTrace minimize_spsa(const Objective& objective, std::vector<double> x,
                                    const SpsaConfig& cfg, RandomSource& rng) {
  cfg.validate();
  require(x.size() == objective.dimension, "start point has wrong dimension");
  detail::CountingObjective f(objective, cfg.budget);
  OptimizerTrace trace;
  const auto budgets = cfg.stage_budgets();
  double last = std::numeric_limits<double>::quiet_NaN();
  try {
    for (std::size_t s = 0; s < budgets.size(); ++s) {
      trace.stage_starts.push_back(trace.points.size());
      const std::uint64_t per_step = 2 * static_cast<std::uint64_t>(cfg.stage_averaging[s]);
      const std::uint64_t steps = budgets[s] / per_step;
      const std::uint64_t m = cfg.stage_m[s];
      auto fs = [&](std::span<const double> p) { return f(p, m); };
      for (std::uint64_t k = 0; k < steps; ++k) {
        const auto g = spsa_gradient(fs, x, cfg.c_k(k), cfg.stage_averaging[s], rng, &last);
        const double ak = cfg.a_k(k);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= ak * g[i];
        f.record(trace, x, last, static_cast<int>(s));
      }
    }
  } catch (const detail::BudgetExhausted&) {
    trace.budget_exhausted = true;
  }
  f.finish(trace, x, last);
  return trace;
}

// f(theta) = sum_{k=-D}^{D} c_k e^{i k theta}, real on the real line.
class TrigPolynomial {
 public:
  TrigPolynomial(int degree, std::vector<Complex> coefficients)
      : degree_(degree), c_(std::move(coefficients)) {
    require(degree >= 0, "trigonometric polynomial degree must be non-negative");
    require(c_.size() == static_cast<std::size_t>(2 * degree + 1),
            "trigonometric polynomial needs 2D+1 coefficients");
  }

  static std::vector<double> nodes(int degree) {
    std::vector<double> out;
    const double n = 2.0 * degree + 1.0;
    for (int l = -degree; l <= degree; ++l) out.push_back(2.0 * kPi * l / n);
    return out;
  }

  // Coefficients from samples at nodes(D) by the discrete Fourier transform.
  static TrigPolynomial fit(int degree, std::span<const double> samples) {
    const int n = 2 * degree + 1;
    if (samples.size() != static_cast<std::size_t>(n))
      throw InvalidArgument("trigonometric fit of degree " + std::to_string(degree) + " needs " +
                            std::to_string(n) + " samples, got " + std::to_string(samples.size()));
    std::vector<Complex> c(n);
    for (int k = -degree; k <= degree; ++k) {
      Complex s = 0.0;
      for (int l = -degree; l <= degree; ++l)
        s += std::polar(1.0, -2.0 * kPi * k * l / n) * samples[l + degree];
      c[k + degree] = s / static_cast<double>(n);
    }
    // Enforce c_{-k} = conj(c_k) so the polynomial stays real.
    for (int k = 1; k <= degree; ++k) {
      const Complex avg = 0.5 * (c[degree + k] + std::conj(c[degree - k]));
      c[degree + k] = avg;
      c[degree - k] = std::conj(avg);
    }
    c[degree] = c[degree].real();
    return TrigPolynomial(degree, std::move(c));
  }

  int degree() const { return degree_; }
  Complex coefficient(int k) const { return c_.at(k + degree_); }

  double operator()(double theta) const {
    Complex s = 0.0;
    for (int k = -degree_; k <= degree_; ++k) s += c_[k + degree_] * std::polar(1.0, k * theta);
    return s.real();
  }

  double derivative(double theta) const {
    Complex s = 0.0;
    for (int k = -degree_; k <= degree_; ++k)
      s += Complex(0.0, k) * c_[k + degree_] * std::polar(1.0, k * theta);
    return s.real();
  }

 private:
  int degree_;
  std::vector<Complex> c_;
};

inline TrigPolynomial fit_trig_polynomial(int degree, std::span<const double> samples) {
  return TrigPolynomial::fit(degree, samples);
}

struct TrigMinimum {
  double theta = 0.0;
  double value = 0.0;
  bool degenerate = false;
  bool grid_fallback = false;
};

// Minimizes f over the circle through the unit-modulus roots of
// z^D f'(z), a degree-2D polynomial, found as companion-matrix eigenvalues.
inline TrigMinimum minimize_trig_polynomial(const TrigPolynomial& f, double root_tolerance = 1e-6) {
  const int D = f.degree();
  std::vector<Complex> a(2 * D + 1);  // a[j] multiplies z^j
  double scale = 0.0;
  for (int k = -D; k <= D; ++k) {
    a[k + D] = Complex(0.0, k) * f.coefficient(k);
    scale = std::max(scale, std::abs(a[k + D]));
  }
  TrigMinimum out;
  if (D == 0 || scale < 1e-14 * std::max(1.0, std::abs(f.coefficient(0)))) {
    out.degenerate = true;
    out.value = f(0.0);
    return out;
  }
  int hi = 2 * D, lo = 0;
  while (std::abs(a[hi]) <= 1e-12 * scale) --hi;
  while (std::abs(a[lo]) <= 1e-12 * scale) ++lo;  // zero roots are off the circle
  std::vector<double> candidates;
  const int deg = hi - lo;
  if (deg >= 1) {
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -a[lo + i] / a[hi];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const Complex z = es.eigenvalues()[i];
      if (std::abs(1.0 - std::abs(z)) < root_tolerance) candidates.push_back(std::arg(z));
    }
  }
  if (candidates.empty()) {
    out.grid_fallback = true;
    const int points = std::max(2000, 200 * D);
    for (int i = 0; i < points; ++i) candidates.push_back(-kPi + 2.0 * kPi * i / points);
  }
  out.value = std::numeric_limits<double>::infinity();
  for (double t : candidates) {
    const double v = f(t);
    if (v < out.value) {
      out.value = v;
      out.theta = t;
    }
  }
  return out;
}

// Frequency data of one parameter: the objective is a trigonometric
// polynomial of degree `degree` in unit * x.
struct CoordinateSpec {
  int degree = 0;
  double unit = 1.0;
};

struct CoordinateDescentConfig {
  std::uint64_t budget = 1200;  // energy estimates
  std::uint64_t m = 10000;      // 0 = exact evaluations
  int max_sweeps = 1000;
};

// Cyclic coordinate descent: each parameter is set to the exact minimizer of
// the trigonometric polynomial fitted through its 2D+1 node evaluations.
inline OptimizerTrace minimize_cd(const Objective& objective, std::vector<double> x,
                                  const std::vector<CoordinateSpec>& coords,
                                  const CoordinateDescentConfig& cfg) {
  require(x.size() == objective.dimension, "start point has wrong dimension");
  require(coords.size() == x.size(), "one coordinate spec per parameter is required");
  detail::CountingObjective f(objective, cfg.budget);
  OptimizerTrace trace;
  double value = std::numeric_limits<double>::quiet_NaN();
  try {
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
      bool any = false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& spec = coords[i];
        if (spec.degree == 0 || spec.unit == 0.0) continue;
        const auto nodes = TrigPolynomial::nodes(spec.degree);
        if (f.remaining() < nodes.size()) throw detail::BudgetExhausted{};
        any = true;
        std::vector<double> samples;
        std::vector<double> probe = x;
        for (double t : nodes) {
          probe[i] = t / spec.unit;
          samples.push_back(f(probe, cfg.m));
        }
        const auto poly = TrigPolynomial::fit(spec.degree, samples);
        const auto best = minimize_trig_polynomial(poly);
        if (!best.degenerate) {
          // Representative of the minimizer closest to the current value.
          const double period = 2.0 * kPi / spec.unit;
          double xi = best.theta / spec.unit;
          xi += period * std::round((x[i] - xi) / period);
          x[i] = xi;
        }
        value = best.value;
        f.record(trace, x, value, sweep);
      }
      if (!any) break;
    }
  } catch (const detail::BudgetExhausted&) {
    trace.budget_exhausted = true;
  }
  f.finish(trace, x, value);
  return trace;
}

}  // namespace hvqe
