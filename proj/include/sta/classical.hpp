#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <string>
#include <vector>

#include "sta/error.hpp"
#include "sta/rescaling.hpp"

namespace sta::classical {

struct ClassicalState {
  double x = 0.0;
  double p = 0.0;
};

inline double distance(const ClassicalState& a, const ClassicalState& b) {
  return std::hypot(a.x - b.x, a.p - b.p);
}

/// Shape function of a scale-invariant potential, V(x, t) = V(x / gamma) / gamma^2.
struct ScaleInvariantPotential {
  std::string name;
  std::function<double(double)> V;
  std::function<double(double)> dV;
};

inline ScaleInvariantPotential harmonic() {
  return {"harmonic", [](double u) { return u * u; }, [](double u) { return 2.0 * u; }};
}

inline ScaleInvariantPotential quartic() {
  return {"quartic", [](double u) { return u * u * u * u; },
          [](double u) { return 4.0 * u * u * u; }};
}

struct ClassicalModel {
  double m = 1.0;
  std::function<double(double)> gamma = [](double) { return 1.0; };
  ScaleInvariantPotential potential = harmonic();
};

/// gamma(t) = 1 + t / (2 tau).
inline ClassicalModel default_model(ScaleInvariantPotential potential, double tau,
                                    double m = 1.0) {
  return {m, [tau](double t) { return 1.0 + t / (2.0 * tau); }, std::move(potential)};
}

namespace detail {

inline RateDerivs checked_derivs(const RescalingFunction& rf, double t) {
  const RateDerivs d = rf.derivs(t);
  if (d.excess < -1e-12) throw domain_error("appendix: fdot < 1");
  return d;
}

}  // namespace detail

struct GeneratingCoeffs {
  double h1 = 1.0;
  double h2 = 0.0;
};

/// h1 = 1/sqrt(fdot), h2 = m fddot / (4 fdot^2): the choice that removes the
/// p x cross term and restores the bare kinetic term.
inline GeneratingCoeffs h1h2(const RescalingFunction& rf, double t, double m) {
  const RateDerivs d = detail::checked_derivs(rf, t);
  return {1.0 / std::sqrt(d.fdot), m * d.fddot / (4.0 * d.fdot * d.fdot)};
}

enum class Direction { Forward, Inverse };

/// Forward: (x, p) -> (xbar, pbar) = (h1 x, (p - 2 h2 x) / h1).
/// Inverse: (xbar, pbar) -> (x, p) = (xbar / h1, h1 pbar + 2 h2 x).
inline ClassicalState canonical_map(const ClassicalState& s, const RescalingFunction& rf,
                                    double t, double m, Direction dir = Direction::Forward) {
  const auto [h1, h2] = h1h2(rf, t, m);
  if (dir == Direction::Forward) return {h1 * s.x, (s.p - 2.0 * h2 * s.x) / h1};
  const double x = s.x / h1;
  return {x, h1 * s.p + 2.0 * h2 * x};
}

/// Coefficient of xbar^2 generated by the transformation:
///   4 h2^2 fdot / (2 m h1^2) + h2dot / h1^2
///     = m fddot^2 / (8 fdot^2) + m (fdot fdddot - 2 fddot^2) / (4 fdot^2).
inline double kappa(const RescalingFunction& rf, double t, double m) {
  const RateDerivs d = detail::checked_derivs(rf, t);
  const double fd2 = d.fdot * d.fdot;
  return m * d.fddot * d.fddot / (8.0 * fd2) +
         m * (d.fdot * d.fdddot - 2.0 * d.fddot * d.fddot) / (4.0 * fd2);
}

/// Coefficient of pbar xbar, 4 h2 fdot / (2m) + h1dot / h1, assembled from
/// the individual pieces. Vanishes for the chosen h1, h2.
inline double cross_term_coefficient(const RescalingFunction& rf, double t, double m) {
  const RateDerivs d = detail::checked_derivs(rf, t);
  const auto [h1, h2] = h1h2(rf, t, m);
  const double h1dot = -0.5 * d.fddot * std::pow(d.fdot, -1.5);
  return 4.0 * h2 * d.fdot / (2.0 * m) + h1dot / h1;
}

struct QuantumCoeffs {
  double alpha = 0.0;    // fddot / fdot
  double beta = 0.0;     // ln fdot
  double kappa_q = 0.0;  // fdddot/fdot - fddot^2/fdot^2 - fddot^2/fdot^3
};

inline QuantumCoeffs quantum_coeffs(const RescalingFunction& rf, double t) {
  const RateDerivs d = detail::checked_derivs(rf, t);
  const double fd2 = d.fdot * d.fdot;
  const double dd2 = d.fddot * d.fddot;
  return {d.fddot / d.fdot, std::log1p(d.excess),
          d.fdddot / d.fdot - dd2 / fd2 - dd2 / (fd2 * d.fdot)};
}

/// Hamilton's equations for the time-rescaled system
///   H~ = fdot [p^2/2m + V(x / gamma(f)) / gamma(f)^2].
struct RescaledSystem {
  const ClassicalModel* model;
  const RescalingFunction* rf;

  ClassicalState derivative(double t, const ClassicalState& s) const {
    const RateDerivs d = rf->derivs(t);
    const double g = model->gamma(rf->eval(t));
    return {d.fdot * s.p / model->m, -d.fdot / (g * g * g) * model->potential.dV(s.x / g)};
  }

  double energy(double t, const ClassicalState& s) const {
    const double g = model->gamma(rf->eval(t));
    return rf->derivs(t).fdot *
           (s.p * s.p / (2.0 * model->m) + model->potential.V(s.x / g) / (g * g));
  }
};

/// Transformed system
///   H = pbar^2/2m + (fdot/gamma^2) V(xbar sqrt(fdot) / gamma) + kappa xbar^2,
/// with gamma evaluated at f(t).
struct TransformedSystem {
  const ClassicalModel* model;
  const RescalingFunction* rf;

  ClassicalState derivative(double t, const ClassicalState& s) const {
    const RateDerivs d = rf->derivs(t);
    const double g = model->gamma(rf->eval(t));
    const double root = std::sqrt(d.fdot);
    const double force = d.fdot * root / (g * g * g) * model->potential.dV(s.x * root / g);
    return {s.p / model->m, -force - 2.0 * kappa(*rf, t, model->m) * s.x};
  }

  double energy(double t, const ClassicalState& s) const {
    const RateDerivs d = rf->derivs(t);
    const double g = model->gamma(rf->eval(t));
    return s.p * s.p / (2.0 * model->m) +
           d.fdot / (g * g) * model->potential.V(s.x * std::sqrt(d.fdot) / g) +
           kappa(*rf, t, model->m) * s.x * s.x;
  }
};

template <class S>
concept VectorField = requires(const S& s, double t, const ClassicalState& x) {
  { s.derivative(t, x) } -> std::convertible_to<ClassicalState>;
};

inline constexpr double kOverflowGuard = 1e150;

/// Fixed-step classical RK4 on [t0, t1]; returns the n_steps + 1 states.
template <VectorField S>
std::vector<ClassicalState> evolve_classical(const S& system, ClassicalState s, double t0,
                                             double t1, long n_steps) {
  if (!(t1 > t0)) throw domain_error("evolve_classical: requires t1 > t0");
  if (n_steps < 1) throw domain_error("evolve_classical: n_steps >= 1 required");
  const double h = (t1 - t0) / static_cast<double>(n_steps);
  auto axpy = [](const ClassicalState& a, double c, const ClassicalState& b) {
    return ClassicalState{a.x + c * b.x, a.p + c * b.p};
  };
  std::vector<ClassicalState> traj;
  traj.reserve(n_steps + 1);
  traj.push_back(s);
  for (long k = 0; k < n_steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    const ClassicalState k1 = system.derivative(t, s);
    const ClassicalState k2 = system.derivative(t + 0.5 * h, axpy(s, 0.5 * h, k1));
    const ClassicalState k3 = system.derivative(t + 0.5 * h, axpy(s, 0.5 * h, k2));
    const ClassicalState k4 = system.derivative(k + 1 == n_steps ? t1 : t + h, axpy(s, h, k3));
    s.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    if (!(std::abs(s.x) < kOverflowGuard && std::abs(s.p) < kOverflowGuard)) {
      throw Error(ErrorKind::Overflow, "evolve_classical: state left the representable range");
    }
    traj.push_back(s);
  }
  return traj;
}

struct AppendixRow {
  double t = 0.0;
  double x = 0.0;
  double p = 0.0;
  double xbar = 0.0;
  double pbar = 0.0;
  double deviation = 0.0;
};

struct AppendixReport {
  std::vector<AppendixRow> rows;
  double max_deviation = 0.0;
  double tolerance = 1e-5;
  bool pass = false;
};

/// Integrates (x, p) under H~ and (xbar, pbar) under the transformed
/// Hamiltonian and measures how far canonical_map(x(t), p(t)) drifts from the
/// directly integrated (xbar(t), pbar(t)).
inline AppendixReport appendix_equivalence_check(const ClassicalModel& model,
                                                 const RescalingFunction& rf,
                                                 ClassicalState state0, long n_steps) {
  require_boundary(rf);
  const double end = rf.window();
  const auto traj = evolve_classical(RescaledSystem{&model, &rf}, state0, 0.0, end, n_steps);
  const ClassicalState bar0 = canonical_map(state0, rf, 0.0, model.m);
  const auto bar = evolve_classical(TransformedSystem{&model, &rf}, bar0, 0.0, end, n_steps);

  AppendixReport report;
  report.rows.reserve(traj.size());
  const double h = end / static_cast<double>(n_steps);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = k + 1 == traj.size() ? end : static_cast<double>(k) * h;
    const ClassicalState mapped = canonical_map(traj[k], rf, t, model.m);
    const double dev = distance(mapped, bar[k]);
    report.rows.push_back({t, traj[k].x, traj[k].p, bar[k].x, bar[k].p, dev});
    report.max_deviation = std::max(report.max_deviation, dev);
  }
  report.pass = report.max_deviation <= report.tolerance;
  return report;
}

}  // namespace sta::classical
