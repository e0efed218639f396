#pragma once

#include <cmath>
#include <concepts>
#include <string>
#include <utility>

#include "sta/error.hpp"
#include "sta/linalg.hpp"
#include "sta/rescaling.hpp"

namespace sta {

/// A time-dependent two-level Hamiltonian: any callable t -> PauliCoeffs.
template <class H>
concept PauliHamiltonian = requires(const H& h, double t) {
  { h(t) } -> std::convertible_to<PauliCoeffs>;
};

/// Unitarity budget for a single closed-form step and for a full product.
inline constexpr double kStepUnitarityTol = 1e-12;
inline constexpr double kDriftUnitarityTol = 1e-8;

/// exp(-i H dt / hbar) for constant H, via
///   e^{-i d0 dt} [cos(|d| dt) 1 - i sin(|d| dt) dhat.sigma].
inline Unitary2 exp_pauli(const PauliCoeffs& h, double dt, double hbar = 1.0) {
  const double r = h.vector_norm();
  const double scaled_dt = dt / hbar;
  const double x = r * scaled_dt;
  double c = 0.0;
  double s_over_r = 0.0;  // sin(x) / |d|
  if (x < 1e-14) {
    c = 1.0 - 0.5 * x * x;
    s_over_r = scaled_dt * (1.0 - x * x / 6.0);
  } else {
    c = std::cos(x);
    s_over_r = std::sin(x) / r;
  }
  const cplx phase = std::exp(cplx{0.0, -h.d0 * scaled_dt});
  const cplx k = -I * s_over_r;
  return phase * Unitary2::from_pauli(c, k * h.dx, k * h.dy, k * h.dz);
}

template <PauliHamiltonian H>
Unitary2 step_exact(const H& h, double t_mid, double dt, double hbar = 1.0) {
  if (!(dt > 0.0)) throw domain_error("step_exact: dt must be positive");
  const PauliCoeffs d = h(t_mid);
  if (!d.finite()) {
    throw domain_error("step_exact: non-finite Hamiltonian at t=" + std::to_string(t_mid));
  }
  return exp_pauli(d, dt, hbar);
}

namespace detail {

inline void check_window(double t0, double t1, long n_steps) {
  if (!(t1 > t0)) throw domain_error("propagate: requires t1 > t0");
  if (n_steps < 1) throw domain_error("propagate: requires n_steps >= 1");
}

}  // namespace detail

/// Exponential midpoint rule: ordered product of closed-form steps with the
/// latest step leftmost. Globally second order in the step size.
template <PauliHamiltonian H>
Unitary2 propagate(const H& h, double t0, double t1, long n_steps, double hbar = 1.0) {
  detail::check_window(t0, t1, n_steps);
  const double dt = (t1 - t0) / static_cast<double>(n_steps);
  Unitary2 u = Unitary2::identity();
  for (long k = 0; k < n_steps; ++k) {
    const double t_mid = t0 + (static_cast<double>(k) + 0.5) * dt;
    u = step_exact(h, t_mid, dt, hbar) * u;
  }
  const double drift = unitarity_defect(u);
  if (!(drift <= kDriftUnitarityTol)) {
    throw Error(ErrorKind::Unitarity,
                "propagate: unitarity drift " + std::to_string(drift) + " exceeds 1e-8");
  }
  return u;
}

/// Same stepping as propagate(), applied directly to a state.
template <PauliHamiltonian H>
Spinor2 evolve_spinor(const H& h, double t0, double t1, long n_steps, Spinor2 psi,
                      double hbar = 1.0) {
  detail::check_window(t0, t1, n_steps);
  const double dt = (t1 - t0) / static_cast<double>(n_steps);
  for (long k = 0; k < n_steps; ++k) {
    const double t_mid = t0 + (static_cast<double>(k) + 0.5) * dt;
    psi = step_exact(h, t_mid, dt, hbar) * psi;
  }
  return psi;
}

/// t -> fdot(t) H(f(t)) on the contracted window of `rf`.
template <PauliHamiltonian H>
class RescaledHamiltonian {
public:
  /// Copies `h`; `rf` must outlive this object.
  RescaledHamiltonian(H h, const RescalingFunction& rf) : h_(std::move(h)), rf_(&rf) {}

  PauliCoeffs operator()(double s) const {
    return rf_->derivs(s).fdot * PauliCoeffs(h_(rf_->eval(s)));
  }

private:
  H h_;
  const RescalingFunction* rf_;
};

/// Propagates fdot(s) H(f(s)) over [0, tau/a]. By the change of variables
/// s -> f(s) the result approximates the original U(tau, 0).
template <PauliHamiltonian H>
Unitary2 rescaled_propagate(const H& h, const RescalingFunction& rf, long n_steps,
                            double hbar = 1.0) {
  require_boundary(rf);
  return propagate(RescaledHamiltonian<H>(h, rf), 0.0, rf.window(), n_steps, hbar);
}

inline Spinor2 evolve_state(const Unitary2& u, const Spinor2& s) { return u * s; }

}  // namespace sta
