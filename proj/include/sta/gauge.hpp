#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sta/error.hpp"
#include "sta/linalg.hpp"
#include "sta/propagator.hpp"
#include "sta/rescaling.hpp"

namespace sta {

/// (1+1)D Dirac Hamiltonian for a single momentum mode p:
///   H(t) = [c p + A(t)] sx + E0(t) sz + V(t) 1,
/// with E0 = m c^2. Potentials are position independent per mode.
struct DiracModel {
  double c = 1.0;
  std::function<double(double)> rest_energy = [](double) { return 1.0; };
  std::function<double(double)> vector_potential = [](double) { return 0.0; };
  std::function<double(double)> scalar_potential = [](double) { return 0.0; };

  PauliCoeffs at(double t, double p) const {
    return {scalar_potential(t), c * p + vector_potential(t), 0.0, rest_energy(t)};
  }
};

/// Frame rotation K(t) = exp(i phi(t) sx) with cos(2 phi) = 1 / fdot. The
/// transformed state is Phi = K Psi~, so
///   h = K H~ K^dagger + i hbar Kdot K^dagger.
struct GaugeFrame {
  RescalingFunction rf;
  double hbar = 1.0;
};

namespace detail {

// fdot^2 - 1 from the cancellation-free excess fdot - 1.
inline double rate_gap_squared(const RateDerivs& d) { return d.excess * (d.fdot + 1.0); }

inline void require_rate_at_least_one(const RateDerivs& d) {
  if (d.excess < -1e-12) {
    throw domain_error("gauge frame: fdot < 1, rescaling is not a contraction");
  }
}

}  // namespace detail

/// Principal branch of (1/2) arccos(1/fdot), in [0, pi/4).
inline double phi_of_t(const GaugeFrame& frame, double t) {
  const RateDerivs d = frame.rf.derivs(t);
  detail::require_rate_at_least_one(d);
  // tan(2 phi) = sqrt(fdot^2 - 1); atan is well conditioned near fdot = 1.
  return 0.5 * std::atan(std::sqrt(std::max(detail::rate_gap_squared(d), 0.0)));
}

inline Unitary2 K_matrix(double phi) {
  return Unitary2::from_pauli(std::cos(phi), I * std::sin(phi), 0.0, 0.0);
}

/// phi-dot = fddot / (2 fdot sqrt(fdot^2 - 1)). Where fdot = 1 exactly the
/// quotient is 0/0; its one-sided limit is +-sqrt(fdddot)/2, positive when
/// leaving the start of the window and negative when arriving at its end.
inline double inertial_term(const GaugeFrame& frame, double t) {
  const RateDerivs d = frame.rf.derivs(t);
  detail::require_rate_at_least_one(d);
  const double gap2 = detail::rate_gap_squared(d);
  if (gap2 > 1e-24) return d.fddot / (2.0 * d.fdot * std::sqrt(gap2));
  if (d.fdddot <= 0.0) return 0.0;
  const double mag = 0.5 * std::sqrt(d.fdddot);
  return t < 0.5 * frame.rf.window() ? mag : -mag;
}

/// Absorbed vector potential
///   A_frak = fdot A(f(t)) + (fdot - 1) c p - hbar phi-dot.
/// The inertial piece enters with a minus sign under Phi = K Psi~.
inline double frak_vector_potential(const GaugeFrame& frame,
                                    const std::function<double(double)>& A, double t,
                                    double p, double c = 1.0) {
  const RateDerivs d = frame.rf.derivs(t);
  const double f = frame.rf.eval(t);
  return d.fdot * A(f) + d.excess * c * p - frame.hbar * inertial_term(frame, t);
}

/// h = [c p + A_frak] sx + fdot E0 cos(2phi) sz + fdot E0 sin(2phi) sy + fdot V 1.
/// With cos(2 phi) = 1/fdot the sz coefficient is the original rest energy
/// and the sy coefficient is E0 sqrt(fdot^2 - 1).
inline PauliCoeffs transformed_hamiltonian(const GaugeFrame& frame, const DiracModel& model,
                                           double t, double p) {
  const RateDerivs d = frame.rf.derivs(t);
  const double f = frame.rf.eval(t);
  const double phi = phi_of_t(frame, t);
  const double e0 = model.rest_energy(f);
  PauliCoeffs h;
  h.d0 = d.fdot * model.scalar_potential(f);
  h.dx = model.c * p + frak_vector_potential(frame, model.vector_potential, t, p, model.c);
  h.dy = d.fdot * e0 * std::sin(2.0 * phi);
  h.dz = d.fdot * e0 * std::cos(2.0 * phi);
  return h;
}

struct GaugeModeResult {
  double p = 0.0;
  double max_deviation = 0.0;
  double max_norm_defect = 0.0;
};

struct GaugeCheckReport {
  std::vector<GaugeModeResult> modes;
  double max_deviation = 0.0;
  double tolerance = 1e-6;
  bool pass = false;
};

/// Evolves Psi~ under fdot H(f(t)) and Phi under the transformed Hamiltonian
/// from the same state (K(0) = 1) on a shared grid, and reports the largest
/// ||Psi~ - K^dagger Phi|| over all grid times and modes.
inline GaugeCheckReport gauge_equivalence_check(const DiracModel& model,
                                                const RescalingFunction& rf,
                                                const std::vector<double>& p_list,
                                                long n_steps, double hbar = 1.0,
                                                Spinor2 initial = Spinor2::basis0(),
                                                double tolerance = 1e-6) {
  require_boundary(rf);
  if (n_steps < 1) throw domain_error("gauge_equivalence_check: n_steps >= 1 required");
  const GaugeFrame frame{rf, hbar};
  const double dt = rf.window() / static_cast<double>(n_steps);
  initial = initial.normalized();

  GaugeCheckReport report;
  report.tolerance = tolerance;
  for (double p : p_list) {
    auto rescaled = [&](double t) { return rf.derivs(t).fdot * model.at(rf.eval(t), p); };
    auto frak = [&](double t) { return transformed_hamiltonian(frame, model, t, p); };
    Spinor2 psi = initial;
    Spinor2 phi_state = initial;
    GaugeModeResult mode{p, 0.0, 0.0};
    for (long k = 0; k < n_steps; ++k) {
      const double t_mid = (static_cast<double>(k) + 0.5) * dt;
      psi = step_exact(rescaled, t_mid, dt, hbar) * psi;
      phi_state = step_exact(frak, t_mid, dt, hbar) * phi_state;
      const double t = k + 1 == n_steps ? rf.window() : static_cast<double>(k + 1) * dt;
      const Unitary2 k_dag = K_matrix(phi_of_t(frame, t)).adjoint();
      mode.max_deviation = std::max(mode.max_deviation, distance(psi, k_dag * phi_state));
      mode.max_norm_defect = std::max(
          {mode.max_norm_defect, std::abs(psi.norm() - 1.0), std::abs(phi_state.norm() - 1.0)});
    }
    report.max_deviation = std::max(report.max_deviation, mode.max_deviation);
    report.modes.push_back(mode);
  }
  report.pass = report.max_deviation <= tolerance;
  return report;
}

}  // namespace sta
