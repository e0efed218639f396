#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sta/error.hpp"
#include "sta/linalg.hpp"
#include "sta/parallel.hpp"
#include "sta/propagator.hpp"
#include "sta/rescaling.hpp"

namespace sta::floquet {

/// Reduces a quasimomentum to (-pi, pi].
inline double wrap_quasimomentum(double x) {
  double y = std::remainder(x, 2.0 * pi);  // [-pi, pi]
  if (y <= -pi) y += 2.0 * pi;
  return y;
}

/// Single-mode kicked-Harper / Weyl model and its pumping loop.
struct WeylModelParams {
  double J = 1.0;
  double lambda = 1.0;
  double V1 = 2.0 * pi;
  double V2 = pi;
  double Omega = 2.0 * pi;
  double k = 0.5 * pi;
  double phi_y = 0.5 * pi;
  double phi_z = pi / 3.0;
  int ell = 1;
  double T0 = 50.0;
  double r = 0.1;
  double phi_y0 = 0.5 * pi;
  double phi_z0 = pi / 3.0;
  double hbar = 1.0;

  double period() const { return 2.0 * pi / Omega; }
  double c_ratio() const { return V2 / V1; }

  /// phi_l = arccos(ell pi / V1); requires |ell pi / V1| <= 1.
  double phi_l() const {
    const double x = ell * pi / V1;
    if (!(std::abs(x) <= 1.0)) {
      throw domain_error("floquet: |ell*pi/V1| > 1, phi_l = arccos(ell*pi/V1) undefined");
    }
    return std::acos(x);
  }

  double k_x() const { return k - 0.5 * pi; }
  double k_y() const { return phi_y - 0.5 * pi; }
  double k_z() const { return phi_z - phi_l(); }

  void validate() const {
    if (!(Omega > 0.0) || !std::isfinite(Omega)) throw domain_error("floquet: Omega must be positive");
    if (!(V1 != 0.0) || !std::isfinite(V1)) throw domain_error("floquet: V1 must be nonzero");
    if (!(T0 > 0.0)) throw domain_error("floquet: T0 must be positive");
    if (!(hbar > 0.0)) throw domain_error("floquet: hbar must be positive");
  }
};

/// Pumping needs T0 >> T; below a ratio of 50 a warning is returned.
inline std::vector<std::string> pumping_warnings(const WeylModelParams& p,
                                                 double min_ratio = 50.0) {
  std::vector<std::string> w;
  if (p.T0 / p.period() < min_ratio) {
    w.push_back("T0/T = " + std::to_string(p.T0 / p.period()) + " is below " +
                std::to_string(min_ratio) + "; pumping may not be adiabatic");
  }
  return w;
}

/// H_k(t) = 2J cos k sx + 2 lambda sin k cos phi_y sy + [V1 + V2 cos Omega t] cos phi_z sz.
struct SingleModeHamiltonian {
  WeylModelParams params;

  PauliCoeffs operator()(double t) const {
    const auto& q = params;
    return {0.0, 2.0 * q.J * std::cos(q.k),
            2.0 * q.lambda * std::sin(q.k) * std::cos(q.phi_y),
            (q.V1 + q.V2 * std::cos(q.Omega * t)) * std::cos(q.phi_z)};
  }
};

inline PauliCoeffs build_single_mode_h(const WeylModelParams& params, double t) {
  return SingleModeHamiltonian{params}(t);
}

/// Rotating-frame form with alpha = V2 cos(phi_z) sin(Omega t) / (hbar Omega),
/// transcribed term by term (the sy row repeats the sx mixing pattern with a
/// flipped first sign).
inline PauliCoeffs build_rotating_frame_h(const WeylModelParams& q, double t, double phi_y,
                                          double phi_z) {
  const double alpha = q.V2 * std::cos(phi_z) * std::sin(q.Omega * t) / (q.hbar * q.Omega);
  const double hop = 2.0 * q.J * std::cos(q.k);
  const double mod = 2.0 * q.lambda * std::sin(q.k) * std::cos(phi_y);
  const double c2 = std::cos(2.0 * alpha);
  const double s2 = std::sin(2.0 * alpha);
  return {0.0, hop * c2 + mod * s2, -hop * c2 + mod * s2, q.V1 * std::cos(phi_z)};
}

/// Loop point (phi_y, phi_z) at time t, theta(t) = 2 pi t / T0.
inline std::pair<double, double> pumping_path(const WeylModelParams& q, double t) {
  if (!(q.T0 > 0.0)) throw domain_error("pumping_path: T0 must be positive");
  const double theta = 2.0 * pi * t / q.T0;
  return {q.phi_y0 + q.r * std::cos(theta), q.phi_z0 + q.r * std::sin(theta)};
}

/// Rotating-frame Hamiltonian with (phi_y, phi_z) driven around the pumping loop.
struct PumpedRotatingHamiltonian {
  WeylModelParams params;

  PauliCoeffs operator()(double t) const {
    const auto [py, pz] = pumping_path(params, t);
    return build_rotating_frame_h(params, t, py, pz);
  }
};

/// Linearization around the band touching, in the original time variable:
///   H_pert(t) + [ell pi - V1 k_z sin phi_l] sz,
/// where H_pert mixes -2J k_x and -2 lambda k_y through cos/sin of
/// ell c sin(Omega t). With `zone_offset` false the ell pi sz piece is dropped,
/// which measures quasienergies relative to the ell-th zone.
struct LinearizedHamiltonian {
  WeylModelParams params;
  bool zone_offset = true;

  PauliCoeffs operator()(double t) const {
    const auto& q = params;
    const double phl = q.phi_l();
    const double kx = q.k_x();
    const double ky = q.k_y();
    const double kz = q.phi_z - phl;
    const double arg = q.ell * q.c_ratio() * std::sin(q.Omega * t);
    const double ca = std::cos(arg);
    const double sa = std::sin(arg);
    PauliCoeffs h;
    h.dx = -2.0 * q.J * kx * ca - 2.0 * q.lambda * ky * sa;
    h.dy = 2.0 * q.J * kx * sa - 2.0 * q.lambda * ky * ca;
    h.dz = (zone_offset ? q.ell * pi : 0.0) - q.V1 * kz * std::sin(phl);
    return h;
  }
};

/// Time-rescaled linearization fdot(t) {H_pert(f(t)) + [ell pi - V1 k_z sin phi_l] sz}.
inline PauliCoeffs linearized_h_near_touching(const WeylModelParams& params,
                                              const RescalingFunction& rf, double t,
                                              bool zone_offset = true) {
  const LinearizedHamiltonian h{params, zone_offset};
  return rf.derivs(t).fdot * h(rf.eval(t));
}

/// One-period propagator U_F(t_start + period, t_start).
template <PauliHamiltonian H>
Unitary2 floquet_operator(const H& h, double period, long n_steps, double t_start = 0.0,
                          double hbar = 1.0) {
  if (!(period > 0.0)) throw domain_error("floquet_operator: period must be positive");
  return propagate(h, t_start, t_start + period, n_steps, hbar);
}

inline Unitary2 matrix_power(Unitary2 u, unsigned n) {
  Unitary2 r = Unitary2::identity();
  while (n > 0) {
    if (n & 1u) r = r * u;
    u = u * u;
    n >>= 1u;
  }
  return r;
}

/// Eigenphases of a 2x2 unitary in (-pi, pi], ascending. Uses the
/// U = e^{i chi} (a0 - i a.sigma) split, which stays accurate when the two
/// eigenvalues nearly coincide.
inline std::array<double, 2> eigenphases(const Unitary2& u) {
  const double chi = 0.5 * std::arg(u.det());
  const Unitary2 v = std::exp(cplx{0.0, -chi}) * u;
  const double a0 = 0.5 * (v.m[0] + v.m[3]).real();
  const double ax = -0.5 * (v.m[1] + v.m[2]).imag();
  const double ay = 0.5 * (v.m[2] - v.m[1]).real();
  const double az = 0.5 * (v.m[3] - v.m[0]).imag();
  const double theta = std::atan2(std::sqrt(ax * ax + ay * ay + az * az), a0);
  std::array<double, 2> ph{chi - theta, chi + theta};
  for (auto& x : ph) x = std::arg(std::exp(cplx{0.0, x}));
  std::sort(ph.begin(), ph.end());
  return ph;
}

/// Reduces E to the first Floquet zone (-pi hbar/T, pi hbar/T]; the zone
/// edge itself maps to +pi hbar/T.
inline double reduce_to_zone(double E, double period, double hbar = 1.0) {
  const double w = 2.0 * pi * hbar / period;
  double x = E - w * std::floor((E + 0.5 * w) / w);  // [-w/2, w/2)
  if (x <= -0.5 * w * (1.0 - 1e-14)) x += w;
  return x;
}

/// Quasienergies E with e^{-i E T / hbar} the eigenvalues of U_F, zone
/// reduced and sorted ascending.
inline std::array<double, 2> quasienergies(const Unitary2& u_f, double period, double hbar = 1.0) {
  if (!(period > 0.0)) throw domain_error("quasienergies: period must be positive");
  const double defect = unitarity_defect(u_f);
  if (!(defect <= kDriftUnitarityTol)) {
    throw Error(ErrorKind::Unitarity, "quasienergies: input is not unitary (defect " +
                                          std::to_string(defect) + ")");
  }
  const auto ph = eigenphases(u_f);
  std::array<double, 2> e{reduce_to_zone(-hbar * ph[0] / period, period, hbar),
                          reduce_to_zone(-hbar * ph[1] / period, period, hbar)};
  std::sort(e.begin(), e.end());
  return e;
}

/// Separation of two quasienergies on the zone circle.
inline double quasienergy_gap(const std::array<double, 2>& e, double period, double hbar = 1.0) {
  const double w = 2.0 * pi * hbar / period;
  const double d = std::abs(e[1] - e[0]);
  return std::min(d, w - d);
}

struct PerturbativeOptions {
  /// Overall time/hbar factor multiplying the first-order term; the natural
  /// value is T0/hbar, confirmed by calibrate_perturbative_prefactor().
  double prefactor = 1.0;
  int bessel_order = 0;
};

/// 1 + i (2 J k_x sx + 2 lambda k_y sy) * prefactor * J_n(ell c).
inline Unitary2 perturbative_floquet(const WeylModelParams& q, const PerturbativeOptions& opt) {
  (void)q.phi_l();  // domain check
  const double bessel = std::cyl_bessel_j(static_cast<double>(opt.bessel_order),
                                          std::abs(q.ell * q.c_ratio()));
  // J_n(-x) = (-1)^n J_n(x)
  const double sign = (q.ell * q.c_ratio() < 0.0 && (opt.bessel_order % 2) != 0) ? -1.0 : 1.0;
  const double g = opt.prefactor * sign * bessel;
  return Unitary2::from_pauli(1.0, I * (2.0 * q.J * q.k_x() * g),
                              I * (2.0 * q.lambda * q.k_y() * g), 0.0);
}

inline Unitary2 perturbative_floquet(const WeylModelParams& q) {
  return perturbative_floquet(q, PerturbativeOptions{q.T0 / q.hbar, 0});
}

/// Extracts the first-order prefactor from the numeric Floquet operator of the
/// zone-offset-free linearization over [0, T0], with (J, lambda) scaled by
/// `epsilon` so that higher orders are negligible. Requires k_x != 0.
inline double calibrate_perturbative_prefactor(WeylModelParams q, long n_steps,
                                               double epsilon = 1e-6, int bessel_order = 0) {
  if (q.k_x() == 0.0) throw domain_error("calibrate: k_x must be nonzero");
  q.J *= epsilon;
  q.lambda *= epsilon;
  q.phi_z = q.phi_l();
  const Unitary2 u = propagate(LinearizedHamiltonian{q, false}, 0.0, q.T0, n_steps, q.hbar);
  const double sx_imag = 0.5 * (u.m[1] + u.m[2]).imag();
  const double bessel = std::cyl_bessel_j(static_cast<double>(bessel_order),
                                          std::abs(q.ell * q.c_ratio()));
  return sx_imag / (2.0 * q.J * q.k_x() * bessel);
}

struct EquivalenceReport {
  double deviation = 0.0;
  double tolerance = 1e-6;
  bool pass = false;
};

/// ||U~_F(T0/a, 0) - U_F(T0, 0)||_2 for a rescaling built on tau = T0.
template <PauliHamiltonian H>
EquivalenceReport rescaled_floquet_equivalence(const H& h, const RescalingFunction& rf,
                                               long n_steps, double hbar = 1.0) {
  const Unitary2 rescaled = rescaled_propagate(h, rf, n_steps, hbar);
  const Unitary2 original = floquet_operator(h, rf.tau(), n_steps, 0.0, hbar);
  EquivalenceReport r;
  r.deviation = norm2(rescaled - original);
  r.pass = r.deviation <= r.tolerance;
  return r;
}

struct ScanRow {
  double k = 0.0;
  double phi_y = 0.0;
  double phi_z = 0.0;
  double E1 = 0.0;
  double E2 = 0.0;
};

/// Quasienergies of the single-mode Floquet operator at each (k, phi_y,
/// phi_z) point. Points are independent; rows come back in input order.
inline std::vector<ScanRow> quasienergy_scan(const WeylModelParams& base,
                                             const std::vector<std::array<double, 3>>& points,
                                             long n_steps, unsigned threads = 0) {
  base.validate();
  std::vector<ScanRow> rows(points.size());
  parallel_for(
      points.size(),
      [&](std::size_t i) {
        WeylModelParams q = base;
        q.k = wrap_quasimomentum(points[i][0]);
        q.phi_y = wrap_quasimomentum(points[i][1]);
        q.phi_z = wrap_quasimomentum(points[i][2]);
        const Unitary2 u =
            floquet_operator(SingleModeHamiltonian{q}, q.period(), n_steps, 0.0, q.hbar);
        const auto e = quasienergies(u, q.period(), q.hbar);
        rows[i] = {q.k, q.phi_y, q.phi_z, e[0], e[1]};
      },
      threads);
  return rows;
}

/// Points along the pumping loop at n_points instants of [0, T0).
inline std::vector<std::array<double, 3>> pumping_loop_points(const WeylModelParams& q,
                                                              int n_points) {
  if (n_points < 1) throw domain_error("pumping_loop_points: n_points >= 1 required");
  std::vector<std::array<double, 3>> pts;
  for (int i = 0; i < n_points; ++i) {
    const auto [py, pz] = pumping_path(q, q.T0 * i / n_points);
    pts.push_back({q.k, py, pz});
  }
  return pts;
}

}  // namespace sta::floquet
