#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sta/error.hpp"
#include "sta/gauge.hpp"
#include "sta/linalg.hpp"
#include "sta/parallel.hpp"
#include "sta/propagator.hpp"
#include "sta/rescaling.hpp"

namespace sta::iontrap {

/// Demonstration protocol in instantaneous units of 2 eta Delta gamma(t):
///   H(p, t) = [p - A(t)] sx + hbar omega(t) sz,
///   A(t) = sin^2(pi t / 2 tau),  hbar omega(t) = cos^2(pi t / 2 tau).
struct IonTrapModel {
  double tau = 1.0;

  double vector_potential(double t) const {
    const double s = std::sin(pi * t / (2.0 * tau));
    return s * s;
  }
  double gap(double t) const {
    const double c = std::cos(pi * t / (2.0 * tau));
    return c * c;
  }
  /// Momentum at which the gap closes at t = tau.
  double gap_closure_momentum() const { return 1.0; }
};

/// H(p, t) for one momentum mode.
struct DemoHamiltonian {
  IonTrapModel model;
  double p = 0.0;

  PauliCoeffs operator()(double t) const {
    return {0.0, p - model.vector_potential(t), 0.0, model.gap(t)};
  }
};

inline DemoHamiltonian build_demo_hamiltonian(const IonTrapModel& model, double p) {
  if (!(model.tau > 0.0)) throw domain_error("iontrap: tau must be positive");
  return {model, p};
}

/// The demo model in the generic Dirac form (c = 1, A -> -A, E0 = hbar omega),
/// for use with the gauge frame.
inline DiracModel as_dirac_model(const IonTrapModel& model) {
  DiracModel d;
  d.c = 1.0;
  d.vector_potential = [model](double t) { return -model.vector_potential(t); };
  d.rest_energy = [model](double t) { return model.gap(t); };
  return d;
}

/// Laboratory parameters of the trapped-ion Dirac simulator.
struct PhysicalTrapParams {
  double eta = 0.1;    // Lamb-Dicke parameter
  double Delta = 1.0;  // ground-state width sqrt(hbar / 2 m nu)
  std::function<double(double)> gamma = [](double) { return 1.0; };  // coupling
  std::function<double(double)> omega = [](double) { return 1.0; };  // detuning
  double m_ion = 1.0;
  double nu = 1.0;  // axial trap frequency
  double hbar = 1.0;
};

inline double ground_state_width(double hbar, double m_ion, double nu) {
  if (!(hbar > 0.0 && m_ion > 0.0 && nu > 0.0)) {
    throw domain_error("ground_state_width: hbar, m and nu must be positive");
  }
  return std::sqrt(hbar / (2.0 * m_ion * nu));
}

/// eta = k sqrt(hbar / 2 m nu) for laser wave number k.
inline double lamb_dicke(double k_laser, double hbar, double m_ion, double nu) {
  return k_laser * ground_state_width(hbar, m_ion, nu);
}

struct EffectiveDirac {
  double c_eff = 0.0;        // 2 eta Delta gamma(t)
  double rest_energy = 0.0;  // hbar omega(t)
};

inline EffectiveDirac physical_units_map(const PhysicalTrapParams& params, double t) {
  if (!(params.eta > 0.0 && params.Delta > 0.0 && params.hbar > 0.0)) {
    throw domain_error("physical_units_map: eta, Delta and hbar must be positive");
  }
  return {2.0 * params.eta * params.Delta * params.gamma(t), params.hbar * params.omega(t)};
}

struct Eigenstate {
  Spinor2 state;
  double theta = 0.0;
  bool degenerate = false;
};

/// Upper instantaneous eigenstate cos(theta/2)|0> + sin(theta/2)|1> with
/// theta = atan2(p - A(t), hbar omega(t)). When `theta_prev` is given, theta
/// is shifted by multiples of 2 pi to the branch nearest to it; at the gap
/// closure (both components below 1e-12) theta_prev is kept and the result
/// is flagged degenerate.
inline Eigenstate instantaneous_eigenstate(const IonTrapModel& model, double p, double t,
                                           std::optional<double> theta_prev = std::nullopt) {
  const double dx = p - model.vector_potential(t);
  const double dz = model.gap(t);
  Eigenstate e;
  if (std::abs(dx) < 1e-12 && std::abs(dz) < 1e-12) {
    e.degenerate = true;
    e.theta = theta_prev.value_or(0.0);
  } else {
    e.theta = std::atan2(dx, dz);
    if (theta_prev) {
      e.theta += 2.0 * pi * std::round((*theta_prev - e.theta) / (2.0 * pi));
    }
  }
  e.state = {std::cos(0.5 * e.theta), std::sin(0.5 * e.theta)};
  return e;
}

/// Eigenstate at time t reached by following theta continuously from
/// theta_0 = atan2(p, 1) at t = 0.
inline Eigenstate tracked_eigenstate(const IonTrapModel& model, double p, double t,
                                     int samples = 256) {
  Eigenstate e = instantaneous_eigenstate(model, p, 0.0);
  for (int k = 1; k <= samples; ++k) {
    const double tk = t * static_cast<double>(k) / samples;
    e = instantaneous_eigenstate(model, p, tk, e.theta);
  }
  return e;
}

/// Momentum grid with trapezoidal weights and a Gaussian envelope g(p),
/// normalized so that sum w |g|^2 = 1.
struct WavepacketGrid {
  std::vector<double> p;
  std::vector<double> weights;
  std::vector<cplx> envelope;

  double total_weight() const {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += weights[i] * std::norm(envelope[i]);
    return s;
  }
};

inline WavepacketGrid gaussian_grid(double p0 = 0.0, double sigma_p = 0.05,
                                    int n_points = 129, double half_width_sigmas = 6.0) {
  if (!(sigma_p > 0.0)) throw domain_error("gaussian_grid: sigma_p must be positive");
  if (n_points < 3) throw domain_error("gaussian_grid: need at least 3 points");
  WavepacketGrid g;
  const double lo = p0 - half_width_sigmas * sigma_p;
  const double h = 2.0 * half_width_sigmas * sigma_p / (n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    // Symmetric placement: mirror the lower half instead of accumulating lo + i h.
    const int j = std::min(i, n_points - 1 - i);
    const double offset = (lo + j * h) - p0;
    const double pi_i = i <= (n_points - 1) / 2 ? p0 + offset : p0 - offset;
    g.p.push_back(pi_i);
    g.weights.push_back(i == 0 || i == n_points - 1 ? 0.5 * h : h);
    const double u = (pi_i - p0) / sigma_p;
    g.envelope.emplace_back(std::exp(-0.25 * u * u), 0.0);
  }
  const double scale = 1.0 / std::sqrt(g.total_weight());
  for (auto& a : g.envelope) a *= scale;
  return g;
}

enum class FidelityMode { Incoherent, Coherent };

struct FidelityRow {
  double t = 0.0;
  double F_i = 0.0;
  double F_f = 0.0;
};

struct FidelityTable {
  double a = 1.0;
  std::vector<FidelityRow> rows;
  double max_norm_defect = 0.0;
  std::vector<std::string> warnings;
};

struct FidelityOptions {
  FidelityMode mode = FidelityMode::Incoherent;
  unsigned threads = 0;
  double hbar = 1.0;
};

namespace detail {

inline void validate_grid(const IonTrapModel& model, const WavepacketGrid& grid,
                          std::vector<std::string>& warnings) {
  if (grid.p.empty() || grid.p.size() != grid.weights.size() ||
      grid.p.size() != grid.envelope.size()) {
    throw domain_error("fidelity: malformed wavepacket grid");
  }
  const double total = grid.total_weight();
  if (!(total >= 1e-12)) {
    throw Error(ErrorKind::Tolerance, "fidelity: quadrature underflow, envelope weight < 1e-12");
  }
  for (double p : grid.p) {
    if (std::abs(p - model.gap_closure_momentum()) < 1e-6) {
      warnings.push_back("grid contains p=" + std::to_string(p) +
                         " within 1e-6 of the gap-closure momentum");
      break;
    }
  }
}

/// Evolves every mode through the increasing sample times under
/// hamiltonian_for(p) and reduces the overlaps in fixed mode order. Segment
/// k gets ceil(n_steps * len_k / span) midpoint steps.
template <class Family>
FidelityTable evolve_fidelities(const IonTrapModel& model, const WavepacketGrid& grid,
                                const std::vector<double>& times, long n_steps,
                                const Family& hamiltonian_for, const FidelityOptions& opt) {
  if (times.size() < 2) throw domain_error("fidelity: need at least two sample times");
  if (n_steps < 1) throw domain_error("fidelity: n_steps >= 1 required");
  FidelityTable table;
  validate_grid(model, grid, table.warnings);

  const std::size_t n_modes = grid.p.size();
  const std::size_t n_times = times.size();
  const double span = times.back() - times.front();
  std::vector<long> seg_steps(n_times, 0);
  for (std::size_t j = 1; j < n_times; ++j) {
    const double len = times[j] - times[j - 1];
    if (!(len > 0.0)) throw domain_error("fidelity: sample times must increase");
    seg_steps[j] = std::max(1L, static_cast<long>(std::ceil(n_steps * len / span - 1e-9)));
  }

  // overlaps[mode][time] = <psi(p, t) | chi(p)>
  std::vector<std::vector<cplx>> ov_i(n_modes, std::vector<cplx>(n_times));
  std::vector<std::vector<cplx>> ov_f(n_modes, std::vector<cplx>(n_times));
  std::vector<double> norm_defect(n_modes, 0.0);

  parallel_for(
      n_modes,
      [&](std::size_t m) {
        const double p = grid.p[m];
        const Spinor2 chi_i = instantaneous_eigenstate(model, p, 0.0).state;
        const Spinor2 chi_f = tracked_eigenstate(model, p, model.tau).state;
        const auto h = hamiltonian_for(p);
        Spinor2 psi = chi_i;
        ov_i[m][0] = inner(psi, chi_i);
        ov_f[m][0] = inner(psi, chi_f);
        for (std::size_t j = 1; j < n_times; ++j) {
          psi = evolve_spinor(h, times[j - 1], times[j], seg_steps[j], psi, opt.hbar);
          ov_i[m][j] = inner(psi, chi_i);
          ov_f[m][j] = inner(psi, chi_f);
          norm_defect[m] = std::max(norm_defect[m], std::abs(psi.norm() - 1.0));
        }
      },
      opt.threads);

  table.rows.resize(n_times);
  for (std::size_t j = 0; j < n_times; ++j) {
    FidelityRow& row = table.rows[j];
    row.t = times[j];
    if (opt.mode == FidelityMode::Incoherent) {
      double fi = 0.0;
      double ff = 0.0;
      for (std::size_t m = 0; m < n_modes; ++m) {
        const double w = grid.weights[m] * std::norm(grid.envelope[m]);
        fi += w * std::norm(ov_i[m][j]);
        ff += w * std::norm(ov_f[m][j]);
      }
      row.F_i = fi;
      row.F_f = ff;
    } else {
      cplx ai{};
      cplx af{};
      for (std::size_t m = 0; m < n_modes; ++m) {
        const cplx w = grid.weights[m] * std::conj(grid.envelope[m]) * grid.envelope[m];
        ai += w * ov_i[m][j];
        af += w * ov_f[m][j];
      }
      row.F_i = std::norm(ai);
      row.F_f = std::norm(af);
    }
  }
  for (double d : norm_defect) table.max_norm_defect = std::max(table.max_norm_defect, d);
  return table;
}

inline std::vector<double> uniform_times(double end, int n_times) {
  if (n_times < 2) throw domain_error("fidelity: n_times >= 2 required");
  std::vector<double> t(n_times);
  for (int j = 0; j < n_times; ++j) t[j] = end * static_cast<double>(j) / (n_times - 1);
  t.back() = end;
  return t;
}

}  // namespace detail

/// Fidelities with respect to the initial and the continuity-tracked final
/// eigenstate, sampled at n_times uniform instants of the contracted window
/// [0, tau/a] of the time-rescaled evolution.
inline FidelityTable fidelity_curves(const IonTrapModel& model, const RescalingFunction& rf,
                                     const WavepacketGrid& grid, int n_times, long n_steps,
                                     const FidelityOptions& opt = {}) {
  require_boundary(rf);
  if (std::abs(rf.tau() - model.tau) > 1e-12 * model.tau) {
    throw domain_error("fidelity_curves: rescaling tau differs from the model tau");
  }
  const auto times = detail::uniform_times(rf.window(), n_times);
  auto family = [&](double p) {
    return RescaledHamiltonian<DemoHamiltonian>(build_demo_hamiltonian(model, p), rf);
  };
  FidelityTable table = detail::evolve_fidelities(model, grid, times, n_steps, family, opt);
  table.a = rf.a();
  return table;
}

/// Unrescaled fidelities at arbitrary increasing times in [0, tau] starting
/// at 0. n_steps is the step budget for the whole span.
inline FidelityTable fidelities_at_times(const IonTrapModel& model, const WavepacketGrid& grid,
                                         const std::vector<double>& times, long n_steps,
                                         const FidelityOptions& opt = {}) {
  if (times.empty() || times.front() != 0.0 || times.back() > model.tau * (1.0 + 1e-12)) {
    throw domain_error("fidelities_at_times: times must start at 0 and stay within [0, tau]");
  }
  auto family = [&](double p) { return build_demo_hamiltonian(model, p); };
  return detail::evolve_fidelities(model, grid, times, n_steps, family, opt);
}

struct ReparametrizationReport {
  FidelityTable rescaled;
  FidelityTable reference;  // a = 1 curve sampled at f(t_j)
  double max_dev_F_i = 0.0;
  double max_dev_F_f = 0.0;

  double max_deviation() const { return std::max(max_dev_F_i, max_dev_F_f); }
};

/// Compares the rescaled run against the original dynamics sampled at the
/// mapped instants f(t_j). The two agree up to integrator error.
inline ReparametrizationReport reparametrization_check(const IonTrapModel& model,
                                                       const RescalingFunction& rf,
                                                       const WavepacketGrid& grid, int n_times,
                                                       long n_steps,
                                                       const FidelityOptions& opt = {}) {
  ReparametrizationReport r;
  r.rescaled = fidelity_curves(model, rf, grid, n_times, n_steps, opt);
  std::vector<double> mapped;
  mapped.reserve(r.rescaled.rows.size());
  for (const auto& row : r.rescaled.rows) mapped.push_back(rf.eval(row.t));
  mapped.front() = 0.0;
  r.reference = fidelities_at_times(model, grid, mapped, n_steps, opt);
  for (std::size_t j = 0; j < mapped.size(); ++j) {
    r.max_dev_F_i = std::max(r.max_dev_F_i,
                             std::abs(r.rescaled.rows[j].F_i - r.reference.rows[j].F_i));
    r.max_dev_F_f = std::max(r.max_dev_F_f,
                             std::abs(r.rescaled.rows[j].F_f - r.reference.rows[j].F_f));
  }
  return r;
}

}  // namespace sta::iontrap
