#pragma once

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sta/error.hpp"
#include "sta/linalg.hpp"

namespace sta {

enum class RescalingKind { Identity, Sinusoidal, Custom };

/// First three derivatives of a rescaling function at one instant.
/// `excess` is fdot - 1, evaluated without cancellation where the closed form
/// allows it; the frame and inertial-term formulas divide by it.
struct RateDerivs {
  double fdot = 1.0;
  double fddot = 0.0;
  double fdddot = 0.0;
  double excess = 0.0;
};

/// User-supplied rescaling profile. All four callables are required.
struct CustomProfile {
  std::function<double(double)> f;
  std::function<double(double)> fdot;
  std::function<double(double)> fddot;
  std::function<double(double)> fdddot;
};

/// Time map f: [0, tau/a] -> [0, tau]. The sinusoidal member is
///   f(t) = a t - tau (a - 1) / (2 pi a) * sin(2 pi a t / tau),
/// which has fdot = 1 at both ends of the contracted window.
class RescalingFunction {
public:
  static RescalingFunction identity(double tau) {
    return RescalingFunction(RescalingKind::Identity, 1.0, tau, {});
  }

  static RescalingFunction sinusoidal(double a, double tau) {
    return RescalingFunction(RescalingKind::Sinusoidal, a, tau, {});
  }

  /// Extension hook. The profile is taken on trust here; propagators reject
  /// it unless check_boundary() passes.
  static RescalingFunction custom(double a, double tau, CustomProfile profile) {
    if (!profile.f || !profile.fdot || !profile.fddot || !profile.fdddot) {
      throw domain_error("custom rescaling profile is missing a derivative");
    }
    return RescalingFunction(RescalingKind::Custom, a, tau, std::move(profile));
  }

  RescalingKind kind() const { return kind_; }
  double a() const { return a_; }
  double tau() const { return tau_; }
  /// Length of the contracted window, tau / a.
  double window() const { return tau_ / a_; }

  double eval(double t) const {
    t = clamp_to_window(t);
    switch (kind_) {
      case RescalingKind::Identity:
        return t;
      case RescalingKind::Sinusoidal:
        return a_ * t - tau_ * (a_ - 1.0) / (2.0 * pi * a_) * std::sin(omega() * t);
      case RescalingKind::Custom:
        return custom_.f(t);
    }
    return t;
  }

  RateDerivs derivs(double t) const {
    t = clamp_to_window(t);
    RateDerivs d;
    switch (kind_) {
      case RescalingKind::Identity:
        break;
      case RescalingKind::Sinusoidal: {
        const double w = omega();
        const double amp = a_ - 1.0;
        const double half = std::sin(0.5 * w * t);
        d.excess = 2.0 * amp * half * half;
        d.fdot = 1.0 + d.excess;
        d.fddot = amp * w * std::sin(w * t);
        d.fdddot = amp * w * w * std::cos(w * t);
        break;
      }
      case RescalingKind::Custom:
        d.fdot = custom_.fdot(t);
        d.fddot = custom_.fddot(t);
        d.fdddot = custom_.fdddot(t);
        d.excess = d.fdot - 1.0;
        break;
    }
    return d;
  }

  /// Solves f(t) = s on the contracted window by a bracketed Newton iteration
  /// that falls back to bisection whenever Newton leaves the bracket.
  double invert(double s) const {
    if (!(s >= -1e-12 * tau_ && s <= tau_ * (1.0 + 1e-12))) {
      throw domain_error("invert_f: s=" + std::to_string(s) + " outside [0, tau]");
    }
    s = std::clamp(s, 0.0, tau_);
    if (kind_ == RescalingKind::Identity) return s;

    double lo = 0.0;
    double hi = window();
    double g_lo = eval(lo) - s;
    double g_hi = eval(hi) - s;
    if (g_lo == 0.0) return lo;
    if (g_hi == 0.0) return hi;
    if (g_lo > 0.0 || g_hi < 0.0) {
      throw Error(ErrorKind::Convergence,
                  "invert_f: target not bracketed; rescaling is not monotone");
    }

    const double tol = 1e-12 * tau_;
    double t = lo + (hi - lo) * (s / tau_);
    for (int iter = 0; iter < 200; ++iter) {
      const double g = eval(t) - s;
      if (g < 0.0) {
        lo = t;
      } else {
        hi = t;
      }
      if (std::abs(g) <= 1e-3 * tol || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * window()) {
        if (std::abs(g) > tol) break;
        return t;
      }
      const double slope = derivs(t).fdot;
      double next = slope > 0.0 ? t - g / slope : lo - 1.0;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      t = next;
    }
    const double g = eval(t) - s;
    if (std::abs(g) <= tol) return t;
    throw Error(ErrorKind::Convergence,
                "invert_f: no convergence; rescaling is not monotone");
  }

private:
  RescalingFunction(RescalingKind kind, double a, double tau, CustomProfile custom)
      : kind_(kind), a_(a), tau_(tau), custom_(std::move(custom)) {
    if (!(a_ >= 1.0) || !std::isfinite(a_)) {
      throw domain_error("rescaling: contraction factor a must satisfy a >= 1");
    }
    if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
      throw domain_error("rescaling: tau must be positive");
    }
  }

  double omega() const { return 2.0 * pi * a_ / tau_; }

  // Tolerates round-off at the window edges, rejects real extrapolation.
  double clamp_to_window(double t) const {
    const double w = window();
    const double slack = 1e-12 * w;
    if (!(t >= -slack && t <= w + slack)) {
      throw domain_error("rescaling: t=" + std::to_string(t) + " outside [0, tau/a]");
    }
    return std::clamp(t, 0.0, w);
  }

  RescalingKind kind_;
  double a_;
  double tau_;
  CustomProfile custom_;
};

inline double eval_f(const RescalingFunction& rf, double t) { return rf.eval(t); }

inline RateDerivs eval_derivs(const RescalingFunction& rf, double t) {
  return rf.derivs(t);
}

inline double invert_f(const RescalingFunction& rf, double s) { return rf.invert(s); }

struct BoundaryResidual {
  std::string condition;
  double residual = 0.0;
};

struct BoundaryReport {
  std::vector<BoundaryResidual> residuals;
  bool pass = false;

  double max_residual() const {
    double r = 0.0;
    for (const auto& c : residuals) r = std::max(r, c.residual);
    return r;
  }
};

inline constexpr double kBoundaryTolerance = 1e-10;

/// Residuals of f(0)=0, f(tau/a)=tau, fdot(0)=1, fdot(tau/a)=1. Distances in
/// time are reported relative to tau.
inline BoundaryReport check_boundary(const RescalingFunction& rf) {
  BoundaryReport report;
  const double end = rf.window();
  auto add = [&](std::string name, double r) {
    report.residuals.push_back({std::move(name), std::isfinite(r) ? r : INFINITY});
  };
  add("f(0)=0", std::abs(rf.eval(0.0)) / rf.tau());
  add("f(tau/a)=tau", std::abs(rf.eval(end) - rf.tau()) / rf.tau());
  add("fdot(0)=1", std::abs(rf.derivs(0.0).fdot - 1.0));
  add("fdot(tau/a)=1", std::abs(rf.derivs(end).fdot - 1.0));
  report.pass = report.max_residual() < kBoundaryTolerance;
  return report;
}

/// Throws unless `rf` satisfies the shortcut boundary conditions.
inline void require_boundary(const RescalingFunction& rf) {
  const auto report = check_boundary(rf);
  if (!report.pass) {
    std::string failed;
    for (const auto& c : report.residuals) {
      if (!(c.residual < kBoundaryTolerance)) failed += " " + c.condition;
    }
    throw domain_error("rescaling function violates boundary conditions:" + failed);
  }
}

}  // namespace sta
