#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace sta {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

/// Coefficients of H = d0*1 + dx*sx + dy*sy + dz*sz. Hermitian whenever the
/// coefficients are real, which they always are here.
struct PauliCoeffs {
  double d0 = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;

  double vector_norm() const { return std::sqrt(dx * dx + dy * dy + dz * dz); }

  bool finite() const {
    return std::isfinite(d0) && std::isfinite(dx) && std::isfinite(dy) &&
           std::isfinite(dz);
  }

  friend PauliCoeffs operator*(double s, const PauliCoeffs& h) {
    return {s * h.d0, s * h.dx, s * h.dy, s * h.dz};
  }
  friend PauliCoeffs operator+(const PauliCoeffs& l, const PauliCoeffs& r) {
    return {l.d0 + r.d0, l.dx + r.dx, l.dy + r.dy, l.dz + r.dz};
  }
};

/// Two-component state in the sigma_z basis {|0>, |1>}.
struct Spinor2 {
  cplx up{1.0, 0.0};
  cplx down{0.0, 0.0};

  double norm() const { return std::sqrt(std::norm(up) + std::norm(down)); }

  Spinor2 normalized() const {
    const double n = norm();
    return {up / n, down / n};
  }

  static Spinor2 basis0() { return {1.0, 0.0}; }
  static Spinor2 basis1() { return {0.0, 1.0}; }
};

/// <a|b>
inline cplx inner(const Spinor2& a, const Spinor2& b) {
  return std::conj(a.up) * b.up + std::conj(a.down) * b.down;
}

inline double distance(const Spinor2& a, const Spinor2& b) {
  return std::sqrt(std::norm(a.up - b.up) + std::norm(a.down - b.down));
}

/// Dense 2x2 complex matrix, row major. Named for its intended use; the
/// type itself does not enforce unitarity.
struct Unitary2 {
  std::array<cplx, 4> m{cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{1.0}};

  cplx& operator()(int r, int c) { return m[2 * r + c]; }
  const cplx& operator()(int r, int c) const { return m[2 * r + c]; }

  static Unitary2 identity() { return {}; }
  static Unitary2 zero() { return {{cplx{}, cplx{}, cplx{}, cplx{}}}; }

  static Unitary2 from_pauli(cplx c0, cplx cx, cplx cy, cplx cz) {
    // c0*1 + cx*sx + cy*sy + cz*sz
    return {{c0 + cz, cx - I * cy, cx + I * cy, c0 - cz}};
  }

  Unitary2 adjoint() const {
    return {{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
  }

  cplx trace() const { return m[0] + m[3]; }
  cplx det() const { return m[0] * m[3] - m[1] * m[2]; }

  friend Unitary2 operator*(const Unitary2& a, const Unitary2& b) {
    return {{a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
             a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]}};
  }
  friend Unitary2 operator-(const Unitary2& a, const Unitary2& b) {
    return {{a.m[0] - b.m[0], a.m[1] - b.m[1], a.m[2] - b.m[2], a.m[3] - b.m[3]}};
  }
  friend Unitary2 operator+(const Unitary2& a, const Unitary2& b) {
    return {{a.m[0] + b.m[0], a.m[1] + b.m[1], a.m[2] + b.m[2], a.m[3] + b.m[3]}};
  }
  friend Unitary2 operator*(cplx s, const Unitary2& a) {
    return {{s * a.m[0], s * a.m[1], s * a.m[2], s * a.m[3]}};
  }
  friend Spinor2 operator*(const Unitary2& a, const Spinor2& s) {
    return {a.m[0] * s.up + a.m[1] * s.down, a.m[2] * s.up + a.m[3] * s.down};
  }
};

inline Unitary2 to_matrix(const PauliCoeffs& h) {
  return Unitary2::from_pauli(h.d0, h.dx, h.dy, h.dz);
}

/// Spectral norm (largest singular value).
inline double norm2(const Unitary2& a) {
  // Largest eigenvalue of the Hermitian matrix a^dagger a.
  const Unitary2 g = a.adjoint() * a;
  const double p = g.m[0].real();
  const double q = g.m[3].real();
  const double off = std::norm(g.m[1]);
  const double half_tr = 0.5 * (p + q);
  const double half_diff = 0.5 * (p - q);
  const double lmax = half_tr + std::sqrt(half_diff * half_diff + off);
  return std::sqrt(std::max(lmax, 0.0));
}

inline double frobenius(const Unitary2& a) {
  double s = 0.0;
  for (const auto& z : a.m) s += std::norm(z);
  return std::sqrt(s);
}

/// ||U^dagger U - 1||_2
inline double unitarity_defect(const Unitary2& u) {
  return norm2(u.adjoint() * u - Unitary2::identity());
}

}  // namespace sta
