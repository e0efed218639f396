#include <gtest/gtest.h>

#include <cmath>

#include "sta/gauge.hpp"
#include "sta/iontrap.hpp"

namespace {

using sta::cplx;
using sta::GaugeFrame;
using sta::RescalingFunction;
using sta::Unitary2;

sta::DiracModel driven_model() {
  sta::DiracModel m;
  m.c = 1.0;
  m.rest_energy = [](double) { return 1.0; };
  m.vector_potential = [](double t) { return -std::pow(std::sin(0.5 * sta::pi * t), 2); };
  return m;
}

// K H~ K^dagger + i hbar Kdot K^dagger with Kdot from central differences.
Unitary2 frame_oracle(const GaugeFrame& fr, const sta::DiracModel& model, double t, double p) {
  const double h = 1e-6;
  const Unitary2 K = sta::K_matrix(sta::phi_of_t(fr, t));
  const Unitary2 Kdot = cplx{1.0 / (2.0 * h)} * (sta::K_matrix(sta::phi_of_t(fr, t + h)) -
                                                 sta::K_matrix(sta::phi_of_t(fr, t - h)));
  const double fdot = fr.rf.derivs(t).fdot;
  const Unitary2 Ht = sta::to_matrix(fdot * model.at(fr.rf.eval(t), p));
  return K * Ht * K.adjoint() + cplx{0.0, fr.hbar} * (Kdot * K.adjoint());
}

}  // namespace

TEST(Gauge, PhiAtRateTwo) {
  // fdot = 2 at t = tau / 4a for the sinusoidal map.
  const GaugeFrame fr{RescalingFunction::sinusoidal(2.0, 1.0), 1.0};
  EXPECT_NEAR(fr.rf.derivs(0.125).fdot, 2.0, 1e-14);
  EXPECT_NEAR(sta::phi_of_t(fr, 0.125), sta::pi / 6.0, 1e-14);
  EXPECT_NEAR(sta::phi_of_t(fr, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(sta::phi_of_t(fr, 0.5), 0.0, 1e-7);
}

TEST(Gauge, KMatrix) {
  const Unitary2 k = sta::K_matrix(0.5 * sta::pi);
  EXPECT_NEAR(std::abs(k(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(k(0, 1) - cplx{0.0, 1.0}), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(k(1, 0) - cplx{0.0, 1.0}), 0.0, 1e-15);
  for (double phi : {0.1, 0.4, -0.7}) {
    EXPECT_LT(sta::norm2(sta::K_matrix(phi).adjoint() - sta::K_matrix(-phi)), 1e-15);
    EXPECT_LT(sta::unitarity_defect(sta::K_matrix(phi)), 1e-15);
  }
}

TEST(Gauge, SigmaZCoefficientIsRestEnergy) {
  const auto model = driven_model();
  for (double a : {2.0, 4.0}) {
    const GaugeFrame fr{RescalingFunction::sinusoidal(a, 1.0), 1.0};
    for (int i = 0; i <= 200; ++i) {
      const double t = fr.rf.window() * i / 200.0;
      EXPECT_NEAR(sta::transformed_hamiltonian(fr, model, t, 0.4).dz, 1.0, 1e-12);
    }
  }
}

TEST(Gauge, PseudoscalarAtRateTwo) {
  const GaugeFrame fr{RescalingFunction::sinusoidal(2.0, 1.0), 1.0};
  const auto h = sta::transformed_hamiltonian(fr, driven_model(), 0.125, 0.0);
  EXPECT_NEAR(h.dy, std::sqrt(3.0), 1e-13);
}

TEST(Gauge, InertialTermMatchesFiniteDifference) {
  const GaugeFrame fr{RescalingFunction::sinusoidal(3.0, 1.0), 1.0};
  for (double t : {0.02, 0.1, 0.16, 0.25, 0.31}) {
    const double h = 1e-6;
    const double fd = (sta::phi_of_t(fr, t + h) - sta::phi_of_t(fr, t - h)) / (2 * h);
    EXPECT_NEAR(sta::inertial_term(fr, t), fd, 1e-6 * std::max(1.0, std::abs(fd))) << t;
  }
}

TEST(Gauge, InertialTermLimitAtWindowEdges) {
  for (double a : {2.0, 4.0}) {
    const double tau = 1.0;
    const GaugeFrame fr{RescalingFunction::sinusoidal(a, tau), 1.0};
    const double lim = sta::pi * a / tau * std::sqrt(a - 1.0);
    EXPECT_NEAR(sta::inertial_term(fr, 0.0), lim, 1e-12 * lim);
    EXPECT_NEAR(sta::inertial_term(fr, 1e-6), lim, 1e-5 * lim);
    EXPECT_NEAR(sta::inertial_term(fr, fr.rf.window()), -lim, 1e-4 * lim);
  }
  const GaugeFrame flat{RescalingFunction::identity(1.0), 1.0};
  EXPECT_EQ(sta::inertial_term(flat, 0.3), 0.0);
}

TEST(Gauge, TransformedHamiltonianMatchesFrameOracle) {
  const auto model = driven_model();
  for (double a : {2.0, 4.0}) {
    const GaugeFrame fr{RescalingFunction::sinusoidal(a, 1.0), 1.0};
    for (double frac : {0.1, 0.3, 0.5, 0.77}) {
      const double t = frac * fr.rf.window();
      for (double p : {-1.0, 0.0, 0.6}) {
        const Unitary2 want = frame_oracle(fr, model, t, p);
        const Unitary2 got = sta::to_matrix(sta::transformed_hamiltonian(fr, model, t, p));
        EXPECT_LT(sta::norm2(got - want), 1e-7) << a << " " << t << " " << p;
      }
    }
  }
}

TEST(Gauge, UnitContractionRecoversOriginal) {
  const auto model = driven_model();
  const GaugeFrame fr{RescalingFunction::sinusoidal(1.0, 1.0), 1.0};
  for (double t : {0.0, 0.2, 0.9}) {
    const auto h = sta::transformed_hamiltonian(fr, model, t, 0.3);
    const auto o = model.at(t, 0.3);
    EXPECT_NEAR(h.dx, o.dx, 1e-15);
    EXPECT_NEAR(h.dy, 0.0, 1e-15);
    EXPECT_NEAR(h.dz, o.dz, 1e-15);
  }
}

TEST(Gauge, FrakVectorPotentialPieces) {
  const GaugeFrame fr{RescalingFunction::sinusoidal(2.0, 1.0), 1.0};
  const auto model = driven_model();
  const double t = 0.2;
  const double p = 0.7;
  const auto d = fr.rf.derivs(t);
  const double want = d.fdot * model.vector_potential(fr.rf.eval(t)) + (d.fdot - 1.0) * p -
                      sta::inertial_term(fr, t);
  EXPECT_NEAR(sta::frak_vector_potential(fr, model.vector_potential, t, p), want, 1e-14);
}

TEST(Gauge, EquivalenceCheckPasses) {
  const auto model = driven_model();
  for (double a : {2.0, 4.0}) {
    const auto rep = sta::gauge_equivalence_check(
        model, RescalingFunction::sinusoidal(a, 1.0), {-1.0, 0.0, 1.0}, 4000);
    EXPECT_TRUE(rep.pass) << rep.max_deviation;
    EXPECT_LT(rep.max_deviation, 1e-6);
    ASSERT_EQ(rep.modes.size(), 3u);
    for (const auto& m : rep.modes) EXPECT_LT(m.max_norm_defect, 1e-10);
  }
}

TEST(Gauge, EquivalenceCheckSecondOrder) {
  const auto model = driven_model();
  const auto rf = RescalingFunction::sinusoidal(2.0, 1.0);
  const double e1 = sta::gauge_equivalence_check(model, rf, {0.5}, 1000).max_deviation;
  const double e2 = sta::gauge_equivalence_check(model, rf, {0.5}, 2000).max_deviation;
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.15);
}

TEST(Gauge, IonTrapDiracModel) {
  const auto model = sta::iontrap::as_dirac_model(sta::iontrap::IonTrapModel{1.0});
  const auto rep = sta::gauge_equivalence_check(model, RescalingFunction::sinusoidal(2.0, 1.0),
                                                {0.3}, 4000, 1.0, sta::Spinor2{0.6, 0.8});
  EXPECT_TRUE(rep.pass) << rep.max_deviation;
}

TEST(Gauge, FlippedInertialSignFails) {
  // Same frame with +phi-dot in the sx coefficient: no longer the K-transformed dynamics.
  const auto model = driven_model();
  const GaugeFrame fr{RescalingFunction::sinusoidal(2.0, 1.0), 1.0};
  auto flipped = [&](double t) {
    auto h = sta::transformed_hamiltonian(fr, model, t, 0.0);
    h.dx += 2.0 * sta::inertial_term(fr, t);
    return h;
  };
  auto rescaled = [&](double t) { return fr.rf.derivs(t).fdot * model.at(fr.rf.eval(t), 0.0); };
  const auto psi = sta::evolve_spinor(rescaled, 0.0, 0.5, 4000, sta::Spinor2::basis0());
  const auto phi = sta::evolve_spinor(flipped, 0.0, 0.5, 4000, sta::Spinor2::basis0());
  EXPECT_GT(sta::distance(psi, phi), 1e-2);
}

TEST(Gauge, ErrorPaths) {
  sta::CustomProfile slow{[](double t) { return 0.5 * t; }, [](double) { return 0.5; },
                          [](double) { return 0.0; }, [](double) { return 0.0; }};
  const GaugeFrame fr{RescalingFunction::custom(1.0, 1.0, slow), 1.0};
  EXPECT_THROW(sta::phi_of_t(fr, 0.5), sta::Error);
  EXPECT_THROW(sta::inertial_term(fr, 0.5), sta::Error);
  EXPECT_THROW(sta::gauge_equivalence_check(driven_model(), fr.rf, {0.0}, 10), sta::Error);
  EXPECT_THROW(sta::gauge_equivalence_check(driven_model(), RescalingFunction::sinusoidal(2, 1),
                                            {0.0}, 0),
               sta::Error);
}
