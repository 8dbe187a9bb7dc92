#include <gtest/gtest.h>

#include <cmath>

#include "optomech/params.hpp"

using namespace optomech;

TEST(Params, TableDefaults) {
  const SystemParams p;
  EXPECT_NEAR(to_hz(p.optics.kappa()), 14e6, 1e-6);
  EXPECT_NEAR(p.optics.outcoupling(), 13.4 / 14.0, 1e-15);
  EXPECT_NEAR(p.mode.quality_factor(), 1928e3 / 0.17, 1e-3);
  EXPECT_NO_THROW(p.validate());
}

TEST(Params, ThermalOccupationClassicalAndExact) {
  const double w = to_angular(1928e3);
  const double n = thermal_occupation(10.0, w);
  const double x = kHbar * w / (kBoltzmann * 10.0);
  EXPECT_DOUBLE_EQ(n, 1.0 / x);
  EXPECT_NEAR(n, 1.0807e5, 0.001e5);
  const double exact = thermal_occupation(10.0, w, true);
  EXPECT_NEAR(exact, n - 0.5, 1e-3);
  EXPECT_NEAR(thermal_occupation(20.0, w), 2.0 * n, 1e-9 * n);
  EXPECT_NEAR(thermal_occupation(10.0, 2.0 * w), 0.5 * n, 1e-9 * n);
  EXPECT_THROW(thermal_occupation(0.0, w), DomainError);
}

TEST(Params, MeasurementRateFromVacuumCoupling) {
  const double g0 = to_angular(115.0), kappa = to_angular(14e6);
  const double rate = measurement_rate(g0, 27e6, kappa);
  const double g = light_enhanced_coupling(g0, 27e6);
  EXPECT_NEAR(rate, 4.0 * g * g / kappa, 1e-9 * rate);
  EXPECT_NEAR(measurement_rate_from_coupling(g, kappa), rate, 1e-9 * rate);
  EXPECT_THROW(measurement_rate(g0, 1.0, 0.0), DomainError);
}

TEST(Params, MeasuredCouplingOverridesProduct) {
  MechanicalMode m;
  EXPECT_NEAR(m.coupling(27e6), to_angular(115.0) * std::sqrt(27e6), 1e-6);
  m.measured_coupling = to_angular(580e3);
  EXPECT_DOUBLE_EQ(m.coupling(27e6), to_angular(580e3));
}

TEST(Params, QuantumCooperativity) {
  EXPECT_DOUBLE_EQ(quantum_cooperativity(10.0, 2.0, 2.5), 2.0);
  EXPECT_THROW(quantum_cooperativity(1.0, 0.0, 1.0), DomainError);
}

TEST(Params, ModeFrequencyScaling) {
  const MembraneGeometry geom;
  const double f32 = to_hz(mode_frequency(3, 2, geom));
  EXPECT_NEAR(f32, 1928e3, 0.002 * 1928e3);
  // Homogeneous in (i, j) for a fixed ratio and asymmetric on a non-square membrane.
  EXPECT_NEAR(mode_frequency(6, 4, geom), 2.0 * mode_frequency(3, 2, geom), 1e-6);
  EXPECT_GT(std::abs(mode_frequency(3, 2, geom) - mode_frequency(2, 3, geom)), 1.0);
  const double a = 1.0 / geom.L_x, b = 1.0 / geom.L_y;
  EXPECT_NEAR(mode_frequency(3, 2, geom) / mode_frequency(1, 1, geom),
              std::sqrt((9 * a * a + 4 * b * b) / (a * a + b * b)), 1e-12);
  MembraneGeometry square = geom;
  square.L_x = square.L_y;
  EXPECT_NEAR(mode_frequency(3, 2, square) / mode_frequency(1, 1, square), std::sqrt(6.5), 1e-12);
  EXPECT_NEAR(mode_frequency(3, 2, square), mode_frequency(2, 3, square), 1e-6);
}

TEST(Params, ZeroPointAmplitude) {
  const double x = zero_point_amplitude(62e-12, to_angular(1928e3));
  EXPECT_NEAR(x, 2.65e-16, 0.01e-16);
  EXPECT_NEAR(zero_point_amplitude(4 * 62e-12, to_angular(1928e3)), 0.5 * x, 1e-30);
}

TEST(Params, BeamEnvelope) {
  MembraneGeometry geom;
  const double kx = kPi / geom.L_x, ky = kPi / geom.L_y, w = geom.beam_waist;
  EXPECT_NEAR(beam_envelope(1, 1, geom), std::exp(-w * w / 8.0 * (kx * kx + ky * ky)), 1e-15);
  EXPECT_NEAR(beam_envelope(1, 1, geom), 0.9874, 1e-4);
  geom.beam_waist = 1e-12;
  EXPECT_NEAR(beam_envelope(7, 7, geom), 1.0, 1e-12);
}

TEST(Params, VacuumCouplingMap) {
  MembraneGeometry geom;
  const MechanicalMode mode;
  const double G = 1e17;
  const double g = vacuum_coupling_map(3, 2, geom, G, mode);
  const double expect = kTwoPi * G * zero_point_amplitude(mode.mass, mode.omega_m) *
                        std::sin(3 * kPi * geom.beam_x / geom.L_x) * std::sin(2 * kPi * geom.beam_y / geom.L_y);
  EXPECT_NEAR(g, expect, 1e-9 * std::abs(expect));
  // Node lines: sin(2 pi y / L_y) vanishes at y = L_y / 2.
  geom.beam_y = geom.L_y / 2;
  EXPECT_NEAR(vacuum_coupling_map(3, 2, geom, G, mode), 0.0, 1e-9 * std::abs(expect));
  geom.beam_x = 2 * geom.L_x;
  EXPECT_THROW(vacuum_coupling_map(3, 2, geom, G, mode), DomainError);
}

TEST(Params, ValidationRejectsBadInput) {
  OpticalParams o;
  o.eta_d = 1.2;
  EXPECT_THROW(o.validate(), DomainError);
  MechanicalMode m;
  m.gamma_m = 0.0;
  EXPECT_THROW(m.validate(), DomainError);
  Environment e;
  e.temperature = -1.0;
  EXPECT_THROW(e.validate(), DomainError);
}
