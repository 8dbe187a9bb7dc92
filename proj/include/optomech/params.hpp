#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {

// All rates and frequencies are angular (rad/s).

struct OpticalParams {
  double kappa_R = to_angular(0.6e6);    // incoupler decay rate
  double kappa_T = to_angular(13.4e6);   // outcoupler decay rate
  double kappa_L = 0.0;                  // internal loss rate
  double detuning = to_angular(-1.8e6);  // laser detuning
  double n_cav = 27e6;                   // intracavity photons
  double eta_d = 0.80;                   // detection efficiency
  double wavelength = 799.877e-9;        // m

  double kappa() const noexcept { return kappa_R + kappa_T + kappa_L; }
  /// Fraction of cavity decay leaving through the detected port.
  double outcoupling() const noexcept { return kappa_T / kappa(); }

  void validate() const {
    if (!(kappa_R >= 0.0) || !(kappa_T >= 0.0) || !(kappa_L >= 0.0))
      throw DomainError("cavity decay rates must be non-negative");
    if (!(kappa() > 0.0)) throw DomainError("total cavity decay rate must be positive");
    if (!(eta_d >= 0.0 && eta_d <= 1.0))
      throw DomainError("detection efficiency must lie in [0, 1]");
    if (!(n_cav >= 0.0)) throw DomainError("photon number must be non-negative");
    if (!std::isfinite(detuning)) throw DomainError("detuning must be finite");
    if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
  }
};

struct MechanicalMode {
  int index_i = 3;
  int index_j = 2;
  double omega_m = to_angular(1928e3);
  double gamma_m = to_angular(0.170);
  double mass = 62e-12;          // kg
  double g0 = to_angular(115.0);  // vacuum coupling
  /// Light-enhanced coupling measured directly (e.g. from OMIT); overrides g0*sqrt(n_cav).
  std::optional<double> measured_coupling;

  double quality_factor() const noexcept { return omega_m / gamma_m; }

  /// g = g0 sqrt(n_cav) unless a measured value is attached.
  double coupling(double n_cav) const noexcept {
    return measured_coupling ? *measured_coupling : g0 * std::sqrt(n_cav);
  }

  void validate() const {
    if (index_i < 1 || index_j < 1) throw DomainError("mode indices must be positive");
    if (!(omega_m > 0.0)) throw DomainError("mechanical frequency must be positive");
    if (!(gamma_m > 0.0)) throw DomainError("mechanical damping must be positive");
    if (!(mass > 0.0)) throw DomainError("mass must be positive");
    if (!(g0 >= 0.0)) throw DomainError("vacuum coupling must be non-negative");
    if (measured_coupling && !(*measured_coupling >= 0.0))
      throw DomainError("measured coupling must be non-negative");
    if (!std::isfinite(quality_factor())) throw DomainError("quality factor must be finite");
  }
};

struct MembraneGeometry {
  double L_x = 540.736e-6;  // 0.994 L_y
  double L_y = 544e-6;
  double tension = 1.0406e9;  // Pa
  double density = 3100.0;    // kg/m^3
  double beam_waist = 39e-6;  // beam radius at the membrane
  double beam_x = 162.2208e-6;
  double beam_y = 108.8e-6;

  bool contains(double x, double y) const noexcept {
    return x >= 0.0 && x <= L_x && y >= 0.0 && y <= L_y;
  }

  void validate() const {
    if (!(L_x > 0.0) || !(L_y > 0.0)) throw DomainError("membrane sides must be positive");
    if (!(beam_waist > 0.0)) throw DomainError("beam waist must be positive");
    if (!(tension > 0.0) || !(density > 0.0))
      throw DomainError("tension and density must be positive");
    if (!contains(beam_x, beam_y)) throw DomainError("beam centre lies outside the membrane");
  }
};

struct Environment {
  double temperature = 10.0;     // K
  bool exact_occupation = false;  // Bose-Einstein instead of k_B T / (hbar omega)

  void validate() const {
    if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  }
};

struct SystemParams {
  OpticalParams optics;
  MechanicalMode mode;
  Environment env;
  MembraneGeometry geometry;

  void validate() const {
    optics.validate();
    mode.validate();
    env.validate();
    geometry.validate();
  }
};

inline double thermal_occupation(double temperature, double omega_m, bool exact = false) {
  if (!(temperature > 0.0) || !(omega_m > 0.0))
    throw DomainError("thermal_occupation: temperature and frequency must be positive");
  const double x = kHbar * omega_m / (kBoltzmann * temperature);
  return exact ? 1.0 / std::expm1(x) : 1.0 / x;
}

inline double thermal_occupation(const Environment& env, const MechanicalMode& mode) {
  return thermal_occupation(env.temperature, mode.omega_m, env.exact_occupation);
}

/// g = g0 sqrt(n_cav).
inline double light_enhanced_coupling(double g0, double n_cav) {
  if (!(n_cav >= 0.0)) throw DomainError("light_enhanced_coupling: negative photon number");
  return g0 * std::sqrt(n_cav);
}

/// Gamma_opt = 4 g0^2 n_cav / kappa.
inline double measurement_rate(double g0, double n_cav, double kappa) {
  if (!(kappa > 0.0)) throw DomainError("measurement_rate: kappa must be positive");
  return 4.0 * g0 * g0 * n_cav / kappa;
}

/// Gamma_opt from a light-enhanced coupling g: 4 g^2 / kappa.
inline double measurement_rate_from_coupling(double g, double kappa) {
  return measurement_rate(g, 1.0, kappa);
}

inline double measurement_rate(const SystemParams& p) {
  return measurement_rate_from_coupling(p.mode.coupling(p.optics.n_cav), p.optics.kappa());
}

inline double quantum_cooperativity(double gamma_opt, double n, double gamma_m) {
  const double decoherence = n * gamma_m;
  if (!(decoherence > 0.0)) throw DomainError("quantum_cooperativity: zero thermal decoherence");
  return gamma_opt / decoherence;
}

/// Omega = pi sqrt(T/rho) sqrt(i^2/L_x^2 + j^2/L_y^2) for a stressed rectangular membrane.
inline double mode_frequency(int i, int j, const MembraneGeometry& geom) {
  if (i < 1 || j < 1) throw DomainError("mode_frequency: indices must be positive");
  const double a = i / geom.L_x;
  const double b = j / geom.L_y;
  return kPi * std::sqrt(geom.tension / geom.density) * std::sqrt(a * a + b * b);
}

/// sqrt(hbar / (2 m Omega)).
inline double zero_point_amplitude(double mass, double omega_m) {
  if (!(mass > 0.0) || !(omega_m > 0.0))
    throw DomainError("zero_point_amplitude: mass and frequency must be positive");
  return std::sqrt(kHbar / (2.0 * mass * omega_m));
}

/// Gaussian envelope of the beam-mode overlap, exp[-(w^2/8)(i^2 k_x^2 + j^2 k_y^2)].
inline double beam_envelope(int i, int j, const MembraneGeometry& geom) {
  const double kx = i * kPi / geom.L_x;
  const double ky = j * kPi / geom.L_y;
  return std::exp(-(geom.beam_waist * geom.beam_waist / 8.0) * (kx * kx + ky * ky));
}

/// Vacuum coupling g0 (rad/s) of mode (i, j) for a beam at (geom.beam_x, geom.beam_y).
/// G is the frequency pull per displacement in Hz/m, as produced by the transfer-matrix model.
inline double vacuum_coupling_map(int i, int j, const MembraneGeometry& geom, double G,
                                  const MechanicalMode& mode, bool with_envelope = false) {
  if (!geom.contains(geom.beam_x, geom.beam_y))
    throw DomainError("vacuum_coupling_map: beam outside the membrane");
  if (i < 1 || j < 1) throw DomainError("vacuum_coupling_map: indices must be positive");
  const double shape = std::sin(kPi * i * geom.beam_x / geom.L_x) *
                       std::sin(kPi * j * geom.beam_y / geom.L_y);
  const double envelope = with_envelope ? beam_envelope(i, j, geom) : 1.0;
  return kTwoPi * G * zero_point_amplitude(mode.mass, mode.omega_m) * shape * envelope;
}

}  // namespace optomech
