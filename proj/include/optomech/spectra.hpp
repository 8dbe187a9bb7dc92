#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "optomech/linalg.hpp"
#include "optomech/params.hpp"

namespace optomech {

/// Linearised dynamics in the frequency-domain convention w = (-i W + M')^{-1} w_in.
/// Ordering is (X, Y, q_1, p_1, ..., q_N, p_N).
struct DriftSystem {
  Matrix drift;      // M'; the time-domain drift is -M'
  Vector noise;      // diagonal of the symmetrised input covariance D
  int n_modes = 0;
  double kappa = 0.0;
  std::vector<MechanicalMode> modes;

  Eigen::Index size() const noexcept { return drift.rows(); }
  Matrix time_domain_drift() const { return -drift; }
  Matrix noise_matrix() const { return noise.asDiagonal(); }
  static constexpr Eigen::Index q_index(int mode) noexcept { return 2 + 2 * mode; }
  static constexpr Eigen::Index p_index(int mode) noexcept { return 3 + 2 * mode; }
};

namespace detail {

inline double bath_noise(const Environment& env, const MechanicalMode& m) {
  const double n = thermal_occupation(env.temperature, m.omega_m, env.exact_occupation);
  return 2.0 * m.gamma_m * (env.exact_occupation ? n + 0.5 : n);
}

}  // namespace detail

inline DriftSystem build_drift(const SystemParams& params, const std::vector<MechanicalMode>& modes) {
  params.optics.validate();
  params.env.validate();
  const double kappa = params.optics.kappa();
  const double delta = params.optics.detuning;
  const int N = static_cast<int>(modes.size());
  const Eigen::Index dim = 2 + 2 * N;

  DriftSystem sys;
  sys.n_modes = N;
  sys.kappa = kappa;
  sys.modes = modes;
  sys.drift = Matrix::Zero(dim, dim);
  sys.noise = Vector::Zero(dim);

  Matrix& M = sys.drift;
  M(0, 0) = kappa / 2.0;
  M(0, 1) = delta;
  M(1, 0) = -delta;
  M(1, 1) = kappa / 2.0;
  sys.noise(0) = kappa / 2.0;
  sys.noise(1) = kappa / 2.0;

  for (int i = 0; i < N; ++i) {
    const MechanicalMode& m = modes[static_cast<std::size_t>(i)];
    m.validate();
    const double g = m.coupling(params.optics.n_cav);
    const auto q = DriftSystem::q_index(i), p = DriftSystem::p_index(i);
    M(1, q) = 2.0 * g;
    M(p, 0) = 2.0 * g;
    M(q, p) = -m.omega_m;
    M(p, q) = m.omega_m;
    M(p, p) = m.gamma_m;
    sys.noise(p) = detail::bath_noise(params.env, m);
  }
  return sys;
}

inline DriftSystem build_drift(const SystemParams& params) { return build_drift(params, {params.mode}); }

inline void require_stable(const DriftSystem& sys) {
  if (!is_hurwitz(sys.time_domain_drift()))
    throw StabilityError("drift system is unstable: no steady state");
}

struct Spectrum {
  std::vector<double> omega;   // rad/s
  std::vector<double> values;  // shot noise = 1
  std::string observable = "X_out";
  std::string model = "full";
  double efficiency = 1.0;
  double mirror_noise = 0.0;

  std::size_t size() const noexcept { return values.size(); }
  double min_value() const { return *std::min_element(values.begin(), values.end()); }
  std::size_t argmin() const {
    return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  }
};

/// First row of L(W) = (-i W + M')^{-1}.
inline Eigen::RowVectorXcd response_row(const DriftSystem& sys, double omega) {
  const Eigen::Index n = sys.size();
  ComplexMatrix K = sys.drift.cast<std::complex<double>>();
  K.diagonal().array() -= std::complex<double>(0.0, omega);
  const Eigen::PartialPivLU<ComplexMatrix> lu(K.transpose());
  if (!(lu.rcond() > 1e-14))
    throw ConditioningError("response matrix is near-singular at omega = " + std::to_string(omega));
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  e(0) = 1.0;
  return lu.solve(e).transpose();
}

/// Symmetrised output amplitude-quadrature spectrum at one frequency.
inline double output_spectrum_at(const DriftSystem& sys, double omega, double efficiency = 1.0) {
  const Eigen::RowVectorXcd L = response_row(sys, omega);
  double s_xx = 0.0;
  for (Eigen::Index j = 0; j < L.size(); ++j) s_xx += std::norm(L(j)) * sys.noise(j);
  return 1.0 + efficiency * sys.kappa * (2.0 * s_xx - 2.0 * L(0).real());
}

inline Spectrum full_spectrum(const DriftSystem& sys, const std::vector<double>& omega_grid,
                              double efficiency = 1.0) {
  if (!(efficiency >= 0.0 && efficiency <= 1.0))
    throw DomainError("full_spectrum: efficiency must lie in [0, 1]");
  require_stable(sys);
  Spectrum s;
  s.omega = omega_grid;
  s.values.reserve(omega_grid.size());
  for (double w : omega_grid) {
    if (!std::isfinite(w)) throw DomainError("full_spectrum: non-finite grid point");
    s.values.push_back(output_spectrum_at(sys, w, efficiency));
  }
  s.efficiency = efficiency;
  return s;
}

struct SpectrumMinimum {
  double omega = 0.0;
  double value = 0.0;
};

/// Minimum of the full spectrum on [lo, hi]: grid scan followed by Brent refinement.
inline SpectrumMinimum spectrum_minimum(const DriftSystem& sys, double lo, double hi,
                                        int grid_points = 4001, double efficiency = 1.0) {
  require_stable(sys);
  const auto f = [&](double w) { return output_spectrum_at(sys, w, efficiency); };
  double best_w = lo, best = f(lo);
  const double step = (hi - lo) / (grid_points - 1);
  for (int n = 1; n < grid_points; ++n) {
    const double w = lo + step * n;
    const double v = f(w);
    if (v < best) {
      best = v;
      best_w = w;
    }
  }
  const auto r = boost::math::tools::brent_find_minima(f, std::max(lo, best_w - step),
                                                       std::min(hi, best_w + step), 52);
  return r.second < best ? SpectrumMinimum{r.first, r.second} : SpectrumMinimum{best_w, best};
}

struct SusceptibilityBundle {
  std::complex<double> chi_m;
  std::complex<double> chi_eff;
  std::complex<double> u;
  std::complex<double> v;
  double theta = 0.0;      // 8 Delta / kappa
  double omega_eff = 0.0;  // from chi_eff at Omega = Omega_m
  double gamma_eff = 0.0;
};

inline std::complex<double> mechanical_susceptibility(const MechanicalMode& m, double omega) {
  return m.omega_m / std::complex<double>(m.omega_m * m.omega_m - omega * omega, -m.gamma_m * omega);
}

inline SusceptibilityBundle susceptibilities(const SystemParams& p, const MechanicalMode& m,
                                             double omega) {
  using C = std::complex<double>;
  const double kappa = p.optics.kappa();
  const double delta = p.optics.detuning;
  const double g = m.coupling(p.optics.n_cav);
  const auto uv = [&](double w) {
    const C a = C(kappa, -2.0 * w);
    const C den = 4.0 * delta * delta + a * a;
    return std::pair<C, C>{-2.0 * delta * kappa / den, a * kappa / den};
  };
  SusceptibilityBundle b;
  std::tie(b.u, b.v) = uv(omega);
  b.chi_m = mechanical_susceptibility(m, omega);
  b.chi_eff = 1.0 / (1.0 / b.chi_m - 8.0 * g * g / kappa * b.u);
  b.theta = 8.0 * delta / kappa;

  const C u_m = uv(m.omega_m).first;
  b.omega_eff = std::sqrt(m.omega_m * m.omega_m - 8.0 * g * g * m.omega_m / kappa * u_m.real());
  b.gamma_eff = m.gamma_m + 8.0 * g * g / kappa * u_m.imag();
  return b;
}

struct ApproxSpectrum {
  Spectrum total;
  std::vector<double> imprecision;
  std::vector<double> correlation;
  std::vector<double> backaction;
  std::vector<double> thermal;
  bool fast_cavity = false;    // kappa >> |Delta|, max Omega (factor 10)
  bool high_cooperativity = false;  // 4 g^2 / (kappa Gamma_m) >> 1
};

/// Fast-cavity approximation of the single-mode output spectrum, with its four terms.
inline ApproxSpectrum approx_spectrum(const SystemParams& p, const MechanicalMode& m,
                                      const std::vector<double>& omega_grid) {
  const double kappa = p.optics.kappa();
  const double g = m.coupling(p.optics.n_cav);
  const double gamma_opt = 4.0 * g * g / kappa;
  const double n = thermal_occupation(p.env, m);
  ApproxSpectrum out;
  out.total.omega = omega_grid;
  out.total.model = "approx";
  for (double w : omega_grid) {
    const SusceptibilityBundle b = susceptibilities(p, m, w);
    const double chi2 = std::norm(b.chi_eff);
    out.imprecision.push_back(1.0);
    out.correlation.push_back(-2.0 * b.theta * gamma_opt * b.chi_eff.real());
    out.backaction.push_back(b.theta * b.theta * gamma_opt * gamma_opt * chi2);
    out.thermal.push_back(b.theta * b.theta * gamma_opt * n * m.gamma_m * chi2);
    out.total.values.push_back(out.imprecision.back() + out.correlation.back() +
                               out.backaction.back() + out.thermal.back());
  }
  double w_max = 0.0;
  for (double w : omega_grid) w_max = std::max(w_max, std::abs(w));
  out.fast_cavity = kappa > 10.0 * std::max(std::abs(p.optics.detuning), w_max);
  out.high_cooperativity = gamma_opt / m.gamma_m > 10.0;
  return out;
}

/// 1 - Gamma_opt / (Gamma_opt + n Gamma_m).
inline double squeezing_bound(double gamma_opt, double n_gamma_m) {
  const double total = gamma_opt + n_gamma_m;
  if (!(total > 0.0)) throw DomainError("squeezing_bound: no measurement or decoherence");
  return 1.0 - gamma_opt / total;
}

inline double squeezing_bound(const SystemParams& p, const MechanicalMode& m) {
  const double gamma_opt =
      measurement_rate_from_coupling(m.coupling(p.optics.n_cav), p.optics.kappa());
  return squeezing_bound(gamma_opt, thermal_occupation(p.env, m) * m.gamma_m);
}

/// Loss and flat classical background: eta S + (1 - eta) + mirror_noise.
inline double detection_chain(double value, double eta, double mirror_noise) {
  return eta * value + (1.0 - eta) + mirror_noise;
}

inline Spectrum detection_chain(const Spectrum& spec, double eta, double mirror_noise) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("detection_chain: eta must lie in [0, 1]");
  if (!(mirror_noise >= 0.0)) throw DomainError("detection_chain: negative mirror noise");
  Spectrum out = spec;
  for (double& v : out.values) v = detection_chain(v, eta, mirror_noise);
  out.efficiency = spec.efficiency * eta;
  out.mirror_noise = spec.mirror_noise + mirror_noise;
  return out;
}

inline double db(double value) {
  if (!(value > 0.0)) throw DomainError("db: value must be positive");
  return 10.0 * std::log10(value);
}

/// Mean phonon number (V_qq + V_pp - 1)/2 of one mode from the steady-state covariance.
inline double effective_occupation(const DriftSystem& sys, int mode_index) {
  if (mode_index < 0 || mode_index >= sys.n_modes)
    throw DomainError("effective_occupation: mode index out of range");
  const Matrix V = solve_lyapunov(sys.time_domain_drift(), sys.noise_matrix());
  const auto q = DriftSystem::q_index(mode_index), p = DriftSystem::p_index(mode_index);
  return 0.5 * (V(q, q) + V(p, p) - 1.0);
}

/// Uniform grid covering +-half_widths effective linewidths around every mode.
inline std::vector<double> default_grid(const SystemParams& p, const std::vector<MechanicalMode>& modes,
                                        int points = 4001, double half_widths = 10.0) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& m : modes) {
    const SusceptibilityBundle b = susceptibilities(p, m, m.omega_m);
    const double half = half_widths * std::max(b.gamma_eff, m.gamma_m);
    const double a = std::max(0.0, b.omega_eff - half), c = b.omega_eff + half;
    lo = first ? a : std::min(lo, a);
    hi = first ? c : std::max(hi, c);
    first = false;
  }
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int n = 0; n < points; ++n) grid[static_cast<std::size_t>(n)] = lo + (hi - lo) * n / (points - 1);
  return grid;
}

inline std::vector<double> linear_grid(double lo, double hi, int points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int n = 0; n < points; ++n) grid[static_cast<std::size_t>(n)] = lo + (hi - lo) * n / (points - 1);
  return grid;
}

}  // namespace optomech
