#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

struct MembraneCoefficients {
  cplx r{0.0, 0.0};
  cplx t{0.0, -1.0};
};

/// Element with no reflection and unit transmission i*t = 1.
inline MembraneCoefficients transparent_membrane() { return {}; }

/// Lossless dielectric slab of given thickness and index at normal incidence.
/// Phases are referenced to the slab centre; t is returned in the matrix convention
/// where the transmitted amplitude is i*t.
inline MembraneCoefficients thin_film_membrane(double thickness, double index, double wavelength) {
  if (!(thickness >= 0.0) || !(index > 0.0) || !(wavelength > 0.0))
    throw DomainError("thin_film_membrane: invalid slab parameters");
  const double k = kTwoPi / wavelength;
  const double delta = index * k * thickness;
  const cplx den = 2.0 * index * std::cos(delta) - kI * (index * index + 1.0) * std::sin(delta);
  const cplx centre = std::exp(-kI * k * thickness);
  const cplx r = -kI * (index * index - 1.0) * std::sin(delta) / den * centre;
  const cplx t = 2.0 * index / den * centre;
  return {r, t / kI};
}

/// Power transmission giving a decay rate kappa through one mirror of a cavity of length L.
inline double mirror_transmission_for_decay_rate(double kappa, double length) {
  if (!(kappa >= 0.0) || !(length > 0.0))
    throw DomainError("mirror_transmission_for_decay_rate: invalid arguments");
  const double T = kappa * 2.0 * length / kSpeedOfLight;
  if (T > 1.0) throw DomainError("mirror_transmission_for_decay_rate: transmission exceeds 1");
  return T;
}

struct CavityStack {
  double r1 = 1.0, t1 = 0.0;  // incoupler
  double r2 = 1.0, t2 = 0.0;  // outcoupler
  cplx r_m{0.0, 0.0};
  cplx t_m{0.0, -1.0};
  double L = 1.7e-3;    // m
  double z_m = 0.85e-3;  // membrane distance from mirror 2

  static CavityStack from_transmissions(double T1, double T2, MembraneCoefficients membrane,
                                        double length, double z_m) {
    CavityStack s;
    s.r1 = std::sqrt(1.0 - T1);
    s.t1 = std::sqrt(T1);
    s.r2 = std::sqrt(1.0 - T2);
    s.t2 = std::sqrt(T2);
    s.r_m = membrane.r;
    s.t_m = membrane.t;
    s.L = length;
    s.z_m = z_m;
    return s;
  }

  CavityStack with_position(double z) const {
    CavityStack s = *this;
    s.z_m = z;
    return s;
  }

  double free_spectral_range_k() const noexcept { return kPi / L; }

  void validate() const {
    constexpr double slack = 1e-12;
    if (r1 * r1 + t1 * t1 > 1.0 + slack || r2 * r2 + t2 * t2 > 1.0 + slack ||
        std::norm(r_m) + std::norm(t_m) > 1.0 + slack)
      throw DomainError("CavityStack: element with |r|^2 + |t|^2 > 1");
    if (!(L > 0.0) || !(z_m > 0.0) || !(z_m < L))
      throw DomainError("CavityStack: membrane must sit strictly inside the cavity");
  }
};

struct FieldSolution {
  std::array<cplx, 4> A{};  // A1..A4
  cplx A_refl;
  cplx A_tran;
  double k = 0.0;
  double residual = 0.0;
};

namespace detail {

inline Eigen::Matrix4cd field_matrix(const CavityStack& s, double k, cplx& e1, cplx& e2) {
  e1 = std::exp(kI * (k * (s.L - s.z_m)));
  e2 = std::exp(kI * (k * s.z_m));
  Eigen::Matrix4cd M;
  M << -1.0, s.r1 * e1, 0.0, 0.0,
       s.r_m * e1, -1.0, 0.0, kI * s.t_m * e2,
       kI * s.t_m * e1, 0.0, -1.0, s.r_m * e2,
       0.0, 0.0, s.r2 * e2, -1.0;
  return M;
}

inline Eigen::Vector4cd drive(const CavityStack& s) { return {-kI * s.t1, 0.0, 0.0, 0.0}; }

}  // namespace detail

/// Solves the four-field system for unit input amplitude.
inline FieldSolution solve_fields(const CavityStack& s, double k) {
  cplx e1, e2;
  const Eigen::Matrix4cd M = detail::field_matrix(s, k, e1, e2);
  const Eigen::Vector4cd b = detail::drive(s);
  const Eigen::PartialPivLU<Eigen::Matrix4cd> lu(M);
  if (!(lu.rcond() > 1e-14)) throw ConditioningError("solve_fields: singular field system");
  const Eigen::Vector4cd x = lu.solve(b);
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff());
  const double residual = (M * x - b).cwiseAbs().maxCoeff() / scale;
  if (!(residual < 1e-12)) throw ConditioningError("solve_fields: residual too large");

  FieldSolution sol;
  for (int i = 0; i < 4; ++i) sol.A[i] = x(i);
  sol.A_tran = kI * s.t2 * sol.A[2] * e2;
  sol.A_refl = kI * s.t1 * sol.A[1] * e1 + s.r1;
  sol.k = k;
  sol.residual = residual;
  return sol;
}

namespace detail {

/// Circulating field at the incoupler relative to its single-pass value, 1/(1 - round trip).
/// Eliminating A2..A4 from the four-field system gives this closed form.
inline cplx round_trip_response(const CavityStack& s, double k) {
  const cplx e1sq = std::exp(kI * (2.0 * k * (s.L - s.z_m)));
  const cplx e2sq = std::exp(kI * (2.0 * k * s.z_m));
  const cplx it = kI * s.t_m;
  const cplx right = s.r_m + it * it * s.r2 * e2sq / (1.0 - s.r_m * s.r2 * e2sq);
  return 1.0 / (1.0 - s.r1 * e1sq * right);
}

/// Brackets sign changes of Im(response) on a uniform grid and refines them to resonances.
template <class StackAt>
std::vector<double> bracket_resonances(StackAt&& stack_at, double k_min, double k_max,
                                       std::size_t n_grid) {
  std::vector<double> roots;
  const auto im = [&](double k) { return round_trip_response(stack_at(k), k).imag(); };
  boost::math::tools::eps_tolerance<double> tol(42);
  double k_prev = k_min;
  double f_prev = im(k_prev);
  for (std::size_t n = 1; n <= n_grid; ++n) {
    const double k = k_min + (k_max - k_min) * static_cast<double>(n) / static_cast<double>(n_grid);
    const double f = im(k);
    if ((f_prev < 0.0) != (f < 0.0)) {
      std::uintmax_t max_iter = 200;
      const auto [a, b] = boost::math::tools::bisect(im, k_prev, k, tol, max_iter);
      const double root = 0.5 * (a + b);
      if (round_trip_response(stack_at(root), root).real() > 1.0) roots.push_back(root);
    }
    k_prev = k;
    f_prev = f;
  }
  return roots;
}

}  // namespace detail

/// Resonant wavenumbers in [k_min, k_max] for a fixed membrane position.
/// A resonance is a zero of the round-trip phase where the circulating field is enhanced.
inline std::vector<double> find_resonances(const CavityStack& s, double k_min, double k_max,
                                           double points_per_fsr = 1e4) {
  if (!(k_max > k_min)) throw DomainError("find_resonances: empty interval");
  const double span = (k_max - k_min) / s.free_spectral_range_k();
  const auto n = static_cast<std::size_t>(std::ceil(span * points_per_fsr)) + 1;
  return detail::bracket_resonances([&](double) -> const CavityStack& { return s; }, k_min, k_max,
                                    n);
}

struct LorentzianFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double center = 0.0;
  double half_width = 0.0;  // half width at half maximum, in x units
  double relative_rms = 0.0;
};

namespace detail {

struct LorentzianFunctor : Eigen::DenseFunctor<double> {
  const Eigen::VectorXd& x;
  const Eigen::VectorXd& y;
  LorentzianFunctor(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys)
      : Eigen::DenseFunctor<double>(4, static_cast<int>(xs.size())), x(xs), y(ys) {}

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (Eigen::Index n = 0; n < x.size(); ++n) {
      const double u = (x(n) - p(2)) / p(3);
      f(n) = p(0) + p(1) / (1.0 + u * u) - y(n);
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& J) const {
    for (Eigen::Index n = 0; n < x.size(); ++n) {
      const double u = (x(n) - p(2)) / p(3);
      const double q = 1.0 / (1.0 + u * u);
      J(n, 0) = 1.0;
      J(n, 1) = q;
      J(n, 2) = 2.0 * p(1) * q * q * u / p(3);
      J(n, 3) = 2.0 * p(1) * q * q * u * u / p(3);
    }
    return 0;
  }
};

}  // namespace detail

/// Least-squares fit of offset + amplitude / (1 + ((x - center)/half_width)^2).
/// The initial guess places the peak at the sample maximum with the supplied half width.
inline LorentzianFit fit_lorentzian(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                    double half_width_guess, double max_relative_rms = 1e-3) {
  if (x.size() != y.size() || x.size() < 5)
    throw InsufficientDataError("fit_lorentzian: need at least five samples");
  Eigen::Index peak = 0;
  const double y_max = y.maxCoeff(&peak);
  if (!(y_max > 0.0)) throw DegenerateDataError("fit_lorentzian: no positive peak");

  // Work in normalised units so all parameters are O(1).
  const double x0 = x(peak);
  const double xs = half_width_guess;
  const Eigen::VectorXd xn = (x.array() - x0) / xs;
  const Eigen::VectorXd yn = y / y_max;

  detail::LorentzianFunctor functor(xn, yn);
  Eigen::LevenbergMarquardt<detail::LorentzianFunctor> lm(functor);
  lm.setXtol(1e-10);
  lm.setFtol(1e-14);
  lm.setMaxfev(2000);
  Eigen::VectorXd p(4);
  p << 0.0, 1.0, 0.0, 1.0;
  lm.minimize(p);

  Eigen::VectorXd r(xn.size());
  functor(p, r);
  LorentzianFit fit;
  fit.offset = p(0) * y_max;
  fit.amplitude = p(1) * y_max;
  fit.center = x0 + p(2) * xs;
  fit.half_width = std::abs(p(3)) * xs;
  fit.relative_rms = std::sqrt(r.squaredNorm() / static_cast<double>(r.size())) / std::abs(p(1));
  if (!std::isfinite(fit.relative_rms) || fit.relative_rms > max_relative_rms)
    throw FitQualityError("fit_lorentzian: residual above threshold", fit.relative_rms);
  return fit;
}

inline double transmitted_power(const CavityStack& s, double k) {
  cplx e1, e2;
  const Eigen::Vector4cd x = detail::field_matrix(s, k, e1, e2).partialPivLu().solve(detail::drive(s));
  return s.t2 * s.t2 * std::norm(x(2));
}

/// Full linewidth kappa (rad/s) of the resonance at k_res from a Lorentzian fit to |A_tran|^2.
inline double linewidth_by_fit(const CavityStack& s, double k_res, int samples = 401,
                               double span_in_linewidths = 10.0) {
  const double peak = transmitted_power(s, k_res);
  if (!(peak > 0.0)) throw DegenerateDataError("linewidth_by_fit: no transmission at resonance");

  // Half-maximum location by outward doubling and bisection; sets the sweep window.
  const auto below_half = [&](double h) { return transmitted_power(s, k_res + h) - 0.5 * peak; };
  const double fsr = s.free_spectral_range_k();
  double h = fsr * 1e-9;
  while (below_half(h) > 0.0) {
    h *= 2.0;
    if (h > 0.5 * fsr) throw FitQualityError("linewidth_by_fit: no half-maximum within FSR", 1.0);
  }
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::bisect(below_half, 0.5 * h, h,
                                                 boost::math::tools::eps_tolerance<double>(30),
                                                 max_iter);
  const double hwhm = 0.5 * (a + b);

  const double half_span = 0.5 * span_in_linewidths * 2.0 * hwhm;
  Eigen::VectorXd xs(samples), ys(samples);
  for (int n = 0; n < samples; ++n) {
    const double dk = -half_span + 2.0 * half_span * n / (samples - 1);
    xs(n) = dk;
    ys(n) = transmitted_power(s, k_res + dk);
  }
  const LorentzianFit fit = fit_lorentzian(xs, ys, hwhm);
  return 2.0 * fit.half_width * kSpeedOfLight;
}

struct CouplingOutcoupling {
  double G = 0.0;      // Hz/m
  double eta_c = 0.0;  // outcoupling efficiency
};

inline CouplingOutcoupling coupling_and_outcoupling(const CavityStack& s, double k_res) {
  const FieldSolution f = solve_fields(s, k_res);
  const double a1 = std::norm(f.A[0]), a2 = std::norm(f.A[1]);
  const double a3 = std::norm(f.A[2]), a4 = std::norm(f.A[3]);
  const double T1 = s.t1 * s.t1, T2 = s.t2 * s.t2;
  CouplingOutcoupling out;
  out.eta_c = T2 * a3 / (T2 * a3 + T1 * a2);
  const double omega_L = kSpeedOfLight * k_res;
  out.G = omega_L * (a1 + a2 - a3 - a4) / ((s.L - s.z_m) * (a1 + a2) + s.z_m * (a3 + a4)) / kTwoPi;
  return out;
}

struct WorkingPoint {
  double two_k_zm = 0.0;     // rad, in [0, 2 pi)
  double kappa = 0.0;        // rad/s
  double eta_c = 0.0;
  double G = 0.0;            // Hz/m
  double delta_f_cav = 0.0;  // Hz, shift from the nearest empty-cavity line
  double k = 0.0;            // resonant wavenumber
  double z_m = 0.0;          // membrane position realising two_k_zm at k
};

struct SweepOptions {
  double points_per_fsr = 1e4;
  int fit_samples = 401;
};

/// Working point at membrane phase theta = 2 k z_m, for the resonance nearest k_ref.
/// The membrane follows z_m(k) = (theta + 2 pi N)/(2k), with N set by the stack's nominal z_m.
inline WorkingPoint working_point_at(const CavityStack& stack, double k_ref, double theta,
                                     const SweepOptions& opt = {}) {
  const double N = std::floor(2.0 * k_ref * stack.z_m / kTwoPi);
  const auto z_of = [&](double k) { return (theta + kTwoPi * N) / (2.0 * k); };
  const double fsr = stack.free_spectral_range_k();
  const double k_lo = k_ref - 0.75 * fsr, k_hi = k_ref + 0.75 * fsr;
  const auto n = static_cast<std::size_t>(std::ceil(1.5 * opt.points_per_fsr)) + 1;
  const auto roots =
      detail::bracket_resonances([&](double k) { return stack.with_position(z_of(k)); }, k_lo,
                                 k_hi, n);
  if (roots.empty()) throw ConditioningError("working_point_at: no resonance near reference");
  const double k_res = *std::min_element(roots.begin(), roots.end(), [&](double a, double b) {
    return std::abs(a - k_ref) < std::abs(b - k_ref);
  });

  const CavityStack fixed = stack.with_position(z_of(k_res));
  fixed.validate();
  WorkingPoint wp;
  wp.two_k_zm = theta;
  wp.k = k_res;
  wp.z_m = fixed.z_m;
  wp.kappa = linewidth_by_fit(fixed, k_res, opt.fit_samples);
  const auto co = coupling_and_outcoupling(fixed, k_res);
  wp.G = co.G;
  wp.eta_c = co.eta_c;
  const double comb = std::round(k_res / fsr) * fsr;
  wp.delta_f_cav = kSpeedOfLight * (k_res - comb) / kTwoPi;
  return wp;
}

/// Samples the working point uniformly in 2 k z_m over [0, 2 pi).
inline std::vector<WorkingPoint> working_point_sweep(const CavityStack& stack, double k_ref,
                                                     int n_points, const SweepOptions& opt = {}) {
  if (n_points < 2) throw DomainError("working_point_sweep: need at least two points");
  std::vector<WorkingPoint> out;
  out.reserve(static_cast<std::size_t>(n_points));
  for (int n = 0; n < n_points; ++n)
    out.push_back(working_point_at(stack, k_ref, kTwoPi * n / n_points, opt));
  return out;
}

}  // namespace optomech
