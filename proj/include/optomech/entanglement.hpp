#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "optomech/linalg.hpp"
#include "optomech/params.hpp"

namespace optomech {

struct FilterParams {
  double kappa_f = to_angular(0.2e6);  // filter linewidth
  double detuning_f = 0.0;             // filter centre at omega_laser - detuning_f
  double eta = 1.0;                    // collection efficiency into the filter

  void validate() const {
    if (!(kappa_f > 0.0)) throw DomainError("filter linewidth must be positive");
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("filter efficiency must lie in [0, 1]");
  }
};

struct FilteredSystem {
  Matrix A;  // 6x6 time-domain drift over (X, Y, q, p, x, y)
  Matrix D;  // 6x6 input covariance
};

/// Cavity, mechanics and a filter cavity cascaded on the output field.
inline FilteredSystem build_filtered_drift(const SystemParams& p, const MechanicalMode& m,
                                           const FilterParams& f) {
  p.optics.validate();
  m.validate();
  f.validate();
  const double kappa = p.optics.kappa();
  const double delta = p.optics.detuning;
  const double g = m.coupling(p.optics.n_cav);
  const double n = thermal_occupation(p.env, m);
  const double cascade = std::sqrt(f.kappa_f * f.eta * kappa);

  FilteredSystem s{Matrix::Zero(6, 6), Matrix::Zero(6, 6)};
  Matrix& A = s.A;
  A(0, 0) = -kappa / 2.0;
  A(0, 1) = -delta;
  A(1, 0) = delta;
  A(1, 1) = -kappa / 2.0;
  A(1, 2) = 2.0 * g;
  A(2, 3) = m.omega_m;
  A(3, 0) = 2.0 * g;
  A(3, 2) = -m.omega_m;
  A(3, 3) = -m.gamma_m;
  A(4, 0) = -cascade;
  A(4, 4) = -f.kappa_f / 2.0;
  A(4, 5) = -f.detuning_f;
  A(5, 1) = -cascade;
  A(5, 4) = f.detuning_f;
  A(5, 5) = -f.kappa_f / 2.0;

  Matrix twoD = Matrix::Zero(6, 6);
  twoD(0, 0) = kappa;
  twoD(1, 1) = kappa;
  twoD(3, 3) = 4.0 * n * m.gamma_m;
  twoD(4, 4) = f.kappa_f;
  twoD(5, 5) = f.kappa_f;
  twoD(0, 4) = twoD(4, 0) = cascade;
  twoD(1, 5) = twoD(5, 1) = cascade;
  s.D = 0.5 * twoD;
  return s;
}

struct CovarianceBlocks {
  Matrix V;  // 6x6
  Eigen::Matrix2d V_c, V_m, V_o, V_cm, V_co, V_mo;
  Eigen::Matrix4d U;  // (q, p, x, y)
  double residual = 0.0;
};

inline CovarianceBlocks steady_covariance(const Matrix& A, const Matrix& D,
                                          double residual_tolerance = 1e-8) {
  if (A.rows() != 6 || D.rows() != 6) throw DomainError("steady_covariance: expected 6x6 system");
  CovarianceBlocks b;
  b.V = solve_lyapunov(A, D, residual_tolerance);
  b.residual = lyapunov_residual(A, b.V, D);
  const auto block = [&](int r, int c) -> Eigen::Matrix2d { return b.V.block<2, 2>(r, c); };
  b.V_c = block(0, 0);
  b.V_m = block(2, 2);
  b.V_o = block(4, 4);
  b.V_cm = block(0, 2);
  b.V_co = block(0, 4);
  b.V_mo = block(2, 4);
  b.U = b.V.block<4, 4>(2, 2);
  return b;
}

inline CovarianceBlocks steady_covariance(const FilteredSystem& s) { return steady_covariance(s.A, s.D); }

/// Logarithmic negativity (natural log) of a two-mode covariance with vacuum variance 1/2.
inline double log_negativity(const Eigen::Matrix4d& U, double tolerance = 1e-9) {
  const Eigen::Matrix2d a = U.block<2, 2>(0, 0);
  const Eigen::Matrix2d b = U.block<2, 2>(2, 2);
  const Eigen::Matrix2d c = U.block<2, 2>(0, 2);
  const double sigma = a.determinant() + b.determinant() - 2.0 * c.determinant();
  const double det_u = U.determinant();
  double disc = sigma * sigma - 4.0 * det_u;
  const double scale = std::max(1.0, sigma * sigma);
  if (disc < 0.0) {
    if (disc < -tolerance * scale) throw DomainError("log_negativity: negative discriminant");
    disc = 0.0;
  }
  const double nu2 = 0.5 * (sigma - std::sqrt(disc));
  if (!(nu2 > 0.0)) throw DomainError("log_negativity: non-positive symplectic eigenvalue");
  return std::max(0.0, -std::log(2.0 * std::sqrt(nu2)));
}

/// Which 2x2 cross block enters Sigma.
enum class SigmaBlock {
  mechanics_output,  // V_mo, the block inside U
  cavity_mechanics,  // V_cm, the symbol as printed
};

inline double log_negativity(const CovarianceBlocks& b,
                             SigmaBlock cross = SigmaBlock::mechanics_output) {
  if (cross == SigmaBlock::mechanics_output) return log_negativity(b.U);
  Eigen::Matrix4d U = b.U;
  // Substitute the printed cross block for Sigma only; det U keeps the true correlations.
  const double sigma = b.V_m.determinant() + b.V_o.determinant() - 2.0 * b.V_cm.determinant();
  const double disc = std::max(0.0, sigma * sigma - 4.0 * U.determinant());
  const double nu2 = 0.5 * (sigma - std::sqrt(disc));
  if (!(nu2 > 0.0)) throw DomainError("log_negativity: non-positive symplectic eigenvalue");
  return std::max(0.0, -std::log(2.0 * std::sqrt(nu2)));
}

struct EntanglementPoint {
  double delta_f = 0.0;  // rad/s
  double E_N = 0.0;
  double residual = 0.0;
};

struct EntanglementSweep {
  std::vector<EntanglementPoint> points;
  std::size_t argmax = 0;

  const EntanglementPoint& best() const { return points.at(argmax); }
  double max_residual() const {
    double r = 0.0;
    for (const auto& p : points) r = std::max(r, p.residual);
    return r;
  }
};

inline EntanglementSweep entanglement_sweep(const SystemParams& p, const MechanicalMode& m,
                                            double kappa_f, double eta,
                                            const std::vector<double>& delta_grid) {
  EntanglementSweep sweep;
  sweep.points.reserve(delta_grid.size());
  for (double d : delta_grid) {
    if (!std::isfinite(d)) throw DomainError("entanglement_sweep: non-finite grid point");
    const auto blocks = steady_covariance(build_filtered_drift(p, m, {kappa_f, d, eta}));
    sweep.points.push_back({d, log_negativity(blocks), blocks.residual});
    if (sweep.points.back().E_N > sweep.points[sweep.argmax].E_N) sweep.argmax = sweep.points.size() - 1;
  }
  return sweep;
}

}  // namespace optomech
