#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "optomech/params.hpp"

namespace optomech {

struct CouplingMeasurement {
  int index_i = 1;
  int index_j = 1;
  double g_meas = 0.0;   // rad/s, magnitude of the cavity-enhanced coupling
  double omega_m = 0.0;  // rad/s
};

/// Gaussian-weighted mode displacement of mode (i, j) for a beam centred at (x, y).
inline double overlap_factor(int i, int j, double x, double y, const MembraneGeometry& geom) {
  if (!geom.contains(x, y)) throw DomainError("overlap_factor: point outside the membrane");
  const double kx = kPi / geom.L_x;
  const double ky = kPi / geom.L_y;
  return beam_envelope(i, j, geom) * std::sin(i * kx * x) * std::sin(j * ky * y);
}

inline void check_measurements(const std::vector<CouplingMeasurement>& ms) {
  std::set<std::pair<int, int>> seen;
  for (const auto& m : ms) {
    if (m.index_i < 1 || m.index_j < 1) throw DomainError("mode indices must be positive");
    if (!(m.g_meas >= 0.0)) throw DomainError("couplings must be non-negative magnitudes");
    if (!(m.omega_m > 0.0)) throw DomainError("mode frequencies must be positive");
    if (!seen.insert({m.index_i, m.index_j}).second)
      throw DegenerateDataError("duplicate mode (" + std::to_string(m.index_i) + "," +
                                std::to_string(m.index_j) + ") in dataset");
  }
}

/// Unit vector of g sqrt(Omega_m); the common scale of the couplings drops out.
inline Eigen::VectorXd data_vector(const std::vector<CouplingMeasurement>& ms) {
  if (ms.empty()) throw InsufficientDataError("data_vector: no measurements");
  check_measurements(ms);
  Eigen::VectorXd v(static_cast<Eigen::Index>(ms.size()));
  for (std::size_t n = 0; n < ms.size(); ++n)
    v(static_cast<Eigen::Index>(n)) = ms[n].g_meas * std::sqrt(ms[n].omega_m);
  const double norm = v.norm();
  if (!(norm > 0.0)) throw DegenerateDataError("data_vector: all couplings are zero");
  return v / norm;
}

/// Unit vector of |eta_ij(x, y)| over the measured modes; zero where every mode has a node.
inline Eigen::VectorXd model_vector(const std::vector<CouplingMeasurement>& ms, double x, double y,
                                    const MembraneGeometry& geom) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(ms.size()));
  for (std::size_t n = 0; n < ms.size(); ++n)
    v(static_cast<Eigen::Index>(n)) = std::abs(overlap_factor(ms[n].index_i, ms[n].index_j, x, y, geom));
  const double norm = v.norm();
  return norm > 0.0 ? Eigen::VectorXd(v / norm) : v;
}

inline double chi_squared(const Eigen::VectorXd& data, const std::vector<CouplingMeasurement>& ms,
                          double x, double y, const MembraneGeometry& geom) {
  return (data - model_vector(ms, x, y, geom)).squaredNorm();
}

struct LikelihoodMap {
  std::vector<double> grid_x;  // cell centres, m
  std::vector<double> grid_y;
  std::vector<double> chi2;    // row-major, y outer: index = iy * nx + ix
  std::vector<double> log_likelihood;
  std::vector<double> likelihood;
  double sigma2 = 0.0;
  double x0 = 0.0, y0 = 0.0;   // arg-min chi^2 on the grid
  std::size_t best_index = 0;
  std::optional<std::pair<double, double>> refined;  // off-grid refinement, if requested

  std::size_t nx() const noexcept { return grid_x.size(); }
  std::size_t ny() const noexcept { return grid_y.size(); }
};

struct LocalizeOptions {
  bool refine = false;  // golden-section descent around the best cell
  double sigma2_floor = 1e-300;
};

/// Grid search over the canonical quadrant [0, L_x/2] x [0, L_y/2].
inline LikelihoodMap localize(const std::vector<CouplingMeasurement>& ms, const MembraneGeometry& geom,
                              int grid_nx = 200, int grid_ny = 200, const LocalizeOptions& opt = {}) {
  if (ms.size() <= 2) throw InsufficientDataError("localize: need more than two modes");
  if (grid_nx < 2 || grid_ny < 2) throw DomainError("localize: grid must be at least 2x2");
  const Eigen::VectorXd data = data_vector(ms);

  LikelihoodMap map;
  const double hx = 0.5 * geom.L_x / grid_nx, hy = 0.5 * geom.L_y / grid_ny;
  for (int ix = 0; ix < grid_nx; ++ix) map.grid_x.push_back((ix + 0.5) * hx);
  for (int iy = 0; iy < grid_ny; ++iy) map.grid_y.push_back((iy + 0.5) * hy);

  map.chi2.reserve(static_cast<std::size_t>(grid_nx) * static_cast<std::size_t>(grid_ny));
  for (double y : map.grid_y)
    for (double x : map.grid_x) map.chi2.push_back(chi_squared(data, ms, x, y, geom));

  // Strict comparison keeps the lowest row-major index on ties.
  for (std::size_t n = 1; n < map.chi2.size(); ++n)
    if (map.chi2[n] < map.chi2[map.best_index]) map.best_index = n;
  map.x0 = map.grid_x[map.best_index % map.nx()];
  map.y0 = map.grid_y[map.best_index / map.nx()];

  const double dof = static_cast<double>(ms.size()) - 2.0;
  map.sigma2 = std::max(map.chi2[map.best_index] / dof, opt.sigma2_floor);
  const double log_norm = -std::log(kTwoPi * map.sigma2);
  for (double c : map.chi2) {
    map.log_likelihood.push_back(log_norm - c / (2.0 * map.sigma2));
    map.likelihood.push_back(std::exp(map.log_likelihood.back()));
  }

  if (opt.refine) {
    double x = map.x0, y = map.y0;
    for (int sweep = 0; sweep < 3; ++sweep) {
      x = boost::math::tools::brent_find_minima(
              [&](double t) { return chi_squared(data, ms, t, y, geom); },
              std::max(0.0, x - hx), std::min(0.5 * geom.L_x, x + hx), 40)
              .first;
      y = boost::math::tools::brent_find_minima(
              [&](double t) { return chi_squared(data, ms, x, t, geom); },
              std::max(0.0, y - hy), std::min(0.5 * geom.L_y, y + hy), 40)
              .first;
    }
    map.refined = std::pair{x, y};
  }
  return map;
}

/// Mode list (i, j) for i, j = 1..n_max.
inline std::vector<std::pair<int, int>> mode_grid(int n_max) {
  std::vector<std::pair<int, int>> out;
  for (int i = 1; i <= n_max; ++i)
    for (int j = 1; j <= n_max; ++j) out.emplace_back(i, j);
  return out;
}

/// Forward model g_ij = B |eta_ij(x, y)| / sqrt(Omega_ij), with optional multiplicative noise.
template <class Rng>
std::vector<CouplingMeasurement> synthetic_couplings(const std::vector<std::pair<int, int>>& modes,
                                                     const MembraneGeometry& geom, double x, double y,
                                                     double scale, double relative_noise, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<CouplingMeasurement> out;
  for (const auto& [i, j] : modes) {
    const double omega = mode_frequency(i, j, geom);
    double g = scale * std::abs(overlap_factor(i, j, x, y, geom)) / std::sqrt(omega);
    if (relative_noise > 0.0) g = std::abs(g * (1.0 + relative_noise * normal(rng)));
    out.push_back({i, j, g, omega});
  }
  return out;
}

inline std::vector<CouplingMeasurement> synthetic_couplings(const std::vector<std::pair<int, int>>& modes,
                                                            const MembraneGeometry& geom, double x,
                                                            double y, double scale = 1.0) {
  std::mt19937_64 unused(0);
  return synthetic_couplings(modes, geom, x, y, scale, 0.0, unused);
}

}  // namespace optomech
