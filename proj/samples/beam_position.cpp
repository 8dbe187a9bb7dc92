// Recovers a beam position from 36 noisy synthetic mode couplings.

#include <cstdio>
#include <random>

#include "optomech/localization.hpp"

int main() {
  using namespace optomech;
  MembraneGeometry geom;
  const double x = 0.31 * geom.L_x, y = 0.17 * geom.L_y;

  std::mt19937_64 rng(7);
  const auto data = synthetic_couplings(mode_grid(6), geom, x, y, 1.0, 0.05, rng);
  LocalizeOptions opt;
  opt.refine = true;
  const LikelihoodMap map = localize(data, geom, 200, 200, opt);

  std::printf("true      (%.2f, %.2f) um\n", x * 1e6, y * 1e6);
  std::printf("grid      (%.2f, %.2f) um, sigma^2 = %.3g\n", map.x0 * 1e6, map.y0 * 1e6, map.sigma2);
  std::printf("refined   (%.2f, %.2f) um\n", map.refined->first * 1e6, map.refined->second * 1e6);
}
