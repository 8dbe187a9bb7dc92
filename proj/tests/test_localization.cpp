#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "optomech/localization.hpp"

using namespace optomech;

namespace {

const MembraneGeometry kGeom{};

double cell_x(int ix, int nx) { return (ix + 0.5) * 0.5 * kGeom.L_x / nx; }
double cell_y(int iy, int ny) { return (iy + 0.5) * 0.5 * kGeom.L_y / ny; }

}  // namespace

TEST(Overlap, EnvelopeAndShape) {
  const double x = 0.2 * kGeom.L_x, y = 0.35 * kGeom.L_y;
  const double expect = beam_envelope(2, 3, kGeom) * std::sin(2 * kPi * 0.2) * std::sin(3 * kPi * 0.35);
  EXPECT_NEAR(overlap_factor(2, 3, x, y, kGeom), expect, 1e-15);
  EXPECT_NEAR(overlap_factor(1, 1, kGeom.L_x / 2, kGeom.L_y / 2, kGeom), 0.9874, 1e-4);
  EXPECT_NEAR(overlap_factor(2, 1, kGeom.L_x / 2, kGeom.L_y / 3, kGeom), 0.0, 1e-15);
  EXPECT_THROW(overlap_factor(1, 1, -1e-6, 0.0, kGeom), DomainError);
}

TEST(Localize, NoiselessRoundTripHitsTheGeneratingNode) {
  const int n = 60;
  for (auto [ix, iy] : {std::pair{7, 41}, std::pair{33, 12}, std::pair{52, 50}}) {
    const double x = cell_x(ix, n), y = cell_y(iy, n);
    const auto data = synthetic_couplings(mode_grid(6), kGeom, x, y, 3.7);
    const auto map = localize(data, kGeom, n, n);
    EXPECT_EQ(map.best_index, static_cast<std::size_t>(iy * n + ix));
    EXPECT_NEAR(map.chi2[map.best_index], 0.0, 1e-20);
    EXPECT_DOUBLE_EQ(map.x0, x);
    EXPECT_DOUBLE_EQ(map.y0, y);
    EXPECT_LT(map.sigma2, 1e-25);
  }
}

TEST(Localize, CommonScaleCancels) {
  const auto a = synthetic_couplings(mode_grid(4), kGeom, 100e-6, 60e-6, 1.0);
  auto b = a;
  for (auto& m : b) m.g_meas *= 1234.5;
  const auto ma = localize(a, kGeom, 40, 40), mb = localize(b, kGeom, 40, 40);
  for (std::size_t n = 0; n < ma.chi2.size(); ++n) EXPECT_NEAR(ma.chi2[n], mb.chi2[n], 1e-12);
}

TEST(Localize, ArgminIsFirstMinimalCell) {
  std::mt19937_64 rng(11);
  const auto data = synthetic_couplings(mode_grid(6), kGeom, 90e-6, 120e-6, 1.0, 0.05, rng);
  const auto map = localize(data, kGeom, 50, 50);
  const auto it = std::min_element(map.chi2.begin(), map.chi2.end());
  EXPECT_EQ(map.best_index, static_cast<std::size_t>(it - map.chi2.begin()));
  EXPECT_EQ(map.chi2.size(), 2500u);
  EXPECT_EQ(map.likelihood.size(), 2500u);
}

TEST(Localize, LikelihoodNormalisation) {
  std::mt19937_64 rng(5);
  const auto data = synthetic_couplings(mode_grid(6), kGeom, 150e-6, 40e-6, 1.0, 0.05, rng);
  const auto map = localize(data, kGeom, 50, 50);
  EXPECT_NEAR(map.sigma2, map.chi2[map.best_index] / (data.size() - 2.0), 1e-15);
  const double n = map.log_likelihood[map.best_index];
  EXPECT_NEAR(n, -std::log(kTwoPi * map.sigma2) - 0.5 * (data.size() - 2.0), 1e-9);
  EXPECT_NEAR(map.likelihood[10], std::exp(map.log_likelihood[10]), 1e-12 * std::exp(n));
}

TEST(Localize, NoisyDataLandsNearTruth) {
  const int n = 100;
  const double hx = 0.5 * kGeom.L_x / n, hy = 0.5 * kGeom.L_y / n;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    const double x = 0.31 * kGeom.L_x, y = 0.12 * kGeom.L_y;
    const auto data = synthetic_couplings(mode_grid(6), kGeom, x, y, 1.0, 0.05, rng);
    const auto map = localize(data, kGeom, n, n);
    EXPECT_LE(std::abs(map.x0 - x), 2.0 * hx) << seed;
    EXPECT_LE(std::abs(map.y0 - y), 2.0 * hy) << seed;
  }
}

TEST(Localize, RefinementImprovesOnTheGrid) {
  const double x = 101.3e-6, y = 77.7e-6;
  const auto data = synthetic_couplings(mode_grid(6), kGeom, x, y, 1.0);
  LocalizeOptions opt;
  opt.refine = true;
  const auto map = localize(data, kGeom, 40, 40, opt);
  ASSERT_TRUE(map.refined.has_value());
  EXPECT_LT(std::hypot(map.refined->first - x, map.refined->second - y), std::hypot(map.x0 - x, map.y0 - y));
}

TEST(Localize, InputValidation) {
  const auto two = synthetic_couplings({{1, 1}, {2, 1}}, kGeom, 100e-6, 100e-6);
  EXPECT_THROW(localize(two, kGeom), InsufficientDataError);
  auto dup = synthetic_couplings({{1, 1}, {2, 1}, {1, 2}}, kGeom, 100e-6, 100e-6);
  dup.push_back(dup.front());
  EXPECT_THROW(localize(dup, kGeom), DegenerateDataError);
  auto zeros = synthetic_couplings(mode_grid(2), kGeom, 100e-6, 100e-6);
  for (auto& m : zeros) m.g_meas = 0.0;
  EXPECT_THROW(localize(zeros, kGeom), DegenerateDataError);
  EXPECT_THROW(data_vector({}), InsufficientDataError);
}
