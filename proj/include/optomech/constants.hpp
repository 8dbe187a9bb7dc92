#pragma once

#include <numbers>

namespace optomech {

inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J / K
inline constexpr double kSpeedOfLight = 299792458.0;  // m / s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Hz -> rad/s.
constexpr double to_angular(double hz) noexcept { return kTwoPi * hz; }
/// rad/s -> Hz.
constexpr double to_hz(double angular) noexcept { return angular / kTwoPi; }

inline constexpr const char* kToolName = "optomech";
inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace optomech
