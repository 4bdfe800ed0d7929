#pragma once

#include <numbers>

namespace cavpump::constants {

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double boltzmann = 1.380649e-23;    // J/K

// 87Rb
inline constexpr double rb87_mass = 1.443e-25;                          // kg
inline constexpr double rb87_d2_frequency = 384.2304844685e12;          // Hz
inline constexpr double rb87_d2_omega = two_pi * rb87_d2_frequency;     // rad/s
inline constexpr double rb87_d2_linewidth = 6.065e6;                    // Hz (Gamma / 2 pi)

}  // namespace cavpump::constants
