#pragma once

#include <cmath>
#include <numbers>

namespace fwm {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kNanometre = 1e-9;
inline constexpr double kPicometre = 1e-12;
inline constexpr double kPicosecond = 1e-12;

inline double omega_from_wavelength(double wavelength) {
  return kTwoPi * kSpeedOfLight / wavelength;
}

inline double wavelength_from_omega(double omega) {
  return kTwoPi * kSpeedOfLight / omega;
}

/// Angular-frequency width of a narrow band of wavelength width `dl` centred on `wavelength`.
inline double omega_width(double dl, double wavelength) {
  return kTwoPi * kSpeedOfLight * dl / (wavelength * wavelength);
}

inline double wavelength_width(double d_omega, double wavelength) {
  return wavelength * wavelength * d_omega / (kTwoPi * kSpeedOfLight);
}

}  // namespace fwm
