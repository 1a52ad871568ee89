#pragma once

#include <vector>

#include "fwm/dispersion.hpp"
#include "fwm/units.hpp"

namespace support {

inline double omega_nm(double nm) { return fwm::omega_from_wavelength(nm * fwm::kNanometre); }

/// Fibre with identical axes given by `beta` about 705 nm.
inline fwm::FiberSpec uniform_fiber(std::vector<double> beta, double length = 0.4,
                                    double gamma = 0.0) {
  fwm::FiberSpec f;
  f.slow.omega0 = f.fast.omega0 = omega_nm(705);
  f.slow.beta = beta;
  f.fast.beta = beta;
  f.length = length;
  f.gamma = gamma;
  return f;
}

/// beta0 for phase index n at 705 nm and beta1 for group index ng.
inline std::vector<double> simple_beta(double n, double ng, double beta2, double beta3 = 0.0,
                                       double beta4 = 0.0) {
  return {n * omega_nm(705) / fwm::kSpeedOfLight, ng / fwm::kSpeedOfLight, beta2, beta3, beta4};
}

}  // namespace support
