#pragma once

// Propagation constants of the two polarization axes of a birefringent fibre,
// modelled as Taylor polynomials of beta(omega) about a shared reference frequency.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "fwm/error.hpp"
#include "fwm/units.hpp"

namespace fwm {

enum class Axis { Slow, Fast };

inline constexpr std::array<Axis, 2> kAxes{Axis::Slow, Axis::Fast};

inline const char* axis_name(Axis axis) { return axis == Axis::Slow ? "slow" : "fast"; }
inline char axis_letter(Axis axis) { return axis == Axis::Slow ? 's' : 'f'; }

/// Taylor coefficients beta[k] = d^k beta / d omega^k at omega0 (units s^k/m),
/// trusted for |omega - omega0| <= validity_fraction * omega0.
struct AxisDispersion {
  double omega0 = 0.0;
  std::vector<double> beta;
  double validity_fraction = 0.25;

  static constexpr std::size_t kMinOrder = 4;
  static constexpr std::size_t kMaxOrder = 6;

  std::size_t order() const { return beta.empty() ? 0 : beta.size() - 1; }
  double omega_min() const { return omega0 * (1.0 - validity_fraction); }
  double omega_max() const { return omega0 * (1.0 + validity_fraction); }
  bool in_window(double omega) const { return omega >= omega_min() && omega <= omega_max(); }

  void validate() const {
    if (!(omega0 > 0.0) || !std::isfinite(omega0))
      throw InvalidArgument("dispersion: omega0 must be positive and finite");
    if (order() < kMinOrder || order() > kMaxOrder)
      throw InvalidArgument("dispersion: polynomial order must be in [4, 6], got " +
                            std::to_string(order()));
    for (double b : beta)
      if (!std::isfinite(b)) throw InvalidArgument("dispersion: non-finite coefficient");
    if (!(validity_fraction > 0.0 && validity_fraction < 1.0))
      throw InvalidArgument("dispersion: validity fraction must be in (0, 1)");
  }

  /// n-th derivative of the polynomial at omega (n = 0 is beta itself).
  double derivative(double omega, std::size_t n) const {
    if (n > order()) return 0.0;
    const double x = omega - omega0;
    // Horner on sum_{k>=n} beta_k x^(k-n)/(k-n)!
    double acc = 0.0;
    for (std::size_t k = order(); k + 1 > n; --k) {
      acc = acc * x / static_cast<double>(k - n + 1) + beta[k];
      if (k == n) break;
    }
    return acc;
  }
};

/// The device under simulation. Temperature enters through `temperature_offset`
/// (kelvin above `reference_temperature`) and shifts the fast-axis index by
/// dn_dT * temperature_offset, uniformly in wavelength.
struct FiberSpec {
  AxisDispersion slow;
  AxisDispersion fast;
  double length = 0.4;               // m
  double gamma = 0.08;               // 1/(W m)
  double dn_dT = 0.0;                // 1/K, inter-axis index splitting
  double reference_temperature = 20.0;  // deg C
  double temperature_offset = 0.0;   // K

  const AxisDispersion& axis(Axis a) const { return a == Axis::Slow ? slow : fast; }
  AxisDispersion& axis(Axis a) { return a == Axis::Slow ? slow : fast; }

  double omega0() const { return slow.omega0; }
  double omega_min() const { return slow.omega_min(); }
  double omega_max() const { return slow.omega_max(); }
  double temperature() const { return reference_temperature + temperature_offset; }

  /// Extra fast-axis index from temperature; zero on the slow axis.
  double thermal_index_shift(Axis a) const {
    return a == Axis::Fast ? dn_dT * temperature_offset : 0.0;
  }

  void validate() const {
    slow.validate();
    fast.validate();
    if (slow.omega0 != fast.omega0)
      throw InvalidArgument("fiber: both axes must share the same reference frequency");
    if (slow.validity_fraction != fast.validity_fraction)
      throw InvalidArgument("fiber: both axes must share the same validity window");
    if (!(length > 0.0) || !std::isfinite(length))
      throw InvalidArgument("fiber: length must be > 0");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
      throw InvalidArgument("fiber: gamma must be >= 0");
    if (!std::isfinite(dn_dT)) throw InvalidArgument("fiber: dn_dT must be finite");
  }
};

/// Which axis carries the pump and which carries both daughter photons.
struct ProcessConfig {
  Axis pump = Axis::Slow;
  Axis daughter = Axis::Fast;

  bool cross_polarized() const { return pump != daughter; }

  /// "ss->ff" style label: pump photons' axes, then daughters'.
  std::string label() const {
    const char p = axis_letter(pump), d = axis_letter(daughter);
    return std::string{p, p} + "->" + std::string{d, d};
  }
  /// File-name friendly form of label(), e.g. "ss_ff".
  std::string token() const {
    const char p = axis_letter(pump), d = axis_letter(daughter);
    return std::string{p, p} + "_" + std::string{d, d};
  }

  friend bool operator==(const ProcessConfig&, const ProcessConfig&) = default;
};

inline std::optional<ProcessConfig> parse_process(const std::string& text) {
  for (Axis p : kAxes)
    for (Axis d : kAxes) {
      ProcessConfig pc{p, d};
      if (text == pc.label() || text == pc.token()) return pc;
    }
  return std::nullopt;
}

namespace detail {

inline std::string window_message(const FiberSpec& fiber, double omega) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "angular frequency %.6g rad/s (%.6g nm) outside validity window "
                "[%.6g, %.6g] rad/s ([%.6g, %.6g] nm)",
                omega, wavelength_from_omega(omega) / kNanometre, fiber.omega_min(),
                fiber.omega_max(), wavelength_from_omega(fiber.omega_max()) / kNanometre,
                wavelength_from_omega(fiber.omega_min()) / kNanometre);
  return buf;
}

}  // namespace detail

inline void require_in_window(const FiberSpec& fiber, double omega) {
  if (!(omega >= fiber.omega_min() && omega <= fiber.omega_max()))
    throw DomainError(detail::window_message(fiber, omega));
}

/// beta(omega) in rad/m.
inline double beta(const FiberSpec& fiber, Axis axis, double omega) {
  require_in_window(fiber, omega);
  return fiber.axis(axis).derivative(omega, 0) +
         fiber.thermal_index_shift(axis) * omega / kSpeedOfLight;
}

/// d^n beta / d omega^n; n = 1 is the inverse group velocity.
inline double beta_derivative(const FiberSpec& fiber, Axis axis, double omega, std::size_t n) {
  require_in_window(fiber, omega);
  double d = fiber.axis(axis).derivative(omega, n);
  if (n == 0) d += fiber.thermal_index_shift(axis) * omega / kSpeedOfLight;
  if (n == 1) d += fiber.thermal_index_shift(axis) / kSpeedOfLight;
  return d;
}

/// Group index n_g = c dbeta/domega.
inline double group_index(const FiberSpec& fiber, Axis axis, double omega) {
  return kSpeedOfLight * beta_derivative(fiber, axis, omega, 1);
}

/// Effective phase index beta c / omega.
inline double phase_index(const FiberSpec& fiber, Axis axis, double omega) {
  return beta(fiber, axis, omega) * kSpeedOfLight / omega;
}

/// Every zero of beta2 inside the validity window, as wavelengths sorted ascending.
inline std::vector<double> zero_dispersion_wavelengths(const FiberSpec& fiber, Axis axis) {
  const AxisDispersion& ad = fiber.axis(axis);
  constexpr int kSamples = 4000;
  const double lo = fiber.omega_min(), hi = fiber.omega_max();
  auto b2 = [&](double w) { return ad.derivative(w, 2); };

  std::vector<double> roots;
  double w_prev = lo, f_prev = b2(lo);
  for (int i = 1; i <= kSamples; ++i) {
    const double w = lo + (hi - lo) * i / kSamples;
    const double f = b2(w);
    if (f_prev == 0.0) {
      roots.push_back(w_prev);
    } else if (f_prev * f < 0.0) {
      double a = w_prev, b = w, fa = f_prev;
      for (int it = 0; it < 200 && (b - a) > 1e-13 * b; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = b2(m);
        if (fm == 0.0) { a = b = m; break; }
        if ((fa < 0.0) == (fm < 0.0)) { a = m; fa = fm; } else { b = m; }
      }
      roots.push_back(0.5 * (a + b));
    }
    w_prev = w;
    f_prev = f;
  }
  std::vector<double> wavelengths;
  for (double w : roots) wavelengths.push_back(wavelength_from_omega(w));
  std::sort(wavelengths.begin(), wavelengths.end());
  return wavelengths;
}

/// The zero-dispersion wavelength nearest the reference frequency.
inline double zero_dispersion_wavelength(const FiberSpec& fiber, Axis axis) {
  const auto roots = zero_dispersion_wavelengths(fiber, axis);
  if (roots.empty())
    throw NumericError(std::string("no ZDW in window on the ") + axis_name(axis) + " axis");
  const double lambda0 = wavelength_from_omega(fiber.omega0());
  return *std::min_element(roots.begin(), roots.end(), [&](double a, double b) {
    return std::abs(a - lambda0) < std::abs(b - lambda0);
  });
}

inline constexpr double kMaxTemperatureStep = 100.0;  // K

/// Copy of `fiber` held `delta_t` kelvin warmer.
inline FiberSpec apply_temperature(const FiberSpec& fiber, double delta_t) {
  if (!(std::abs(delta_t) <= kMaxTemperatureStep))
    throw InvalidArgument("apply_temperature: |dT| must be <= 100 K");
  FiberSpec out = fiber;
  out.temperature_offset += delta_t;
  return out;
}

}  // namespace fwm
