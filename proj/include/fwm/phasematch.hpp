#pragma once

// Phase-matched signal/idler pairs for a given pump wavelength, solved on the
// energy-conserving manifold omega_s = omega_p + Omega, omega_i = omega_p - Omega.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fwm/dispersion.hpp"
#include "fwm/error.hpp"
#include "fwm/parallel.hpp"
#include "fwm/units.hpp"

namespace fwm {

struct PhaseMatchPoint {
  double pump_wavelength = 0.0;    // m
  double signal_wavelength = 0.0;  // m, the short-wavelength daughter
  double idler_wavelength = 0.0;   // m
  ProcessConfig process;
  double delta_k = 0.0;            // rad/m, residual at the root

  double pump_omega() const { return omega_from_wavelength(pump_wavelength); }
  double signal_omega() const { return omega_from_wavelength(signal_wavelength); }
  double idler_omega() const { return omega_from_wavelength(idler_wavelength); }
};

struct PhaseMatchCurve {
  ProcessConfig process;
  std::vector<PhaseMatchPoint> points;
};

/// 2 beta_pump(omega_p) - beta_d(omega_s) - beta_d(omega_i) - 2 gamma P,
/// with omega_p = (omega_s + omega_i) / 2.
inline double delta_k(const FiberSpec& fiber, const ProcessConfig& process, double omega_s,
                      double omega_i, double peak_power) {
  const double omega_p = 0.5 * (omega_s + omega_i);
  return 2.0 * beta(fiber, process.pump, omega_p) -
         (beta(fiber, process.daughter, omega_s) + beta(fiber, process.daughter, omega_i)) -
         2.0 * fiber.gamma * peak_power;
}

/// Smallest detuning considered a genuine sideband (2 pi x 1 THz).
inline constexpr double kMinDetuning = kTwoPi * 1e12;

namespace detail {

inline double mismatch_at_detuning(const FiberSpec& fiber, const ProcessConfig& process,
                                   double omega_p, double detuning, double peak_power) {
  return 2.0 * beta(fiber, process.pump, omega_p) -
         (beta(fiber, process.daughter, omega_p + detuning) +
          beta(fiber, process.daughter, omega_p - detuning)) -
         2.0 * fiber.gamma * peak_power;
}

inline PhaseMatchPoint make_point(const FiberSpec& fiber, const ProcessConfig& process,
                                  double pump_wavelength, double omega_p, double detuning,
                                  double peak_power) {
  PhaseMatchPoint pt;
  pt.pump_wavelength = pump_wavelength;
  pt.signal_wavelength = wavelength_from_omega(omega_p + detuning);
  pt.idler_wavelength = wavelength_from_omega(omega_p - detuning);
  pt.process = process;
  pt.delta_k = mismatch_at_detuning(fiber, process, omega_p, detuning, peak_power);
  return pt;
}

}  // namespace detail

/// All phase-matched pairs at this pump wavelength, ordered by increasing detuning.
inline std::vector<PhaseMatchPoint> all_roots(const FiberSpec& fiber,
                                              const ProcessConfig& process,
                                              double pump_wavelength, double peak_power) {
  const double omega_p = omega_from_wavelength(pump_wavelength);
  require_in_window(fiber, omega_p);
  const double max_detuning =
      std::min(omega_p - fiber.omega_min(), fiber.omega_max() - omega_p);
  std::vector<PhaseMatchPoint> roots;
  if (max_detuning <= kMinDetuning) return roots;

  auto f = [&](double d) {
    return detail::mismatch_at_detuning(fiber, process, omega_p, d, peak_power);
  };
  constexpr int kSamples = 4000;
  double d_prev = kMinDetuning, f_prev = f(d_prev);
  for (int i = 1; i <= kSamples; ++i) {
    const double d = kMinDetuning + (max_detuning - kMinDetuning) * i / kSamples;
    const double fd = f(d);
    if (f_prev == 0.0) {
      roots.push_back(detail::make_point(fiber, process, pump_wavelength, omega_p, d_prev,
                                         peak_power));
    } else if (f_prev * fd < 0.0) {
      double a = d_prev, b = d, fa = f_prev;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double fm = f(m);
        if (fm == 0.0) { a = b = m; break; }
        if ((fa < 0.0) == (fm < 0.0)) { a = m; fa = fm; } else { b = m; }
      }
      const double root = std::abs(f(a)) <= std::abs(f(b)) ? a : b;
      roots.push_back(
          detail::make_point(fiber, process, pump_wavelength, omega_p, root, peak_power));
    }
    d_prev = d;
    f_prev = fd;
  }
  return roots;
}

/// Lowest-detuning phase-matched pair, or nothing when the mismatch never changes sign.
inline std::optional<PhaseMatchPoint> solve_signal_idler(const FiberSpec& fiber,
                                                         const ProcessConfig& process,
                                                         double pump_wavelength,
                                                         double peak_power) {
  auto roots = all_roots(fiber, process, pump_wavelength, peak_power);
  if (roots.empty()) return std::nullopt;
  return roots.front();
}

inline PhaseMatchCurve scan_curve(const FiberSpec& fiber, const ProcessConfig& process,
                                  double lambda_min, double lambda_max, double step,
                                  double peak_power) {
  if (!(step > 0.0)) throw InvalidArgument("scan_curve: step must be > 0");
  if (!(lambda_min < lambda_max))
    throw InvalidArgument("scan_curve: pump range must be ascending");
  require_in_window(fiber, omega_from_wavelength(lambda_min));
  require_in_window(fiber, omega_from_wavelength(lambda_max));

  const auto n = static_cast<std::size_t>(std::floor((lambda_max - lambda_min) / step + 1e-9)) + 1;
  std::vector<std::optional<PhaseMatchPoint>> slots(n);
  parallel_for(n, [&](std::size_t k) {
    slots[k] = solve_signal_idler(fiber, process, lambda_min + step * static_cast<double>(k),
                                  peak_power);
  });

  PhaseMatchCurve curve{process, {}};
  for (auto& s : slots)
    if (s) curve.points.push_back(*s);
  if (curve.points.empty())
    throw NumericError("no phase matching in range for process " + process.label());
  return curve;
}

/// Centred-difference slope d lambda_s / d lambda_p of the phase-matching curve.
inline std::optional<double> signal_slope(const FiberSpec& fiber, const ProcessConfig& process,
                                          double pump_wavelength, double peak_power,
                                          double step = 0.05 * kNanometre) {
  const auto lo = solve_signal_idler(fiber, process, pump_wavelength - step, peak_power);
  const auto hi = solve_signal_idler(fiber, process, pump_wavelength + step, peak_power);
  if (!lo || !hi) return std::nullopt;
  return (hi->signal_wavelength - lo->signal_wavelength) / (2.0 * step);
}

inline constexpr double kHorizontalSlope = 0.05;

struct FactorablePoint {
  double pump_wavelength = 0.0;
  double slope = 0.0;  // d lambda_s / d lambda_p at pump_wavelength
  PhaseMatchPoint point;
};

/// Pump wavelength in [lambda_lo, lambda_hi] where the signal wavelength is stationary
/// (horizontal tangent). Coarse scan of |slope| then golden-section refinement.
inline FactorablePoint find_factorable_point(const FiberSpec& fiber,
                                             const ProcessConfig& process, double lambda_lo,
                                             double lambda_hi, double peak_power) {
  if (!(lambda_lo < lambda_hi))
    throw InvalidArgument("find_factorable_point: bracket must be ascending");
  require_in_window(fiber, omega_from_wavelength(lambda_lo));
  require_in_window(fiber, omega_from_wavelength(lambda_hi));

  auto cost = [&](double lp) {
    const auto s = signal_slope(fiber, process, lp, peak_power);
    return s ? std::abs(*s) : std::numeric_limits<double>::infinity();
  };

  const double coarse = 0.25 * kNanometre;
  const auto n = static_cast<std::size_t>(std::ceil((lambda_hi - lambda_lo) / coarse));
  std::vector<double> costs(n + 1);
  parallel_for(n + 1, [&](std::size_t k) {
    costs[k] = cost(std::min(lambda_hi, lambda_lo + coarse * static_cast<double>(k)));
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k <= n; ++k)
    if (costs[k] < costs[best]) best = k;
  if (!std::isfinite(costs[best]))
    throw NumericError("no factorable point: no phase matching in bracket for " +
                       process.label());

  const double centre = std::min(lambda_hi, lambda_lo + coarse * static_cast<double>(best));
  double a = std::max(lambda_lo, centre - coarse);
  double b = std::min(lambda_hi, centre + coarse);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = cost(c), fd = cost(d);
  while (b - a > 1e-5 * kNanometre) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - inv_phi * (b - a);
      fc = cost(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + inv_phi * (b - a);
      fd = cost(d);
    }
  }
  double lp = 0.5 * (a + b);
  double best_cost = cost(lp);
  if (costs[best] < best_cost) {
    lp = centre;
    best_cost = costs[best];
  }
  if (!(best_cost < kHorizontalSlope)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "no factorable point for %s: min |dls/dlp| = %.4g in bracket",
                  process.label().c_str(), best_cost);
    throw NumericError(buf);
  }
  FactorablePoint fp;
  fp.pump_wavelength = lp;
  fp.slope = *signal_slope(fiber, process, lp, peak_power);
  fp.point = *solve_signal_idler(fiber, process, lp, peak_power);
  return fp;
}

}  // namespace fwm
