#pragma once

// Least-squares fit of a two-axis dispersion polynomial to observable targets.

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "fwm/dispersion.hpp"
#include "fwm/error.hpp"
#include "fwm/jsa.hpp"
#include "fwm/phasematch.hpp"
#include "fwm/units.hpp"

namespace fwm {

struct DeltaKSample {
  double omega_s = 0.0;
  double omega_i = 0.0;
  double delta_k = 0.0;  // rad/m
};

/// Everything optional is simply left out of the fit and of the verification.
struct CalibrationTargets {
  double reference_wavelength = 705 * kNanometre;  // sets omega0
  double nominal_index = 1.45;                     // slow-axis phase index at omega0
  ProcessConfig process{Axis::Slow, Axis::Fast};
  PumpSpec pump;
  double length = 0.4;
  double gamma = 0.08;

  std::optional<double> signal_wavelength;  // phase matched at pump.wavelength
  std::optional<double> idler_wavelength;   // checked only
  bool group_velocity_match = false;        // pump axis at pump, daughter axis at idler
  std::optional<double> signal_fwhm;        // m
  std::optional<double> idler_fwhm;         // m
  std::optional<double> zdw_slow;           // m
  std::optional<double> zdw_fast;           // m
  std::vector<DeltaKSample> delta_k_samples;
  std::optional<double> thermal_shift;      // signal shift per kelvin, m/K

  // Acceptance tolerances of the verification step.
  double signal_tolerance = 2 * kNanometre;
  double idler_tolerance = 3 * kNanometre;
  double slope_tolerance = kHorizontalSlope;
  double group_index_tolerance = 1e-3;  // relative
  double bandwidth_tolerance = 0.3;     // relative
  double zdw_tolerance = 20 * kNanometre;
  double delta_k_tolerance = 1e-2;      // rad/m
  double thermal_tolerance = 0.1;       // relative

  // Fit weights (residuals are divided by these scales, then multiplied by the weights).
  double idler_fwhm_weight = 1e-3;
  double prior_weight = 1e-2;
  int max_evaluations = 2000;
};

/// Targets reconstructed from the 597/860 nm source: GVM at 705 nm, ZDWs at 800 nm,
/// 0.13 nm / 2 nm marginals at 0.4 m, 11 pm/K tuning.
inline CalibrationTargets paper_targets() {
  CalibrationTargets t;
  t.signal_wavelength = 597 * kNanometre;
  t.idler_wavelength = 860 * kNanometre;
  t.group_velocity_match = true;
  t.signal_fwhm = 0.13 * kNanometre;
  t.idler_fwhm = 2.0 * kNanometre;
  t.zdw_slow = 800 * kNanometre;
  t.zdw_fast = 800 * kNanometre;
  t.thermal_shift = 11 * kPicometre;
  return t;
}

inline constexpr std::size_t kCalibrationOrder = 4;
inline constexpr double kCalibrationFrequencyScale = 1e14;  // rad/s
inline constexpr double kCalibrationPhaseScale = 1e4;       // rad/m

/// Parameter layout: [fast beta0 offset, slow y1..y4, fast y1..y4] with
/// y_k = beta_k Omega^k / k! / phase_scale, Omega = kCalibrationFrequencyScale.
inline FiberSpec fiber_from_parameters(const CalibrationTargets& t, const Eigen::VectorXd& x) {
  FiberSpec f;
  const double w0 = omega_from_wavelength(t.reference_wavelength);
  const double b0 = t.nominal_index * w0 / kSpeedOfLight;
  f.slow.omega0 = f.fast.omega0 = w0;
  f.slow.beta.assign(kCalibrationOrder + 1, 0.0);
  f.fast.beta.assign(kCalibrationOrder + 1, 0.0);
  f.slow.beta[0] = b0;
  f.fast.beta[0] = b0 + x(0) * kCalibrationPhaseScale;
  double factorial = 1.0, power = 1.0;
  for (std::size_t k = 1; k <= kCalibrationOrder; ++k) {
    factorial *= static_cast<double>(k);
    power *= kCalibrationFrequencyScale;
    const double unit = kCalibrationPhaseScale * factorial / power;
    f.slow.beta[k] = x(static_cast<Eigen::Index>(k)) * unit;
    f.fast.beta[k] = x(static_cast<Eigen::Index>(kCalibrationOrder + k)) * unit;
  }
  f.length = t.length;
  f.gamma = t.gamma;
  return f;
}

/// Deterministic start: n_g = 1.47, beta2 = 3e-26 s^2/m, beta3 = 1e-40 s^3/m on both
/// axes, fast axis phase index 4e-4 below the slow one.
inline Eigen::VectorXd seed_parameters(const CalibrationTargets& t) {
  const double w0 = omega_from_wavelength(t.reference_wavelength);
  const std::array<double, kCalibrationOrder> beta{1.47 / kSpeedOfLight, 3e-26, 1e-40, 0.0};
  Eigen::VectorXd x(1 + 2 * kCalibrationOrder);
  x(0) = -4e-4 * w0 / kSpeedOfLight / kCalibrationPhaseScale;
  double factorial = 1.0, power = 1.0;
  for (std::size_t k = 1; k <= kCalibrationOrder; ++k) {
    factorial *= static_cast<double>(k);
    power *= kCalibrationFrequencyScale;
    const double y = beta[k - 1] * power / factorial / kCalibrationPhaseScale;
    x(static_cast<Eigen::Index>(k)) = y;
    x(static_cast<Eigen::Index>(kCalibrationOrder + k)) = y;
  }
  return x;
}

inline FiberSpec seed_fiber(const CalibrationTargets& t) {
  return fiber_from_parameters(t, seed_parameters(t));
}

namespace detail {

inline PhaseMatchPoint target_point(const CalibrationTargets& t) {
  PhaseMatchPoint pt;
  pt.pump_wavelength = t.pump.wavelength;
  pt.signal_wavelength = *t.signal_wavelength;
  pt.idler_wavelength =
      wavelength_from_omega(2.0 * t.pump.omega() - omega_from_wavelength(*t.signal_wavelength));
  pt.process = t.process;
  return pt;
}

struct CalibrationFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const CalibrationTargets& t;
  Eigen::VectorXd seed;

  int inputs() const { return static_cast<int>(seed.size()); }
  int values() const {
    int n = static_cast<int>(seed.size());
    if (t.signal_wavelength) n += 1;
    if (t.group_velocity_match) n += 1;
    if (t.signal_fwhm && t.signal_wavelength) n += 1;
    if (t.idler_fwhm && t.signal_wavelength) n += 1;
    if (t.zdw_slow) n += 1;
    if (t.zdw_fast) n += 1;
    return n + static_cast<int>(t.delta_k_samples.size());
  }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    const FiberSpec f = fiber_from_parameters(t, x);
    const double power = t.pump.peak_power;
    Eigen::Index i = 0;
    if (t.signal_wavelength) {
      const auto pt = target_point(t);
      r(i++) = delta_k(f, t.process, pt.signal_omega(), pt.idler_omega(), power);  // per rad/m
      const double wp = t.pump.omega();
      if (t.group_velocity_match)
        r(i++) = (group_index(f, t.process.pump, wp) -
                  group_index(f, t.process.daughter, pt.idler_omega())) / 1e-5;
      const auto est = estimate_marginals(f, t.process, t.pump, pt);
      if (t.signal_fwhm)
        r(i++) = (wavelength_width(est.signal_fwhm, pt.signal_wavelength) - *t.signal_fwhm) /
                 (1e-3 * *t.signal_fwhm);
      if (t.idler_fwhm)
        r(i++) = t.idler_fwhm_weight *
                 (wavelength_width(est.idler_fwhm, pt.idler_wavelength) - *t.idler_fwhm) /
                 (1e-3 * *t.idler_fwhm);
    } else if (t.group_velocity_match) {
      r(i++) = 0.0;
    }
    if (t.zdw_slow)
      r(i++) = f.slow.derivative(omega_from_wavelength(*t.zdw_slow), 2) / 1e-29;
    if (t.zdw_fast)
      r(i++) = f.fast.derivative(omega_from_wavelength(*t.zdw_fast), 2) / 1e-29;
    for (const auto& s : t.delta_k_samples)
      r(i++) = (delta_k(f, t.process, s.omega_s, s.omega_i, power) - s.delta_k) / 1e-4;
    for (Eigen::Index k = 0; k < seed.size(); ++k) r(i++) = t.prior_weight * (x(k) - seed(k));
    return 0;
  }
};

/// Signal-wavelength shift at the pump wavelength for a temperature step.
inline double signal_shift(const FiberSpec& fiber, const CalibrationTargets& t, double delta_t) {
  const double power = t.pump.peak_power;
  const auto cold = solve_signal_idler(fiber, t.process, t.pump.wavelength, power);
  const auto hot =
      solve_signal_idler(apply_temperature(fiber, delta_t), t.process, t.pump.wavelength, power);
  if (!cold || !hot) throw NumericError("calibration: phase matching lost under temperature step");
  return hot->signal_wavelength - cold->signal_wavelength;
}

inline TargetResidual check(std::string name, double value, double target, double tolerance) {
  return {std::move(name), value, target, tolerance, std::abs(value - target) <= tolerance};
}

}  // namespace detail

/// Residual report of a fibre against the targets that are set.
inline std::vector<TargetResidual> evaluate_targets(const FiberSpec& f,
                                                    const CalibrationTargets& t) {
  std::vector<TargetResidual> out;
  const double power = t.pump.peak_power;
  const double wp = t.pump.omega();
  std::optional<PhaseMatchPoint> pt;
  if (t.signal_wavelength || t.idler_wavelength || t.signal_fwhm || t.idler_fwhm) {
    pt = solve_signal_idler(f, t.process, t.pump.wavelength, power);
    if (!pt) {
      out.push_back({"phase matching at pump", 0.0, 1.0, 0.0, false});
      return out;
    }
  }
  if (t.signal_wavelength)
    out.push_back(detail::check("signal wavelength [nm]", pt->signal_wavelength / kNanometre,
                                *t.signal_wavelength / kNanometre,
                                t.signal_tolerance / kNanometre));
  if (t.idler_wavelength)
    out.push_back(detail::check("idler wavelength [nm]", pt->idler_wavelength / kNanometre,
                                *t.idler_wavelength / kNanometre, t.idler_tolerance / kNanometre));
  if (t.group_velocity_match) {
    const auto slope = signal_slope(f, t.process, t.pump.wavelength, power);
    out.push_back(detail::check("|d lambda_s / d lambda_p|", slope ? std::abs(*slope) : 1e9, 0.0,
                                t.slope_tolerance));
    if (pt) {
      const double np = group_index(f, t.process.pump, wp);
      const double ni = group_index(f, t.process.daughter, pt->idler_omega());
      out.push_back(detail::check("group index mismatch (relative)", std::abs(np - ni) / np, 0.0,
                                  t.group_index_tolerance));
    }
  }
  if (pt && (t.signal_fwhm || t.idler_fwhm)) {
    const auto est = estimate_marginals(f, t.process, t.pump, *pt);
    if (t.signal_fwhm)
      out.push_back(detail::check("signal FWHM estimate [nm]",
                                  wavelength_width(est.signal_fwhm, pt->signal_wavelength) / kNanometre,
                                  *t.signal_fwhm / kNanometre,
                                  t.bandwidth_tolerance * *t.signal_fwhm / kNanometre));
    if (t.idler_fwhm)
      out.push_back(detail::check("idler FWHM estimate [nm]",
                                  wavelength_width(est.idler_fwhm, pt->idler_wavelength) / kNanometre,
                                  *t.idler_fwhm / kNanometre,
                                  t.bandwidth_tolerance * *t.idler_fwhm / kNanometre));
  }
  auto zdw = [&](Axis axis, double target) {
    const std::string name = std::string("ZDW ") + axis_name(axis) + " [nm]";
    const auto roots = zero_dispersion_wavelengths(f, axis);
    if (roots.empty()) {
      out.push_back({name, 0.0, target / kNanometre, t.zdw_tolerance / kNanometre, false});
      return;
    }
    double best = roots.front();
    for (double r : roots)
      if (std::abs(r - target) < std::abs(best - target)) best = r;
    out.push_back(detail::check(name, best / kNanometre, target / kNanometre,
                                t.zdw_tolerance / kNanometre));
  };
  if (t.zdw_slow) zdw(Axis::Slow, *t.zdw_slow);
  if (t.zdw_fast) zdw(Axis::Fast, *t.zdw_fast);
  if (!t.delta_k_samples.empty()) {
    double worst = 0.0;
    for (const auto& s : t.delta_k_samples)
      worst = std::max(worst, std::abs(delta_k(f, t.process, s.omega_s, s.omega_i, power) - s.delta_k));
    out.push_back(detail::check("max |delta k error| [rad/m]", worst, 0.0, t.delta_k_tolerance));
  }
  if (t.thermal_shift) {
    const double per_kelvin = detail::signal_shift(f, t, 10.0) / 10.0;
    out.push_back(detail::check("signal shift [pm/K]", per_kelvin / kPicometre,
                                *t.thermal_shift / kPicometre,
                                t.thermal_tolerance * std::abs(*t.thermal_shift) / kPicometre));
  }
  return out;
}

/// Fits the two axes' beta1..beta4 and the fast-axis beta0 offset, then sets dn_dT from the
/// thermal target (signal shift measured over a 10 K step). Throws CalibrationError when a
/// target misses its tolerance.
inline FiberSpec calibrate_preset(const CalibrationTargets& t) {
  t.pump.validate();
  if (!(t.length > 0.0)) throw InvalidArgument("calibration: length must be > 0");
  if (t.group_velocity_match && !t.signal_wavelength)
    throw InvalidArgument("calibration: group-velocity matching needs a signal wavelength target");
  const double w0 = omega_from_wavelength(t.reference_wavelength);
  auto in_window = [&](double omega) {
    return omega >= 0.75 * w0 && omega <= 1.25 * w0;
  };
  if (t.signal_wavelength) {
    const auto pt = detail::target_point(t);
    if (!in_window(pt.signal_omega()) || !in_window(pt.idler_omega()) || !in_window(t.pump.omega()))
      throw InvalidArgument("calibration: target wavelengths outside the validity window");
  }

  const Eigen::VectorXd seed = seed_parameters(t);
  detail::CalibrationFunctor functor{t, seed};
  Eigen::NumericalDiff<detail::CalibrationFunctor, Eigen::Central> numeric(functor);
  Eigen::LevenbergMarquardt<decltype(numeric)> lm(numeric);
  lm.parameters.maxfev = t.max_evaluations;
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-16;
  Eigen::VectorXd x = seed;
  lm.minimize(x);

  FiberSpec f = fiber_from_parameters(t, x);
  if (t.thermal_shift) {
    // The shift is close to linear in dn_dT; two secant steps from a fixed probe.
    double kappa = 1e-7;
    f.dn_dT = kappa;
    double shift = detail::signal_shift(f, t, 10.0) / 10.0;
    if (shift == 0.0) throw CalibrationError("calibration: temperature does not move the signal", {});
    double next = kappa * *t.thermal_shift / shift;
    for (int it = 0; it < 2; ++it) {
      f.dn_dT = next;
      const double s_next = detail::signal_shift(f, t, 10.0) / 10.0;
      if (s_next == shift) break;
      const double k_new = next + (*t.thermal_shift - s_next) * (next - kappa) / (s_next - shift);
      kappa = next;
      shift = s_next;
      next = k_new;
    }
    f.dn_dT = next;
  }

  auto report = evaluate_targets(f, t);
  for (const auto& r : report)
    if (!r.ok) throw CalibrationError("calibration missed target '" + r.name + "'", report);
  return f;
}

/// The calibrated stand-in for the 597/860 nm source fibre.
inline const FiberSpec& paper_fiber() {
  static const FiberSpec f = calibrate_preset(paper_targets());
  return f;
}

/// Delta-k samples of `generator` on an n x n grid of +-half_span around the
/// phase-matched pair at the pump wavelength.
inline CalibrationTargets targets_from_fiber(const FiberSpec& generator, const ProcessConfig& process,
                                             const PumpSpec& pump, double half_span,
                                             std::size_t n = 7) {
  CalibrationTargets t;
  t.reference_wavelength = wavelength_from_omega(generator.omega0());
  t.nominal_index = phase_index(generator, Axis::Slow, generator.omega0());
  t.process = process;
  t.pump = pump;
  t.length = generator.length;
  t.gamma = generator.gamma;
  const auto pt = solve_signal_idler(generator, process, pump.wavelength, pump.peak_power);
  if (!pt) throw NumericError("targets_from_fiber: generator does not phase match at the pump");
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double u = -1.0 + 2.0 * static_cast<double>(a) / static_cast<double>(n - 1);
      const double v = -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(n - 1);
      DeltaKSample s;
      s.omega_s = pt->signal_omega() + u * half_span;
      s.omega_i = pt->idler_omega() + v * half_span;
      s.delta_k = delta_k(generator, process, s.omega_s, s.omega_i, pump.peak_power);
      t.delta_k_samples.push_back(s);
    }
  return t;
}

}  // namespace fwm
