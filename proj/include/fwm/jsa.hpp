#pragma once

// Joint spectral amplitude F(omega_s, omega_i) = phi * alpha on a uniform grid:
// phi is the phase-matching function sinc(dk L / 2), alpha the two-photon pump envelope.

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fwm/dispersion.hpp"
#include "fwm/error.hpp"
#include "fwm/parallel.hpp"
#include "fwm/phasematch.hpp"
#include "fwm/units.hpp"

namespace fwm {

struct PumpSpec {
  double wavelength = 705 * kNanometre;
  double fwhm = 0.9 * kNanometre;  // intensity spectrum FWHM
  double peak_power = 100.0;       // W
  double repetition_rate = 80e6;   // Hz

  double omega() const { return omega_from_wavelength(wavelength); }
  double omega_fwhm() const { return omega_width(fwhm, wavelength); }

  void validate() const {
    if (!(wavelength > 0.0)) throw InvalidArgument("pump: wavelength must be > 0");
    if (!(fwhm > 0.0)) throw InvalidArgument("pump: fwhm must be > 0");
    if (!(fwhm < 0.05 * wavelength))
      throw InvalidArgument("pump: fwhm must be below 5% of the wavelength");
    if (!(peak_power >= 0.0)) throw InvalidArgument("pump: peak power must be >= 0");
    if (!(repetition_rate > 0.0)) throw InvalidArgument("pump: repetition rate must be > 0");
  }
};

/// rms width of the pump intensity spectrum exp(-dw^2 / 2 sigma^2).
inline double envelope_sigma(const PumpSpec& pump) {
  return pump.omega_fwhm() / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

/// Single-pulse pump intensity spectrum, unit peak; FWHM equals pump.fwhm.
inline double pump_intensity(const PumpSpec& pump, double omega) {
  const double s = envelope_sigma(pump);
  const double d = omega - pump.omega();
  return std::exp(-d * d / (2.0 * s * s));
}

/// Two-photon pump envelope exp(-(dw_s + dw_i)^2 / 8 sigma^2), the self-convolution
/// of the pump amplitude. Depends on the frequency sum only.
inline std::complex<double> pump_envelope(const PumpSpec& pump, double omega_s, double omega_i) {
  const double s = envelope_sigma(pump);
  const double sum = omega_s + omega_i - 2.0 * pump.omega();
  return {std::exp(-sum * sum / (8.0 * s * s)), 0.0};
}

enum class PhaseMatchShape { Sinc, Gaussian };

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

/// sinc^2(x) = 1/2 here.
inline constexpr double kSincHalfPower = 1.3915573782515096;

/// exp(-g x^2) with the same intensity FWHM as sinc(x).
inline double matched_gaussian(double x) {
  const double g = std::log(2.0) / (2.0 * kSincHalfPower * kSincHalfPower);
  return std::exp(-g * x * x);
}

inline double phase_matching_function(const FiberSpec& fiber, const ProcessConfig& process,
                                      double omega_s, double omega_i, double peak_power,
                                      PhaseMatchShape shape = PhaseMatchShape::Sinc) {
  const double x = 0.5 * delta_k(fiber, process, omega_s, omega_i, peak_power) * fiber.length;
  return shape == PhaseMatchShape::Sinc ? sinc(x) : matched_gaussian(x);
}

/// Two uniform, strictly increasing angular-frequency axes.
struct SpectralGrid {
  std::vector<double> signal;
  std::vector<double> idler;

  static constexpr std::size_t kMinPoints = 16;

  static SpectralGrid uniform(double signal_centre, double signal_half_span,
                              std::size_t n_signal, double idler_centre,
                              double idler_half_span, std::size_t n_idler) {
    auto axis = [](double c, double h, std::size_t n) {
      std::vector<double> v(n);
      for (std::size_t k = 0; k < n; ++k)
        v[k] = c - h + 2.0 * h * static_cast<double>(k) / static_cast<double>(n - 1);
      return v;
    };
    if (n_signal < kMinPoints || n_idler < kMinPoints)
      throw InvalidArgument("grid: need at least 16 points per axis");
    SpectralGrid g{axis(signal_centre, signal_half_span, n_signal),
                   axis(idler_centre, idler_half_span, n_idler)};
    g.validate();
    return g;
  }

  double d_signal() const { return (signal.back() - signal.front()) / double(signal.size() - 1); }
  double d_idler() const { return (idler.back() - idler.front()) / double(idler.size() - 1); }

  void validate() const {
    auto check = [](const std::vector<double>& v, const char* name) {
      if (v.size() < kMinPoints)
        throw InvalidArgument(std::string("grid: ") + name + " axis needs >= 16 points");
      for (std::size_t k = 1; k < v.size(); ++k)
        if (!(v[k] > v[k - 1]))
          throw InvalidArgument(std::string("grid: ") + name + " axis not strictly increasing");
    };
    check(signal, "signal");
    check(idler, "idler");
  }
};

/// Marginal FWHMs (rad/s) predicted by replacing sinc with a matched Gaussian and
/// linearising dk about the phase-matched point.
struct MarginalEstimate {
  double signal_fwhm = 0.0;
  double idler_fwhm = 0.0;
  double signal_walkoff = 0.0;  // d dk / d omega_s, s/m
  double idler_walkoff = 0.0;   // d dk / d omega_i, s/m
};

inline MarginalEstimate estimate_marginals(const FiberSpec& fiber, const ProcessConfig& process,
                                           const PumpSpec& pump, const PhaseMatchPoint& centre) {
  const double wp = 0.5 * (centre.signal_omega() + centre.idler_omega());
  const double k1p = beta_derivative(fiber, process.pump, wp, 1);
  const double a = k1p - beta_derivative(fiber, process.daughter, centre.signal_omega(), 1);
  const double b = k1p - beta_derivative(fiber, process.daughter, centre.idler_omega(), 1);

  const double g = std::log(2.0) / (2.0 * kSincHalfPower * kSincHalfPower);
  const double q = g * fiber.length * fiber.length / 4.0;
  const double s = envelope_sigma(pump);
  const double c = 1.0 / (8.0 * s * s);
  const double A = q * a * a + c, B = q * a * b + c, C = q * b * b + c;
  auto fwhm = [](double coeff) { return 2.0 * std::sqrt(std::log(2.0) / (2.0 * coeff)); };
  return {fwhm(A - B * B / C), fwhm(C - B * B / A), a, b};
}

struct GridSettings {
  std::size_t n_signal = 512;
  std::size_t n_idler = 512;
  double span_fwhm = 4.0;  // half-span in units of the expected marginal FWHM

  void validate() const {
    if (n_signal < SpectralGrid::kMinPoints || n_idler < SpectralGrid::kMinPoints)
      throw InvalidArgument("grid: need at least 16 points per axis");
    if (!(span_fwhm > 0.0)) throw InvalidArgument("grid: span must be > 0");
  }
};

/// Phase-matched centre of the JSA at the pump centre wavelength.
inline PhaseMatchPoint jsa_centre(const FiberSpec& fiber, const ProcessConfig& process,
                                  const PumpSpec& pump, bool include_nonlinear_shift = true) {
  const double power = include_nonlinear_shift ? pump.peak_power : 0.0;
  const auto pt = solve_signal_idler(fiber, process, pump.wavelength, power);
  if (!pt)
    throw NumericError("no phase matching at the pump wavelength for process " +
                       process.label());
  return *pt;
}

/// Grid centred on the phase-matched pair, spanning +-span_fwhm expected FWHMs per axis.
inline SpectralGrid default_grid(const FiberSpec& fiber, const PumpSpec& pump,
                                 const ProcessConfig& process, const GridSettings& settings = {},
                                 bool include_nonlinear_shift = true) {
  settings.validate();
  const auto centre = jsa_centre(fiber, process, pump, include_nonlinear_shift);
  const auto est = estimate_marginals(fiber, process, pump, centre);
  return SpectralGrid::uniform(centre.signal_omega(), settings.span_fwhm * est.signal_fwhm,
                               settings.n_signal, centre.idler_omega(),
                               settings.span_fwhm * est.idler_fwhm, settings.n_idler);
}

/// Rows index signal frequency, columns idler frequency.
struct JSAmplitude {
  SpectralGrid grid;
  Eigen::MatrixXcd amplitude;
  bool normalized = false;

  double cell() const { return grid.d_signal() * grid.d_idler(); }
  /// sum |F|^2 d omega_s d omega_i
  double probability() const { return amplitude.squaredNorm() * cell(); }
  bool is_real() const { return amplitude.imag().cwiseAbs().maxCoeff() == 0.0; }
};

struct JsaOptions {
  PhaseMatchShape shape = PhaseMatchShape::Sinc;
  bool include_nonlinear_shift = true;
};

inline JSAmplitude build_jsa(const FiberSpec& fiber, const PumpSpec& pump,
                             const ProcessConfig& process, const SpectralGrid& grid,
                             const JsaOptions& options = {}) {
  fiber.validate();
  pump.validate();
  grid.validate();
  const double power = options.include_nonlinear_shift ? pump.peak_power : 0.0;

  // Resolution: at least 4 samples across the central lobe (|x| <= pi) on each axis.
  {
    const double ws = grid.signal[grid.signal.size() / 2];
    const double wi = grid.idler[grid.idler.size() / 2];
    const double wp = 0.5 * (ws + wi);
    const double k1p = beta_derivative(fiber, process.pump, wp, 1);
    const double a = std::abs(k1p - beta_derivative(fiber, process.daughter, ws, 1));
    const double b = std::abs(k1p - beta_derivative(fiber, process.daughter, wi, 1));
    auto check = [&](double slope, double spacing, const char* name) {
      if (slope == 0.0) return;
      const double lobe = 4.0 * std::numbers::pi / (slope * fiber.length);
      if (spacing > lobe / 4.0)
        throw NumericError(std::string("grid too coarse to resolve the phase-matching lobe on the ") +
                           name + " axis");
    };
    check(a, grid.d_signal(), "signal");
    check(b, grid.d_idler(), "idler");
  }

  const Eigen::Index ns = static_cast<Eigen::Index>(grid.signal.size());
  const Eigen::Index ni = static_cast<Eigen::Index>(grid.idler.size());
  JSAmplitude jsa{grid, Eigen::MatrixXcd(ns, ni), false};
  parallel_for(static_cast<std::size_t>(ns), [&](std::size_t j) {
    const double ws = grid.signal[j];
    for (Eigen::Index k = 0; k < ni; ++k) {
      const double wi = grid.idler[static_cast<std::size_t>(k)];
      jsa.amplitude(static_cast<Eigen::Index>(j), k) =
          phase_matching_function(fiber, process, ws, wi, power, options.shape) *
          pump_envelope(pump, ws, wi);
    }
  });

  const double p = jsa.probability();
  if (!(p > 0.0) || !std::isfinite(p)) throw NumericError("build_jsa: JSA has zero norm");
  jsa.amplitude /= std::sqrt(p);
  jsa.normalized = true;
  return jsa;
}

enum class Arm { Signal, Idler };

inline const char* arm_name(Arm arm) { return arm == Arm::Signal ? "signal" : "idler"; }

enum class FilterShape { TopHat, Gaussian };

/// Band-pass filter in wavelength.
struct FilterSpec {
  FilterShape shape = FilterShape::TopHat;
  double centre = 0.0;            // m
  double fwhm = 0.0;              // m
  double peak_transmission = 1.0;

  void validate() const {
    if (!(fwhm > 0.0)) throw InvalidArgument("filter: fwhm must be > 0");
    if (!(centre > 0.0)) throw InvalidArgument("filter: centre must be > 0");
    if (!(peak_transmission >= 0.0 && peak_transmission <= 1.0))
      throw InvalidArgument("filter: peak transmission must be in [0, 1]");
  }

  /// Power transmission at angular frequency omega.
  double transmission(double omega) const {
    const double d = wavelength_from_omega(omega) - centre;
    if (shape == FilterShape::TopHat) return std::abs(d) <= 0.5 * fwhm ? peak_transmission : 0.0;
    return peak_transmission * std::exp(-4.0 * std::log(2.0) * d * d / (fwhm * fwhm));
  }
};

struct FilterResult {
  JSAmplitude jsa;                     // unnormalized
  double transmitted_probability = 0;  // output probability / input probability
};

/// Multiplies the rows (signal) or columns (idler) by sqrt(T(omega)).
inline FilterResult apply_filter(const JSAmplitude& jsa, Arm arm, const FilterSpec& filter) {
  filter.validate();
  const auto& axis = arm == Arm::Signal ? jsa.grid.signal : jsa.grid.idler;
  const double lo = wavelength_from_omega(axis.back());
  const double hi = wavelength_from_omega(axis.front());
  if (!(filter.centre >= lo && filter.centre <= hi))
    throw InvalidArgument(std::string("filter centre outside the ") + arm_name(arm) +
                          " grid");

  FilterResult out{jsa, 0.0};
  out.jsa.normalized = false;
  for (std::size_t k = 0; k < axis.size(); ++k) {
    const double amp = std::sqrt(filter.transmission(axis[k]));
    const auto idx = static_cast<Eigen::Index>(k);
    if (arm == Arm::Signal)
      out.jsa.amplitude.row(idx) *= amp;
    else
      out.jsa.amplitude.col(idx) *= amp;
  }
  const double before = jsa.probability();
  const double after = out.jsa.probability();
  if (!(after > 0.0)) throw InvalidArgument("filter has zero overlap with the grid");
  out.transmitted_probability = after / before;
  return out;
}

/// Sampled single-photon spectrum: density per unit angular frequency.
struct Spectrum {
  std::vector<double> omega;
  std::vector<double> density;

  double d_omega() const { return (omega.back() - omega.front()) / double(omega.size() - 1); }
  double integral() const {
    double s = 0.0;
    for (double v : density) s += v;
    return s * d_omega();
  }
};

inline Spectrum marginal_spectrum(const JSAmplitude& jsa, Arm arm) {
  Spectrum s;
  if (arm == Arm::Signal) {
    s.omega = jsa.grid.signal;
    const Eigen::VectorXd m = jsa.amplitude.cwiseAbs2().rowwise().sum() * jsa.grid.d_idler();
    s.density.assign(m.data(), m.data() + m.size());
  } else {
    s.omega = jsa.grid.idler;
    const Eigen::RowVectorXd m = jsa.amplitude.cwiseAbs2().colwise().sum() * jsa.grid.d_signal();
    s.density.assign(m.data(), m.data() + m.size());
  }
  return s;
}

/// Half-maximum crossings (rad/s) by linear interpolation around the peak.
inline std::pair<double, double> half_max_crossings(const Spectrum& s) {
  const std::size_t n = s.density.size();
  std::size_t peak = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (s.density[k] > s.density[peak]) peak = k;
  if (peak == 0 || peak + 1 == n) throw NumericError("spectrum clipped: peak on grid boundary");
  const double half = 0.5 * s.density[peak];

  auto interp = [&](std::size_t inside, std::size_t outside) {
    const double y0 = s.density[inside], y1 = s.density[outside];
    const double t = (y0 - half) / (y0 - y1);
    return s.omega[inside] + t * (s.omega[outside] - s.omega[inside]);
  };
  std::size_t l = peak;
  while (l > 0 && s.density[l - 1] >= half) --l;
  if (l == 0) throw NumericError("spectrum clipped: no half-maximum crossing below the peak");
  std::size_t r = peak;
  while (r + 1 < n && s.density[r + 1] >= half) ++r;
  if (r + 1 == n) throw NumericError("spectrum clipped: no half-maximum crossing above the peak");
  return {interp(l, l - 1), interp(r, r + 1)};
}

inline double bandwidth_fwhm_omega(const Spectrum& s) {
  const auto [lo, hi] = half_max_crossings(s);
  return hi - lo;
}

/// FWHM in wavelength (m).
inline double bandwidth_fwhm(const Spectrum& s) {
  const auto [lo, hi] = half_max_crossings(s);
  return wavelength_from_omega(lo) - wavelength_from_omega(hi);
}

/// Transform-limited Gaussian pulse: tau = 0.441 lambda^2 / (c dlambda).
inline double coherence_time(double fwhm, double wavelength) {
  if (!(fwhm > 0.0) || !(wavelength > 0.0))
    throw InvalidArgument("coherence_time: inputs must be positive");
  return 0.441 * wavelength * wavelength / (kSpeedOfLight * fwhm);
}

}  // namespace fwm
