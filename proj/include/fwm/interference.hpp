#pragma once

// Two-source Hong-Ou-Mandel interference of heralded photons.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "fwm/error.hpp"
#include "fwm/jsa.hpp"
#include "fwm/parallel.hpp"
#include "fwm/schmidt.hpp"

namespace fwm {

struct NoiseBudget {
  double bs_reflectance = 0.5;
  double multipair_penalty = 0.0;
  double raman_penalty = 0.0;

  void validate() const {
    if (!(bs_reflectance > 0.0 && bs_reflectance < 1.0))
      throw InvalidArgument("noise: beam-splitter reflectance must be in (0, 1)");
    auto penalty = [](double p, const char* name) {
      if (!(p >= 0.0 && p < 0.5))
        throw InvalidArgument(std::string("noise: ") + name + " penalty must be in [0, 0.5)");
    };
    penalty(multipair_penalty, "multi-pair");
    penalty(raman_penalty, "Raman");
  }
};

/// 2RT / (R^2 + T^2): visibility ceiling of an unbalanced splitter.
inline double beam_splitter_factor(double reflectance) {
  const double t = 1.0 - reflectance;
  return 2.0 * reflectance * t / (reflectance * reflectance + t * t);
}

/// Reflectance R >= 1/2 whose beam-splitter factor equals `factor` in (0, 1].
inline double reflectance_for_factor(double factor) {
  if (!(factor > 0.0 && factor <= 1.0))
    throw InvalidArgument("beam-splitter factor must be in (0, 1]");
  const double rt = factor / (2.0 * (1.0 + factor));  // R(1-R)
  return 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - 4.0 * rt)));
}

inline double apply_noise(double v_ideal, const NoiseBudget& budget) {
  budget.validate();
  if (!(v_ideal >= 0.0 && v_ideal <= 1.0))
    throw InvalidArgument("apply_noise: visibility must be in [0, 1]");
  return v_ideal * beam_splitter_factor(budget.bs_reflectance) *
         (1.0 - budget.multipair_penalty) * (1.0 - budget.raman_penalty);
}

/// Tr(rho1 rho2) with the grid measure.
inline double hom_visibility(const SpectralDensityMatrix& a, const SpectralDensityMatrix& b) {
  if (!same_axis(a, b)) throw InvalidArgument("hom_visibility: frequency axes differ");
  const double d = a.d_omega();
  // Tr(AB) = sum_jk A_jk B_kj
  const double v = (a.rho.array() * b.rho.transpose().array()).sum().real() * d * d;
  return std::clamp(v, 0.0, 1.0);
}

struct DipCurve {
  std::vector<double> delay;        // s
  std::vector<double> coincidence;  // probability
  double baseline = 0.5;
};

inline std::vector<double> symmetric_delays(double max_delay, std::size_t samples) {
  if (!(max_delay > 0.0)) throw InvalidArgument("delay scan: maximum delay must be > 0");
  if (samples < 3) throw InvalidArgument("delay scan: need at least 3 samples");
  std::vector<double> d(samples);
  for (std::size_t k = 0; k < samples; ++k)
    d[k] = max_delay * (2.0 * static_cast<double>(k) / static_cast<double>(samples - 1) - 1.0);
  return d;
}

/// C(dt) = 1/2 (1 - Re sum rho1(w,w') rho2(w',w) e^{-i (w - w') dt} dw^2).
inline DipCurve hom_dip(const SpectralDensityMatrix& a, const SpectralDensityMatrix& b,
                        const std::vector<double>& delays) {
  if (!same_axis(a, b)) throw InvalidArgument("hom_dip: frequency axes differ");
  if (delays.empty()) throw InvalidArgument("hom_dip: empty delay grid");
  const double span = std::max(std::abs(delays.front()), std::abs(delays.back()));
  for (std::size_t k = 0; k < delays.size(); ++k) {
    if (k > 0 && !(delays[k] > delays[k - 1]))
      throw InvalidArgument("hom_dip: delays must be strictly increasing");
    if (std::abs(delays[k] + delays[delays.size() - 1 - k]) > 1e-9 * span)
      throw InvalidArgument("hom_dip: delay grid must be symmetric about 0");
  }

  const Eigen::MatrixXcd overlap = a.rho.cwiseProduct(b.rho.transpose());
  const double d = a.d_omega();
  const double centre = a.omega[a.omega.size() / 2];
  const auto n = static_cast<Eigen::Index>(a.omega.size());

  DipCurve curve;
  curve.delay = delays;
  curve.coincidence.resize(delays.size());
  parallel_for(delays.size(), [&](std::size_t m) {
    Eigen::VectorXcd phase(n);
    for (Eigen::Index j = 0; j < n; ++j)
      phase(j) = std::polar(1.0, -(a.omega[static_cast<std::size_t>(j)] - centre) * delays[m]);
    const std::complex<double> s = phase.transpose() * (overlap * phase.conjugate());
    curve.coincidence[m] = 0.5 * (1.0 - s.real() * d * d);
  });
  return curve;
}

/// Tr(rho1 rho2) of the heralded states of two sources on a common grid.
inline double detuned_visibility(const JSAmplitude& first, const JSAmplitude& second,
                                 const std::optional<FilterSpec>& herald_filter = {}) {
  return hom_visibility(heralded_density_matrix(first, Arm::Idler, herald_filter),
                        heralded_density_matrix(second, Arm::Idler, herald_filter));
}

/// Two sources that differ only in temperature, both on the first source's grid.
inline double detuned_visibility(const FiberSpec& fiber, const PumpSpec& pump,
                                 const ProcessConfig& process, double delta_t,
                                 const GridSettings& settings = {}, const JsaOptions& options = {}) {
  const auto grid = default_grid(fiber, pump, process, settings, options.include_nonlinear_shift);
  const auto first = build_jsa(fiber, pump, process, grid, options);
  if (delta_t == 0.0) return detuned_visibility(first, first);
  const auto second = build_jsa(apply_temperature(fiber, delta_t), pump, process, grid, options);
  return detuned_visibility(first, second);
}

enum class DipShape { Lorentzian, Gaussian };

inline const char* dip_shape_name(DipShape s) {
  return s == DipShape::Lorentzian ? "lorentzian" : "gaussian";
}

struct DipFit {
  double visibility = 0.0;  // fractional depth
  double width = 0.0;       // FWHM, s
  double centre = 0.0;      // s
  double baseline = 0.0;
  double residual_rms = 0.0;
  DipShape shape = DipShape::Lorentzian;
  int evaluations = 0;
};

inline constexpr int kFitEvaluationCap = 200;

namespace detail {

// Unit-FWHM profiles and their derivative with respect to u.
inline double dip_profile(DipShape s, double u) {
  return s == DipShape::Lorentzian ? 1.0 / (1.0 + 4.0 * u * u)
                                   : std::exp(-4.0 * std::log(2.0) * u * u);
}
inline double dip_profile_du(DipShape s, double u) {
  if (s == DipShape::Lorentzian) {
    const double q = 1.0 + 4.0 * u * u;
    return -8.0 * u / (q * q);
  }
  const double k = 4.0 * std::log(2.0);
  return -2.0 * k * u * std::exp(-k * u * u);
}

// Parameters, in picoseconds for time: [baseline, visibility, centre_ps, width_ps].
struct DipFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<double>& t_ps;
  const std::vector<double>& y;
  DipShape shape;

  int inputs() const { return 4; }
  int values() const { return static_cast<int>(y.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double u = (t_ps[k] - p(2)) / p(3);
      r(static_cast<Eigen::Index>(k)) = p(0) * (1.0 - p(1) * dip_profile(shape, u)) - y[k];
    }
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& J) const {
    for (std::size_t k = 0; k < y.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const double u = (t_ps[k] - p(2)) / p(3);
      const double g = dip_profile(shape, u), dg = dip_profile_du(shape, u);
      J(i, 0) = 1.0 - p(1) * g;
      J(i, 1) = -p(0) * g;
      J(i, 2) = p(0) * p(1) * dg / p(3);
      J(i, 3) = p(0) * p(1) * dg * u / p(3);
    }
    return 0;
  }
};

}  // namespace detail

/// Least-squares fit of baseline (1 - V profile((t - centre) / width)).
inline DipFit fit_dip(const DipCurve& curve, DipShape shape) {
  const std::size_t n = curve.delay.size();
  if (n < 8 || curve.coincidence.size() != n)
    throw InvalidArgument("fit_dip: need at least 8 samples");

  for (std::size_t k = 0; k < n; ++k)
    if (!std::isfinite(curve.delay[k]) || !std::isfinite(curve.coincidence[k]))
      throw NumericError("fit_dip: non-finite sample at index " + std::to_string(k));

  std::vector<double> t_ps(n);
  for (std::size_t k = 0; k < n; ++k) t_ps[k] = curve.delay[k] / kPicosecond;
  const auto& y = curve.coincidence;

  // Deterministic start: outer-quartile baseline, argmin centre, half-depth width.
  const std::size_t q = std::max<std::size_t>(1, n / 4);
  double base = 0.0;
  for (std::size_t k = 0; k < q; ++k) base += y[k] + y[n - 1 - k];
  base /= static_cast<double>(2 * q);
  const std::size_t imin = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
  const double depth = base - y[imin];
  double width = 0.25 * (t_ps.back() - t_ps.front());
  if (depth > 0.0) {
    const double half = base - 0.5 * depth;
    std::size_t l = imin, r = imin;
    while (l > 0 && y[l] < half) --l;
    while (r + 1 < n && y[r] < half) ++r;
    if (r > l) width = std::max(t_ps[r] - t_ps[l], t_ps[1] - t_ps[0]);
  }
  Eigen::VectorXd p(4);
  p << base, base != 0.0 ? depth / base : 0.0, t_ps[imin], width;

  detail::DipFunctor functor{t_ps, y, shape};
  Eigen::LevenbergMarquardt<detail::DipFunctor> lm(functor);
  lm.parameters.maxfev = kFitEvaluationCap;
  lm.parameters.xtol = 1e-10;
  lm.parameters.ftol = 1e-15;
  const auto status = lm.minimize(p);

  Eigen::VectorXd r(static_cast<Eigen::Index>(n));
  functor(p, r);
  const double rms = std::sqrt(r.squaredNorm() / static_cast<double>(n));
  if (status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation ||
      status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters || !p.allFinite()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "fit_dip (%s) did not converge: residual rms %.3g after %ld evaluations",
                  dip_shape_name(shape), rms, static_cast<long>(lm.nfev));
    throw NumericError(buf);
  }

  DipFit fit;
  fit.baseline = p(0);
  fit.visibility = p(1);
  fit.centre = p(2) * kPicosecond;
  fit.width = std::abs(p(3)) * kPicosecond;
  fit.residual_rms = rms;
  fit.shape = shape;
  fit.evaluations = static_cast<int>(lm.nfev);
  return fit;
}

/// Scales the depth of an ideal dip by `factor` about its baseline.
inline DipCurve scale_dip_depth(const DipCurve& curve, double factor) {
  DipCurve out = curve;
  for (double& c : out.coincidence) c = curve.baseline - factor * (curve.baseline - c);
  return out;
}

}  // namespace fwm
