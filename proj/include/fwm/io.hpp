#pragma once

// File formats: fibre JSON, CSV/JSON exports of curves, JSAs, spectra, dips and rates.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fwm/budget.hpp"
#include "fwm/dispersion.hpp"
#include "fwm/error.hpp"
#include "fwm/interference.hpp"
#include "fwm/jsa.hpp"
#include "fwm/phasematch.hpp"
#include "fwm/schmidt.hpp"

namespace fwm::io {

using nlohmann::json;

inline constexpr int kDigits = 9;
inline constexpr int kCurveDigits = 6;
inline constexpr const char* kFiberSchema = "fwm.fiber/1";

/// Decimal text with `digits` significant digits.
inline std::string fmt(double v, int digits = kDigits) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// `v` rounded to `digits` significant digits, for JSON output.
inline double round_sig(double v, int digits = kDigits) {
  return std::strtod(fmt(v, digits).c_str(), nullptr);
}

inline json rounded(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(round_sig(x));
  return a;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline json read_json(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(field, std::string("malformed JSON: ") + e.what());
  }
}

// ---- field access with dotted-path errors ---------------------------------

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

inline double number_or(const json& j, const std::string& key, const std::string& path,
                        double fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, path + "." + key);
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t k = 0; k < j.size(); ++k)
    v.push_back(number(j[k], path + "[" + std::to_string(k) + "]"));
  return v;
}

inline std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

// ---- fibre -----------------------------------------------------------------

inline json beta_units(std::size_t order) {
  json u = json::array({"rad/m", "s/m"});
  for (std::size_t k = 2; k <= order; ++k) u.push_back("s^" + std::to_string(k) + "/m");
  return u;
}

/// Full-precision fibre document; coefficients round-trip exactly.
inline json fiber_to_json(const FiberSpec& f) {
  json axes = json::object();
  for (Axis a : kAxes) {
    const auto& ad = f.axis(a);
    axes[axis_name(a)] = {{"beta", ad.beta}, {"units", beta_units(ad.order())}};
  }
  return {{"schema", kFiberSchema},
          {"omega0_rad_per_s", f.omega0()},
          {"validity_fraction", f.slow.validity_fraction},
          {"length_m", f.length},
          {"gamma_per_W_m", f.gamma},
          {"dn_dT_per_K", f.dn_dT},
          {"reference_temperature_C", f.reference_temperature},
          {"temperature_offset_K", f.temperature_offset},
          {"axes", axes}};
}

inline FiberSpec fiber_from_json(const json& j, const std::string& path = "fiber") {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const std::string schema = text(require(j, "schema", path), path + ".schema");
  if (schema != kFiberSchema)
    throw ConfigError(path + ".schema", "unsupported schema '" + schema + "'");
  FiberSpec f;
  const double w0 = number(require(j, "omega0_rad_per_s", path), path + ".omega0_rad_per_s");
  if (!(w0 > 0.0)) throw ConfigError(path + ".omega0_rad_per_s", "must be > 0");
  const double window = number_or(j, "validity_fraction", path, 0.25);
  if (!(window > 0.0 && window < 1.0))
    throw ConfigError(path + ".validity_fraction", "must be in (0, 1)");
  f.length = number(require(j, "length_m", path), path + ".length_m");
  if (!(f.length > 0.0)) throw ConfigError(path + ".length_m", "must be > 0");
  f.gamma = number(require(j, "gamma_per_W_m", path), path + ".gamma_per_W_m");
  if (!(f.gamma >= 0.0)) throw ConfigError(path + ".gamma_per_W_m", "must be >= 0");
  f.dn_dT = number_or(j, "dn_dT_per_K", path, 0.0);
  f.reference_temperature = number_or(j, "reference_temperature_C", path, 20.0);
  f.temperature_offset = number_or(j, "temperature_offset_K", path, 0.0);
  const json& axes = require(j, "axes", path);
  for (Axis a : kAxes) {
    const std::string ap = path + ".axes." + axis_name(a);
    const json& ax = require(axes, axis_name(a), path + ".axes");
    AxisDispersion& ad = f.axis(a);
    ad.omega0 = w0;
    ad.validity_fraction = window;
    ad.beta = numbers(require(ax, "beta", ap), ap + ".beta");
    if (ad.order() < AxisDispersion::kMinOrder || ad.order() > AxisDispersion::kMaxOrder)
      throw ConfigError(ap + ".beta", "needs 5 to 7 coefficients (order 4 to 6)");
  }
  f.validate();
  return f;
}

inline FiberSpec load_fiber(const std::filesystem::path& path, const std::string& field = "fiber") {
  return fiber_from_json(read_json(path, field), field);
}

// ---- phase matching --------------------------------------------------------

inline std::string curve_csv(const PhaseMatchCurve& c) {
  std::ostringstream os;
  os << "lambda_p_nm,lambda_s_nm,lambda_i_nm,delta_k_residual\n";
  for (const auto& p : c.points)
    os << fmt(p.pump_wavelength / kNanometre, kCurveDigits) << ','
       << fmt(p.signal_wavelength / kNanometre, kCurveDigits) << ','
       << fmt(p.idler_wavelength / kNanometre, kCurveDigits) << ','
       << fmt(p.delta_k, kCurveDigits) << '\n';
  return os.str();
}

inline json point_to_json(const PhaseMatchPoint& p) {
  return {{"lambda_p_nm", round_sig(p.pump_wavelength / kNanometre)},
          {"lambda_s_nm", round_sig(p.signal_wavelength / kNanometre)},
          {"lambda_i_nm", round_sig(p.idler_wavelength / kNanometre)},
          {"delta_k_residual", round_sig(p.delta_k)},
          {"process", p.process.label()}};
}

inline json curve_to_json(const PhaseMatchCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(point_to_json(p));
  return {{"process", c.process.label()}, {"points", pts}};
}

// ---- JSA and spectra -------------------------------------------------------

/// |F|^2, one row per signal frequency.
inline std::string jsa_intensity_csv(const JSAmplitude& jsa) {
  std::ostringstream os;
  for (Eigen::Index r = 0; r < jsa.amplitude.rows(); ++r) {
    for (Eigen::Index c = 0; c < jsa.amplitude.cols(); ++c) {
      if (c) os << ',';
      os << fmt(std::norm(jsa.amplitude(r, c)));
    }
    os << '\n';
  }
  return os.str();
}

inline json axis_to_json(const std::vector<double>& omega) {
  return {{"points", omega.size()},
          {"omega_min_rad_per_s", round_sig(omega.front())},
          {"omega_max_rad_per_s", round_sig(omega.back())},
          {"lambda_at_min_nm", round_sig(wavelength_from_omega(omega.front()) / kNanometre)},
          {"lambda_at_max_nm", round_sig(wavelength_from_omega(omega.back()) / kNanometre)}};
}

inline json jsa_sidecar(const JSAmplitude& jsa, const std::string& csv_name) {
  return {{"data", csv_name},
          {"quantity", "|F|^2 in s^2 (unit integral over omega_s, omega_i)"},
          {"rows", "signal"},
          {"columns", "idler"},
          {"spacing", "uniform in angular frequency"},
          {"signal", axis_to_json(jsa.grid.signal)},
          {"idler", axis_to_json(jsa.grid.idler)}};
}

/// Density per unit wavelength, ascending in wavelength.
inline std::string spectrum_csv(const Spectrum& s) {
  std::ostringstream os;
  os << "lambda_nm,intensity\n";
  for (std::size_t k = s.omega.size(); k-- > 0;) {
    const double lambda = wavelength_from_omega(s.omega[k]);
    const double per_m = s.density[k] * kTwoPi * kSpeedOfLight / (lambda * lambda);
    os << fmt(lambda / kNanometre) << ',' << fmt(per_m * kNanometre) << '\n';
  }
  return os.str();
}

inline json schmidt_to_json(const SchmidtResult& r) {
  return {{"schmidt_probs", rounded(r.probabilities)},
          {"K", round_sig(r.schmidt_number)},
          {"purity", round_sig(r.purity)}};
}

inline std::string k_vs_length_csv(const std::vector<std::pair<double, double>>& rows) {
  std::ostringstream os;
  os << "L_m,K\n";
  for (const auto& [L, K] : rows) os << fmt(L) << ',' << fmt(K) << '\n';
  return os.str();
}

// ---- interference and rates --------------------------------------------------

inline std::string dip_csv(const DipCurve& d) {
  std::ostringstream os;
  os << "delta_t_ps,coincidence_prob\n";
  for (std::size_t k = 0; k < d.delay.size(); ++k)
    os << fmt(d.delay[k] / kPicosecond) << ',' << fmt(d.coincidence[k]) << '\n';
  return os.str();
}

inline json fit_to_json(const DipFit& f) {
  return {{"visibility", round_sig(f.visibility)},
          {"width_ps", round_sig(f.width / kPicosecond)},
          {"centre_ps", round_sig(f.centre / kPicosecond)},
          {"baseline", round_sig(f.baseline)},
          {"residual_rms", round_sig(f.residual_rms)},
          {"shape", dip_shape_name(f.shape)}};
}

inline json rate_report_to_json(const RateReport& r) {
  return {{"repetition_rate_Hz", round_sig(r.repetition_rate)},
          {"pair_probability", round_sig(r.pair_probability)},
          {"efficiencies", rounded(r.efficiencies)},
          {"photons", r.efficiencies.size()},
          {"nfold_rate_Hz", round_sig(r.nfold_rate)},
          {"accidental_rate_Hz", round_sig(r.accidental_rate)}};
}

}  // namespace fwm::io
