#pragma once

// Declarative experiment configuration and the commands behind the `fwm` tool.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fwm/budget.hpp"
#include "fwm/calibration.hpp"
#include "fwm/dispersion.hpp"
#include "fwm/error.hpp"
#include "fwm/interference.hpp"
#include "fwm/io.hpp"
#include "fwm/jsa.hpp"
#include "fwm/phasematch.hpp"
#include "fwm/schmidt.hpp"

namespace fwm {

inline constexpr const char* kExperimentSchema = "fwm.experiment/1";

struct PumpScan {
  double lambda_min = 695 * kNanometre;
  double lambda_max = 715 * kNanometre;
  double step = 0.1 * kNanometre;
};

struct HomSettings {
  double delta_t_max = 25 * kPicosecond;
  std::size_t samples = 251;
  DipShape shape = DipShape::Lorentzian;
};

struct BudgetSettings {
  double repetition_rate = 80e6;
  double pair_probability = 0.1;
  std::vector<double> efficiencies{0.2, 0.2, 0.2, 0.2, 0.2, 0.2};
  std::vector<EfficiencyChain> chains;  // reported alongside the rate
  double coincidence_window = 1e-9;     // s
};

struct ExperimentConfig {
  std::string fiber_preset = "paper";  // used when fiber_path is empty
  std::filesystem::path fiber_path;
  std::optional<double> fiber_length;  // overrides the fibre's own length
  PumpSpec pump;
  ProcessConfig process{Axis::Slow, Axis::Fast};
  GridSettings grid;
  PumpScan scan;
  std::vector<FilterSpec> signal_filters;
  std::vector<FilterSpec> idler_filters;
  NoiseBudget noise;
  std::vector<double> source_temperature_offsets{0.0, 0.0};  // K, one per source
  HomSettings hom;
  std::vector<double> lengths;  // K(L) scan; empty to skip
  BudgetSettings budget;
  std::filesystem::path output_dir = "out";
  bool include_nonlinear_shift = true;
  PhaseMatchShape phase_matching = PhaseMatchShape::Sinc;

  double peak_power() const { return include_nonlinear_shift ? pump.peak_power : 0.0; }
  JsaOptions jsa_options() const { return {phase_matching, include_nonlinear_shift}; }

  /// Throws ConfigError naming the first offending field.
  void validate() const {
    auto field = [](const std::string& name, auto&& check) {
      try {
        check();
      } catch (const ConfigError&) {
        throw;
      } catch (const InvalidArgument& e) {
        throw ConfigError(name, e.what());
      }
    };
    if (fiber_path.empty() && fiber_preset != "paper")
      throw ConfigError("fiber", "unknown preset '" + fiber_preset + "'");
    if (!fiber_path.empty() && !std::filesystem::exists(fiber_path))
      throw ConfigError("fiber.path", "file not found: " + fiber_path.string());
    if (fiber_length && !(*fiber_length > 0.0)) throw ConfigError("fiber.length_m", "must be > 0");
    field("pump", [&] { pump.validate(); });
    field("grid", [&] { grid.validate(); });
    if (!(scan.step > 0.0)) throw ConfigError("phasematch.step_nm", "must be > 0");
    if (!(scan.lambda_min < scan.lambda_max))
      throw ConfigError("phasematch", "lambda_min_nm must be below lambda_max_nm");
    for (std::size_t k = 0; k < signal_filters.size(); ++k)
      field("filters.signal[" + std::to_string(k) + "]", [&] { signal_filters[k].validate(); });
    for (std::size_t k = 0; k < idler_filters.size(); ++k)
      field("filters.idler[" + std::to_string(k) + "]", [&] { idler_filters[k].validate(); });
    field("noise", [&] { noise.validate(); });
    if (source_temperature_offsets.size() != 2)
      throw ConfigError("sources", "exactly two sources are supported");
    for (std::size_t k = 0; k < 2; ++k)
      if (!(std::abs(source_temperature_offsets[k]) <= kMaxTemperatureStep))
        throw ConfigError("sources[" + std::to_string(k) + "].temperature_offset_K",
                          "must be within +-100 K");
    if (!(hom.delta_t_max > 0.0))
      throw ConfigError("hom.delta_t_max_ps", "must be > 0 (degenerate delay scan)");
    if (hom.samples < 8) throw ConfigError("hom.samples", "must be >= 8");
    for (std::size_t k = 0; k < lengths.size(); ++k)
      if (!(lengths[k] > 0.0 && lengths[k] <= 2.0))
        throw ConfigError("k_vs_length[" + std::to_string(k) + "]", "must be in (0, 2] m");
    if (!(budget.repetition_rate > 0.0))
      throw ConfigError("budget.repetition_rate_Hz", "must be > 0");
    if (!(budget.pair_probability >= 0.0 && budget.pair_probability <= 1.0))
      throw ConfigError("budget.pair_probability", "must be in [0, 1]");
    if (budget.efficiencies.size() % 2 != 0)
      throw ConfigError("budget.efficiencies", "photon count must be even");
    for (std::size_t k = 0; k < budget.efficiencies.size(); ++k)
      if (!(budget.efficiencies[k] >= 0.0 && budget.efficiencies[k] <= 1.0))
        throw ConfigError("budget.efficiencies[" + std::to_string(k) + "]", "must be in [0, 1]");
    for (const auto& c : budget.chains) field("budget.chains." + c.arm, [&] { c.validate(); });
    if (!(budget.coincidence_window >= 0.0))
      throw ConfigError("budget.coincidence_window_s", "must be >= 0");
  }
};

namespace detail {

inline FilterSpec filter_from_json(const io::json& j, const std::string& path) {
  FilterSpec f;
  const std::string shape = j.contains("shape") ? io::text(j["shape"], path + ".shape") : "tophat";
  if (shape == "tophat")
    f.shape = FilterShape::TopHat;
  else if (shape == "gaussian")
    f.shape = FilterShape::Gaussian;
  else
    throw ConfigError(path + ".shape", "expected 'tophat' or 'gaussian'");
  f.centre = io::number(io::require(j, "centre_nm", path), path + ".centre_nm") * kNanometre;
  f.fwhm = io::number(io::require(j, "fwhm_nm", path), path + ".fwhm_nm") * kNanometre;
  f.peak_transmission = io::number_or(j, "peak_transmission", path, 1.0);
  return f;
}

inline std::vector<FilterSpec> filters_from_json(const io::json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of filters");
  std::vector<FilterSpec> out;
  for (std::size_t k = 0; k < j.size(); ++k)
    out.push_back(filter_from_json(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline void reject_unknown(const io::json& j, const std::string& path,
                           const std::vector<std::string>& known) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
}

}  // namespace detail

/// Parses and validates an experiment document. Relative paths resolve against `base_dir`.
inline ExperimentConfig config_from_json(const io::json& j,
                                         const std::filesystem::path& base_dir = {}) {
  using namespace io;
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  detail::reject_unknown(j, "", {"schema", "fiber", "pump", "process", "grid", "phasematch",
                                 "filters", "noise", "sources", "hom", "k_vs_length", "budget",
                                 "output_dir", "ignore_nonlinear_shift", "phase_matching"});
  const std::string schema = text(require(j, "schema", ""), "schema");
  if (schema != kExperimentSchema) throw ConfigError("schema", "unsupported schema '" + schema + "'");

  ExperimentConfig c;
  if (j.contains("fiber")) {
    const json& f = j["fiber"];
    if (f.is_string()) {
      c.fiber_preset = f.get<std::string>();
    } else if (f.is_object()) {
      detail::reject_unknown(f, "fiber", {"preset", "path", "length_m"});
      if (f.contains("path") == f.contains("preset"))
        throw ConfigError("fiber", "give exactly one of 'preset' or 'path'");
      if (f.contains("preset")) c.fiber_preset = text(f["preset"], "fiber.preset");
      if (f.contains("path")) {
        std::filesystem::path p = text(f["path"], "fiber.path");
        c.fiber_path = p.is_absolute() ? p : base_dir / p;
      }
      if (f.contains("length_m")) c.fiber_length = number(f["length_m"], "fiber.length_m");
    } else {
      throw ConfigError("fiber", "expected a preset name or an object");
    }
  }
  if (j.contains("pump")) {
    const json& p = j["pump"];
    detail::reject_unknown(p, "pump", {"wavelength_nm", "fwhm_nm", "peak_power_W", "repetition_rate_Hz"});
    c.pump.wavelength = number_or(p, "wavelength_nm", "pump", 705.0) * kNanometre;
    c.pump.fwhm = number_or(p, "fwhm_nm", "pump", 0.9) * kNanometre;
    c.pump.peak_power = number_or(p, "peak_power_W", "pump", c.pump.peak_power);
    c.pump.repetition_rate = number_or(p, "repetition_rate_Hz", "pump", c.pump.repetition_rate);
  }
  if (j.contains("process")) {
    const auto pc = parse_process(text(j["process"], "process"));
    if (!pc) throw ConfigError("process", "expected one of ss->ss, ff->ff, ss->ff, ff->ss");
    c.process = *pc;
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    detail::reject_unknown(g, "grid", {"n_signal", "n_idler", "span_fwhm"});
    auto count = [&](const char* key, std::size_t fallback) {
      if (!g.contains(key)) return fallback;
      const double v = number(g[key], std::string("grid.") + key);
      if (!(v >= 16.0 && v <= 8192.0 && v == std::floor(v)))
        throw ConfigError(std::string("grid.") + key, "must be an integer in [16, 8192]");
      return static_cast<std::size_t>(v);
    };
    c.grid.n_signal = count("n_signal", c.grid.n_signal);
    c.grid.n_idler = count("n_idler", c.grid.n_idler);
    c.grid.span_fwhm = number_or(g, "span_fwhm", "grid", c.grid.span_fwhm);
  }
  if (j.contains("phasematch")) {
    const json& s = j["phasematch"];
    detail::reject_unknown(s, "phasematch", {"lambda_min_nm", "lambda_max_nm", "step_nm"});
    c.scan.lambda_min = number_or(s, "lambda_min_nm", "phasematch", 695.0) * kNanometre;
    c.scan.lambda_max = number_or(s, "lambda_max_nm", "phasematch", 715.0) * kNanometre;
    c.scan.step = number_or(s, "step_nm", "phasematch", 0.1) * kNanometre;
  }
  if (j.contains("filters")) {
    const json& f = j["filters"];
    detail::reject_unknown(f, "filters", {"signal", "idler"});
    if (f.contains("signal")) c.signal_filters = detail::filters_from_json(f["signal"], "filters.signal");
    if (f.contains("idler")) c.idler_filters = detail::filters_from_json(f["idler"], "filters.idler");
  }
  if (j.contains("noise")) {
    const json& n = j["noise"];
    detail::reject_unknown(n, "noise", {"bs_reflectance", "bs_factor", "multipair_penalty", "raman_penalty"});
    if (n.contains("bs_reflectance") && n.contains("bs_factor"))
      throw ConfigError("noise", "give bs_reflectance or bs_factor, not both");
    if (n.contains("bs_factor")) {
      const double f = number(n["bs_factor"], "noise.bs_factor");
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("noise.bs_factor", "must be in (0, 1]");
      c.noise.bs_reflectance = reflectance_for_factor(f);
    }
    c.noise.bs_reflectance = number_or(n, "bs_reflectance", "noise", c.noise.bs_reflectance);
    c.noise.multipair_penalty = number_or(n, "multipair_penalty", "noise", 0.0);
    c.noise.raman_penalty = number_or(n, "raman_penalty", "noise", 0.0);
  }
  if (j.contains("sources")) {
    const json& s = j["sources"];
    if (!s.is_array()) throw ConfigError("sources", "expected an array");
    c.source_temperature_offsets.clear();
    for (std::size_t k = 0; k < s.size(); ++k) {
      const std::string p = "sources[" + std::to_string(k) + "]";
      detail::reject_unknown(s[k], p, {"temperature_offset_K"});
      c.source_temperature_offsets.push_back(number_or(s[k], "temperature_offset_K", p, 0.0));
    }
  }
  if (j.contains("hom")) {
    const json& h = j["hom"];
    detail::reject_unknown(h, "hom", {"delta_t_max_ps", "samples", "fit_shape"});
    c.hom.delta_t_max = number_or(h, "delta_t_max_ps", "hom", 25.0) * kPicosecond;
    const double n = number_or(h, "samples", "hom", 251.0);
    if (!(n >= 8.0 && n <= 100000.0 && n == std::floor(n)))
      throw ConfigError("hom.samples", "must be an integer in [8, 100000]");
    c.hom.samples = static_cast<std::size_t>(n);
    if (h.contains("fit_shape")) {
      const std::string s = text(h["fit_shape"], "hom.fit_shape");
      if (s == "lorentzian")
        c.hom.shape = DipShape::Lorentzian;
      else if (s == "gaussian")
        c.hom.shape = DipShape::Gaussian;
      else
        throw ConfigError("hom.fit_shape", "expected 'lorentzian' or 'gaussian'");
    }
  }
  if (j.contains("k_vs_length")) c.lengths = numbers(j["k_vs_length"], "k_vs_length");
  if (j.contains("budget")) {
    const json& b = j["budget"];
    detail::reject_unknown(b, "budget", {"repetition_rate_Hz", "pair_probability", "efficiencies",
                                         "chains", "photons", "coincidence_window_s"});
    c.budget.repetition_rate = number_or(b, "repetition_rate_Hz", "budget", c.budget.repetition_rate);
    c.budget.pair_probability = number_or(b, "pair_probability", "budget", c.budget.pair_probability);
    c.budget.coincidence_window =
        number_or(b, "coincidence_window_s", "budget", c.budget.coincidence_window);
    std::map<std::string, double> by_arm;
    if (b.contains("chains")) {
      const json& ch = b["chains"];
      if (!ch.is_object()) throw ConfigError("budget.chains", "expected an object of arm -> stages");
      for (auto it = ch.begin(); it != ch.end(); ++it) {
        const std::string p = "budget.chains." + it.key();
        if (!it->is_array()) throw ConfigError(p, "expected an array of stages");
        EfficiencyChain chain{it.key(), {}};
        for (std::size_t k = 0; k < it->size(); ++k) {
          const std::string sp = p + "[" + std::to_string(k) + "]";
          const json& st = (*it)[k];
          chain.add(text(require(st, "name", sp), sp + ".name"),
                    number(require(st, "transmission", sp), sp + ".transmission"));
        }
        try {
          by_arm[it.key()] = chain_efficiency(chain);
        } catch (const InvalidArgument& e) {
          throw ConfigError(p, e.what());
        }
        c.budget.chains.push_back(chain);
      }
    }
    if (b.contains("efficiencies") && b.contains("photons"))
      throw ConfigError("budget", "give efficiencies or photons, not both");
    if (b.contains("efficiencies")) c.budget.efficiencies = numbers(b["efficiencies"], "budget.efficiencies");
    if (b.contains("photons")) {
      const json& ph = b["photons"];
      if (!ph.is_array()) throw ConfigError("budget.photons", "expected an array of chain names");
      c.budget.efficiencies.clear();
      for (std::size_t k = 0; k < ph.size(); ++k) {
        const std::string p = "budget.photons[" + std::to_string(k) + "]";
        const std::string arm = text(ph[k], p);
        auto it = by_arm.find(arm);
        if (it == by_arm.end()) throw ConfigError(p, "no chain named '" + arm + "'");
        c.budget.efficiencies.push_back(it->second);
      }
    }
  }
  if (j.contains("output_dir")) {
    std::filesystem::path p = text(j["output_dir"], "output_dir");
    c.output_dir = p.is_absolute() ? p : base_dir / p;
  }
  if (j.contains("ignore_nonlinear_shift")) {
    if (!j["ignore_nonlinear_shift"].is_boolean())
      throw ConfigError("ignore_nonlinear_shift", "expected true or false");
    c.include_nonlinear_shift = !j["ignore_nonlinear_shift"].get<bool>();
  }
  if (j.contains("phase_matching")) {
    const std::string s = text(j["phase_matching"], "phase_matching");
    if (s == "sinc")
      c.phase_matching = PhaseMatchShape::Sinc;
    else if (s == "gaussian")
      c.phase_matching = PhaseMatchShape::Gaussian;
    else
      throw ConfigError("phase_matching", "expected 'sinc' or 'gaussian'");
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  const auto j = io::read_json(path, "config");
  return config_from_json(j, path.parent_path());
}

/// The fibre the config refers to, with the length override applied.
inline FiberSpec resolve_fiber(const ExperimentConfig& c) {
  FiberSpec f = c.fiber_path.empty() ? paper_fiber() : io::load_fiber(c.fiber_path, "fiber.path");
  if (c.fiber_length) f.length = *c.fiber_length;
  return f;
}

struct CommandResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> summary;  // one human-readable line each
};

namespace detail {

inline void emit(CommandResult& r, const std::filesystem::path& path, const std::string& text) {
  io::write_text(path, text);
  r.files.push_back(path);
}

inline std::string line(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

inline JSAmplitude filtered(JSAmplitude jsa, const ExperimentConfig& c) {
  for (const auto& f : c.signal_filters) jsa = apply_filter(jsa, Arm::Signal, f).jsa;
  for (const auto& f : c.idler_filters) jsa = apply_filter(jsa, Arm::Idler, f).jsa;
  return jsa;
}

}  // namespace detail

inline CommandResult cmd_phasematch(const ExperimentConfig& c) {
  const FiberSpec fiber = resolve_fiber(c);
  const auto curve = scan_curve(fiber, c.process, c.scan.lambda_min, c.scan.lambda_max,
                                c.scan.step, c.peak_power());
  CommandResult r;
  const std::string tok = c.process.token();
  detail::emit(r, c.output_dir / ("phasematch_" + tok + ".csv"), io::curve_csv(curve));
  detail::emit(r, c.output_dir / ("phasematch_" + tok + ".json"), io::curve_to_json(curve).dump(2) + "\n");

  io::json fp_json;
  try {
    const auto fp = find_factorable_point(fiber, c.process, c.scan.lambda_min, c.scan.lambda_max,
                                          c.peak_power());
    const double wi = fp.point.idler_omega();
    const double np = group_index(fiber, c.process.pump, fp.point.pump_omega());
    const double ni = group_index(fiber, c.process.daughter, wi);
    fp_json = {{"found", true},
               {"process", c.process.label()},
               {"lambda_p_nm", io::round_sig(fp.pump_wavelength / kNanometre)},
               {"slope", io::round_sig(fp.slope)},
               {"point", io::point_to_json(fp.point)},
               {"group_index_pump", io::round_sig(np)},
               {"group_index_idler", io::round_sig(ni)}};
    r.summary.push_back(detail::line("factorable point %.3f nm (slope %.3g)",
                                     fp.pump_wavelength / kNanometre, fp.slope));
  } catch (const NumericError& e) {
    fp_json = {{"found", false}, {"process", c.process.label()}, {"reason", e.what()}};
    r.summary.push_back(std::string("no factorable point: ") + e.what());
  }
  detail::emit(r, c.output_dir / ("factorable_" + tok + ".json"), fp_json.dump(2) + "\n");
  r.summary.insert(r.summary.begin(),
                   c.process.label() + ": " + std::to_string(curve.points.size()) + " points");
  return r;
}

inline CommandResult cmd_jsa(const ExperimentConfig& c) {
  const FiberSpec fiber = resolve_fiber(c);
  const auto grid = default_grid(fiber, c.pump, c.process, c.grid, c.include_nonlinear_shift);
  const auto jsa = build_jsa(fiber, c.pump, c.process, grid, c.jsa_options());
  const auto schmidt = schmidt_decompose(jsa);
  const auto sig = marginal_spectrum(jsa, Arm::Signal);
  const auto idl = marginal_spectrum(jsa, Arm::Idler);

  CommandResult r;
  const std::string tok = c.process.token();
  const std::string csv = "jsa_" + tok + ".csv";
  detail::emit(r, c.output_dir / csv, io::jsa_intensity_csv(jsa));
  detail::emit(r, c.output_dir / ("jsa_" + tok + ".json"), io::jsa_sidecar(jsa, csv).dump(2) + "\n");
  detail::emit(r, c.output_dir / ("marginal_signal_" + tok + ".csv"), io::spectrum_csv(sig));
  detail::emit(r, c.output_dir / ("marginal_idler_" + tok + ".csv"), io::spectrum_csv(idl));

  io::json sj = io::schmidt_to_json(schmidt);
  sj["signal_fwhm_nm"] = io::round_sig(bandwidth_fwhm(sig) / kNanometre);
  sj["idler_fwhm_nm"] = io::round_sig(bandwidth_fwhm(idl) / kNanometre);
  if (!c.idler_filters.empty() || !c.signal_filters.empty())
    sj["heralded_purity"] =
        io::round_sig(purity(heralded_density_matrix(detail::filtered(jsa, c), Arm::Idler)));
  detail::emit(r, c.output_dir / ("schmidt_" + tok + ".json"), sj.dump(2) + "\n");

  if (!c.lengths.empty()) {
    const auto kl = k_vs_length(fiber, c.pump, c.process, c.lengths, c.grid, c.jsa_options());
    detail::emit(r, c.output_dir / ("k_vs_length_" + tok + ".csv"), io::k_vs_length_csv(kl));
  }
  r.summary.push_back(detail::line("K = %.6g, purity = %.6g", schmidt.schmidt_number, schmidt.purity));
  r.summary.push_back(detail::line("signal FWHM %.4g nm, idler FWHM %.4g nm",
                                   bandwidth_fwhm(sig) / kNanometre, bandwidth_fwhm(idl) / kNanometre));
  return r;
}

/// Total visibility factor of the noise budget.
inline double noise_factor(const NoiseBudget& n) { return apply_noise(1.0, n); }

inline CommandResult cmd_hom(const ExperimentConfig& c) {
  const FiberSpec base = resolve_fiber(c);
  const FiberSpec first = apply_temperature(base, c.source_temperature_offsets[0]);
  const FiberSpec second = apply_temperature(base, c.source_temperature_offsets[1]);
  const auto grid = default_grid(first, c.pump, c.process, c.grid, c.include_nonlinear_shift);
  const auto jsa1 = build_jsa(first, c.pump, c.process, grid, c.jsa_options());
  const auto jsa2 = build_jsa(second, c.pump, c.process, grid, c.jsa_options());
  const auto rho1 = heralded_density_matrix(detail::filtered(jsa1, c), Arm::Idler);
  const auto rho2 = heralded_density_matrix(detail::filtered(jsa2, c), Arm::Idler);

  const double v_ideal = hom_visibility(rho1, rho2);
  const double factor = noise_factor(c.noise);
  const auto ideal = hom_dip(rho1, rho2, symmetric_delays(c.hom.delta_t_max, c.hom.samples));
  const auto dip = scale_dip_depth(ideal, factor);
  const auto fit = fit_dip(dip, c.hom.shape);
  const DipShape other = c.hom.shape == DipShape::Lorentzian ? DipShape::Gaussian : DipShape::Lorentzian;
  const auto alt = fit_dip(dip, other);
  const double k = schmidt_decompose(jsa1).schmidt_number;

  io::json j = io::fit_to_json(fit);
  j["alternate_fit"] = io::fit_to_json(alt);
  j["ideal_visibility"] = io::round_sig(v_ideal);
  j["noise_factor"] = io::round_sig(factor);
  j["predicted_visibility"] = io::round_sig(apply_noise(v_ideal, c.noise));
  j["bs_reflectance"] = io::round_sig(c.noise.bs_reflectance);
  j["schmidt_number"] = io::round_sig(k);
  j["jsa_correlation_deficit"] = io::round_sig(1.0 - 1.0 / k);
  j["spectral_overlap_ratio"] = io::round_sig(v_ideal / purity(rho1));

  CommandResult r;
  detail::emit(r, c.output_dir / "hom_dip.csv", io::dip_csv(dip));
  detail::emit(r, c.output_dir / "hom_fit.json", j.dump(2) + "\n");
  r.summary.push_back(detail::line("ideal V = %.6g, predicted V = %.6g", v_ideal,
                                   apply_noise(v_ideal, c.noise)));
  r.summary.push_back(std::string(dip_shape_name(fit.shape)) +
                      detail::line(" fit: V = %.6g, FWHM = %.4g ps", fit.visibility,
                                   fit.width / kPicosecond));
  return r;
}

inline CommandResult cmd_budget(const ExperimentConfig& c) {
  const auto& b = c.budget;
  const auto report = make_rate_report(b.repetition_rate, b.pair_probability, b.efficiencies,
                                       b.coincidence_window);
  io::json j = io::rate_report_to_json(report);
  io::json chains = io::json::object();
  for (const auto& ch : b.chains) {
    io::json stages = io::json::array();
    for (const auto& s : ch.stages)
      stages.push_back({{"name", s.name}, {"transmission", io::round_sig(s.transmission)}});
    chains[ch.arm] = {{"stages", stages}, {"efficiency", io::round_sig(chain_efficiency(ch))}};
  }
  if (!b.chains.empty()) j["chains"] = chains;
  CommandResult r;
  detail::emit(r, c.output_dir / "rates.json", j.dump(2) + "\n");
  r.summary.push_back(detail::line("%.0f-fold rate %.3g /s (accidentals %.3g /s)",
                                   static_cast<double>(b.efficiencies.size()), report.nfold_rate,
                                   report.accidental_rate));
  return r;
}

/// Writes the calibrated preset and its target report.
inline CommandResult cmd_calibrate(const ExperimentConfig& c) {
  const auto targets = paper_targets();
  const FiberSpec& f = paper_fiber();
  io::json rep = io::json::array();
  for (const auto& t : evaluate_targets(f, targets))
    rep.push_back({{"name", t.name},
                   {"value", io::round_sig(t.value)},
                   {"target", io::round_sig(t.target)},
                   {"tolerance", io::round_sig(t.tolerance)},
                   {"ok", t.ok}});
  CommandResult r;
  detail::emit(r, c.output_dir / "paper_fibre.json", io::fiber_to_json(f).dump(2) + "\n");
  detail::emit(r, c.output_dir / "calibration_report.json", rep.dump(2) + "\n");
  r.summary.push_back(detail::line("dn_dT = %.4g /K, ZDW slow %.2f nm", f.dn_dT,
                                   zero_dispersion_wavelength(f, Axis::Slow) / kNanometre));
  return r;
}

}  // namespace fwm
