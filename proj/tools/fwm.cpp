// fwm: command-line driver for the photon-pair source toolkit.
//
// Exit codes: 0 success, 2 configuration or argument error, 3 numeric or domain error.

#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fwm/fwm.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitOther = 1;

struct Options {
  std::string config;
  std::string out;
  std::string preset;
  bool ignore_nonlinear_shift = false;
  bool wide = false;
  bool gaussian_phasematch = false;
  std::optional<double> delta_t_max_ps;
  std::optional<double> lambda_min_nm, lambda_max_nm, step_nm;
};

fwm::ExperimentConfig make_config(const Options& o) {
  fwm::ExperimentConfig c;
  if (!o.config.empty()) c = fwm::load_config(o.config);
  if (!o.preset.empty()) {
    c.fiber_preset = o.preset;
    c.fiber_path.clear();
  }
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.ignore_nonlinear_shift) c.include_nonlinear_shift = false;
  if (o.wide) c.grid.span_fwhm = 10.0;
  if (o.gaussian_phasematch) c.phase_matching = fwm::PhaseMatchShape::Gaussian;
  if (o.delta_t_max_ps) c.hom.delta_t_max = *o.delta_t_max_ps * fwm::kPicosecond;
  if (o.lambda_min_nm) c.scan.lambda_min = *o.lambda_min_nm * fwm::kNanometre;
  if (o.lambda_max_nm) c.scan.lambda_max = *o.lambda_max_nm * fwm::kNanometre;
  if (o.step_nm) c.scan.step = *o.step_nm * fwm::kNanometre;
  c.validate();
  return c;
}

int run(const Options& o, const std::function<fwm::CommandResult(const fwm::ExperimentConfig&)>& cmd) {
  try {
    const auto result = cmd(make_config(o));
    for (const auto& line : result.summary) std::printf("%s\n", line.c_str());
    for (const auto& f : result.files) std::printf("wrote %s\n", f.string().c_str());
    return kExitOk;
  } catch (const fwm::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const fwm::InvalidArgument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kExitConfig;
  } catch (const fwm::CalibrationError& e) {
    std::fprintf(stderr, "calibration failed: %s\n", e.what());
    for (const auto& r : e.residuals())
      std::fprintf(stderr, "  %-36s %.6g (target %.6g +- %.3g)%s\n", r.name.c_str(), r.value,
                   r.target, r.tolerance, r.ok ? "" : "  MISS");
    return kExitNumeric;
  } catch (const fwm::DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return kExitNumeric;
  } catch (const fwm::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOther;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Four-wave-mixing photon-pair source simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Experiment configuration (JSON, schema fwm.experiment/1)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--preset", o.preset, "Built-in fibre preset")->check(CLI::IsMember({"paper"}));
  app.add_flag("--ignore-nonlinear-shift", o.ignore_nonlinear_shift, "Drop the 2 gamma P term");

  auto* pm = app.add_subcommand("phasematch", "Phase-matching curve and factorable point");
  pm->add_option("--lambda-min", o.lambda_min_nm, "Pump scan start [nm]");
  pm->add_option("--lambda-max", o.lambda_max_nm, "Pump scan end [nm]");
  pm->add_option("--step", o.step_nm, "Pump scan step [nm]");

  auto* jsa = app.add_subcommand("jsa", "Joint spectral amplitude, marginals and Schmidt number");
  jsa->add_flag("--wide", o.wide, "Grid spanning +-10 marginal FWHMs");
  jsa->add_flag("--gaussian-phasematch", o.gaussian_phasematch,
                "Replace sinc phase matching by a matched Gaussian");

  auto* hom = app.add_subcommand("hom", "Two-source Hong-Ou-Mandel dip and fit");
  hom->add_option("--delta-t-max", o.delta_t_max_ps, "Largest delay of the symmetric scan [ps]");

  auto* budget = app.add_subcommand("budget", "Coincidence-rate budget");
  auto* calibrate = app.add_subcommand("calibrate", "Recalibrate the built-in paper fibre preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (pm->parsed()) return run(o, fwm::cmd_phasematch);
  if (jsa->parsed()) return run(o, fwm::cmd_jsa);
  if (hom->parsed()) return run(o, fwm::cmd_hom);
  if (budget->parsed()) return run(o, fwm::cmd_budget);
  if (calibrate->parsed()) return run(o, fwm::cmd_calibrate);
  return kExitConfig;
}
