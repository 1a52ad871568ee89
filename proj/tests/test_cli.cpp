#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string output;  // stdout and stderr
};

Run fwm(const std::string& args) {
  const std::string cmd = std::string(FWM_BINARY) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path work(const std::string& name) {
  const fs::path p = fs::path(FWM_TEST_WORK_DIR) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read(const fs::path& p) { return json::parse(slurp(p)); }

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

fs::path source(const std::string& rel) { return fs::path(FWM_SOURCE_DIR) / rel; }

void expect_same_tree(const fs::path& a, const fs::path& b) {
  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const fs::path other = b / e.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path().filename();
    ++count;
  }
  EXPECT_GT(count, 0u);
}

}  // namespace

TEST(Cli, PhasematchWritesOperatingPoint) {
  const auto out = work("pm");
  const auto r = fwm("phasematch --preset paper --lambda-min 695 --lambda-max 715 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream csv(slurp(out / "phasematch_ss_ff.csv"));
  std::string line;
  bool found = false;
  std::getline(csv, line);
  EXPECT_EQ(line, "lambda_p_nm,lambda_s_nm,lambda_i_nm,delta_k_residual");
  while (std::getline(csv, line)) {
    double p, s, i, dk;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &p, &s, &i, &dk), 4) << line;
    if (std::abs(p - 705.0) < 1e-9 && std::abs(s - 597.0) <= 2.0 && std::abs(i - 860.0) <= 3.0) found = true;
  }
  EXPECT_TRUE(found);
  const auto fp = read(out / "factorable_ss_ff.json");
  EXPECT_TRUE(fp["found"].get<bool>());
  EXPECT_NEAR(fp["lambda_p_nm"].get<double>(), 705.0, 1.0);
}

TEST(Cli, NegativeLengthIsConfigError) {
  const auto dir = work("neg");
  const auto cfg = write_config(dir, {{"schema", "fwm.experiment/1"}, {"fiber", {{"preset", "paper"}, {"length_m", -0.4}}}});
  for (const char* cmd : {"phasematch", "jsa", "hom", "budget"}) {
    const auto r = fwm(std::string(cmd) + " --config " + cfg.string() + " --out " + dir.string());
    EXPECT_EQ(r.code, 2) << cmd << ": " << r.output;
    EXPECT_NE(r.output.find("fiber.length_m"), std::string::npos) << r.output;
  }
}

TEST(Cli, RangeOutsideWindowIsNumericError) {
  const auto out = work("window");
  const auto r = fwm("phasematch --lambda-min 400 --lambda-max 420 --out " + out.string());
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_NE(r.output.find("window"), std::string::npos) << r.output;
}

TEST(Cli, ZeroDelaySpanIsConfigError) {
  const auto out = work("dt0");
  const auto r = fwm("hom --delta-t-max 0 --out " + out.string());
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find("hom.delta_t_max_ps"), std::string::npos) << r.output;
}

TEST(Cli, BadArgumentsAreConfigErrors) {
  EXPECT_EQ(fwm("").code, 2);
  EXPECT_EQ(fwm("warp").code, 2);
  EXPECT_EQ(fwm("budget --config /nonexistent/fwm.json").code, 2);
  EXPECT_EQ(fwm("budget --preset nosuchfibre").code, 2);
  const auto dir = work("badjson");
  std::ofstream(dir / "broken.json") << "{ \"schema\": ";
  EXPECT_EQ(fwm("budget --config " + (dir / "broken.json").string()).code, 2);
}

TEST(Cli, BudgetReportsSixFoldRate) {
  const auto out = work("budget");
  const auto r = fwm("budget --config " + source("configs/paper_budget.json").string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("5.12"), std::string::npos) << r.output;
  EXPECT_DOUBLE_EQ(read(out / "rates.json")["nfold_rate_Hz"].get<double>(), 5.12);
}

TEST(Cli, FourFoldChainBudget) {
  const auto out = work("budget4");
  const auto r = fwm("budget --config " + source("configs/four_fold_budget.json").string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j = read(out / "rates.json");
  EXPECT_EQ(j["photons"].get<int>(), 4);
  const double signal = 0.81 * 0.59 * 0.439, idler = 0.65 * 0.40 * 0.692;
  EXPECT_NEAR(j["nfold_rate_Hz"].get<double>(), 80e6 * 0.01 * signal * idler * signal * idler, 1e-5);
  EXPECT_NEAR(j["chains"]["signal"]["efficiency"].get<double>(), 0.21, 0.005);
}

TEST(Cli, JsaPresetSchmidtBand) {
  const auto out = work("jsa");
  const auto r = fwm("jsa --preset paper --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const double k = read(out / "schmidt_ss_ff.json")["K"].get<double>();
  EXPECT_GE(k, 1.10);
  EXPECT_LE(k, 1.45);
}

TEST(Cli, WideGridMatchesConfiguredDimensions) {
  const auto dir = work("wide");
  const auto cfg = write_config(dir, {{"schema", "fwm.experiment/1"}, {"grid", {{"n_signal", 128}, {"n_idler", 96}}}});
  const auto r = fwm("jsa --wide --config " + cfg.string() + " --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream csv(slurp(dir / "jsa_ss_ff.csv"));
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line); ++rows)
    EXPECT_EQ(static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1, 96u);
  EXPECT_EQ(rows, 128u);
  const auto side = read(dir / "jsa_ss_ff.json");
  EXPECT_EQ(side["signal"]["points"].get<int>(), 128);
  EXPECT_EQ(side["idler"]["points"].get<int>(), 96);

  const auto narrow = work("narrow");
  ASSERT_EQ(fwm("jsa --config " + cfg.string() + " --out " + narrow.string()).code, 0);
  const double wide_span = side["signal"]["omega_max_rad_per_s"].get<double>() - side["signal"]["omega_min_rad_per_s"].get<double>();
  const auto ns = read(narrow / "jsa_ss_ff.json")["signal"];
  EXPECT_GT(wide_span, 2.0 * (ns["omega_max_rad_per_s"].get<double>() - ns["omega_min_rad_per_s"].get<double>()));
}

TEST(Cli, GaussianPhaseMatchingLowersK) {
  const auto sinc = work("pm_sinc"), gauss = work("pm_gauss");
  ASSERT_EQ(fwm("jsa --out " + sinc.string()).code, 0);
  ASSERT_EQ(fwm("jsa --gaussian-phasematch --out " + gauss.string()).code, 0);
  EXPECT_LT(read(gauss / "schmidt_ss_ff.json")["K"].get<double>(), read(sinc / "schmidt_ss_ff.json")["K"].get<double>());
}

TEST(Cli, HomWithNoiseBudgetBracketsMeasuredVisibility) {
  const auto out = work("hom");
  const auto r = fwm("hom --config " + source("configs/paper_experiment.json").string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j = read(out / "hom_fit.json");
  const double v = j["visibility"].get<double>();
  EXPECT_GE(v, 0.73);
  EXPECT_LE(v, 0.80);
  EXPECT_NEAR(j["noise_factor"].get<double>(), 0.99 * 0.99 * 0.99, 1e-6);
}

TEST(Cli, CalibrateReproducesShippedPreset) {
  const auto out = work("cal");
  const auto r = fwm("calibrate --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(slurp(out / "paper_fibre.json"), slurp(source("presets/paper_fibre.json")));
  for (const auto& t : read(out / "calibration_report.json")) EXPECT_TRUE(t["ok"].get<bool>()) << t.dump();
}

TEST(Cli, EveryCommandIsDeterministic) {
  const std::string cfg = " --config " + source("configs/paper_experiment.json").string();
  for (const char* cmd : {"phasematch", "jsa", "hom", "budget", "calibrate"}) {
    const auto a = work(std::string("det_a_") + cmd), b = work(std::string("det_b_") + cmd);
    ASSERT_EQ(fwm(cmd + cfg + " --out " + a.string()).code, 0) << cmd;
    ASSERT_EQ(fwm(cmd + cfg + " --out " + b.string()).code, 0) << cmd;
    expect_same_tree(a, b);
  }
}

TEST(Cli, ThreadCapDoesNotChangeOutput) {
  const auto a = work("thr_a");
  ASSERT_EQ(fwm("hom --out " + a.string()).code, 0);
  const std::string capped = std::string("env FWM_NUM_THREADS=1 ") + FWM_BINARY;
  const auto c = work("thr_c");
  ASSERT_EQ(std::system((capped + " hom --out " + c.string() + " > /dev/null").c_str()), 0);
  expect_same_tree(a, c);
}
