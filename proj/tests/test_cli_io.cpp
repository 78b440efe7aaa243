#include <gtest/gtest.h>
#include <sys/wait.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ramzm/cli_io.hpp"

using namespace ramzm;
namespace fs = std::filesystem;

namespace {

constexpr const char* kMinimal = R"({"modulator": {"v_pi": 5}})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    return e.message();
  }
  ADD_FAILURE() << "config accepted: " << text;
  return "";
}

class CliDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           (std::string("ramzm_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& text) {
    const auto p = dir_ / "config.json";
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  int run(const std::string& command, const std::string& config_text, CommandOptions opt = {}) {
    opt.config_path = write_config(config_text);
    opt.out_dir = dir_ / "out";
    out_.str("");
    err_.str("");
    return run_command(command, opt, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsMirrorReferenceTable) {
  const auto cfg = parse_config(kMinimal);
  const auto link = cfg.link();
  const auto ref = reference_link();
  EXPECT_NEAR(link.p_laser / ref.p_laser, 1.0, 1e-15);
  EXPECT_NEAR(link.rin / ref.rin, 1.0, 1e-15);
  EXPECT_EQ(link.r_source, 50.0);
  EXPECT_EQ(link.r_load, 50.0);
  EXPECT_EQ(link.responsivity, 1.1);
  EXPECT_EQ(link.channel_loss, 1.0);
  EXPECT_EQ(link.bandwidth_hz, 1.0);
  EXPECT_EQ(link.temperature_k, 290.0);
  EXPECT_EQ(link.pd_sat_current, 15.5e-3);
  EXPECT_EQ(cfg.modulator().v_pi, 5.0);
  EXPECT_NEAR(cfg.modulator().insertion_loss, 10.0, 1e-14);
  EXPECT_EQ(cfg.bias(), bias_presets::linearized());
}

TEST(Config, DbAndLinearSpellingsAgree) {
  const auto a = parse_config(R"({"link": {"p_laser_dbm": 20, "rin_db_hz": -150, "channel_loss_db": 3},
                                  "modulator": {"v_pi": 4, "insertion_loss_db": 6}})");
  const auto b = parse_config(R"({"link": {"p_laser_w": 0.1, "rin_per_hz": 1e-15, "channel_loss": 1.9952623149688795},
                                  "modulator": {"v_pi": 4, "insertion_loss": 3.9810717055349722}})");
  EXPECT_NEAR(a.link().p_laser, b.link().p_laser, 1e-16);
  EXPECT_NEAR(a.link().rin / b.link().rin, 1.0, 1e-14);
  EXPECT_NEAR(a.link().channel_loss, b.link().channel_loss, 1e-15);
  EXPECT_NEAR(a.modulator().insertion_loss, b.modulator().insertion_loss, 1e-15);
}

TEST(Config, RadiansAndMultiplesOfPi) {
  const auto p = parse_config(R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_pi": 0.25, "theta_dc_pi": 1.5, "tau": 0.3}})");
  const auto r = parse_config(R"({"modulator": {"v_pi": 5},
                                  "bias": {"phi_bias_rad": 0.78539816339744831, "theta_dc_rad": 4.7123889803846897, "tau": 0.3}})");
  EXPECT_EQ(r.angle_unit, AngleUnit::Rad);
  EXPECT_NEAR(p.bias().phi_bias, r.bias().phi_bias, 1e-15);
  EXPECT_NEAR(p.bias().theta_dc, r.bias().theta_dc, 1e-15);
}

TEST(Config, RoundTrip) {
  const std::string text = R"({
    "link": {"p_laser_w": 0.05, "rin_db_hz": -150.5, "r_source": 25, "channel_loss_db": 2.5,
             "bandwidth_hz": 1e6, "transformer_turns": 1.5, "pd_sat_current": 0.02},
    "modulator": {"v_pi": 3.3, "insertion_loss": 7.5, "electrode_c": 1.5e-13, "drive": "ramzm-lumped"},
    "bias": {"phi_bias_rad": 1.1, "theta_dc_rad": 2.9, "tau": 0.45, "alpha": 0.99, "psi_path_rad": 0.01},
    "analysis": {"sfdr_method": "two-tone", "gain_convention": "closed-form", "matching": "transformer",
                 "include_modulator_noise": true},
    "sweep": {"axis1": {"param": "theta_dc_rad", "start": 0, "stop": 6.2, "count": 11},
              "axis2": {"param": "p_laser_dbm", "start": 0, "stop": 20, "count": 3},
              "metrics": ["gain", "iip2"], "timestamp": "t0"},
    "two_tone": {"f1_hz": 1e9, "f2_hz": 1.1e9, "points": 5},
    "optimize": {"objective": "min-nf", "max_photocurrent_a": 0.004, "theta_dc_rad": [0.5, 3.0], "tau": [0.2, 0.8]},
    "null_bias": {"p_laser_dbm": {"start": 15, "stop": 25, "count": 6}, "target_current_a": 0.01}
  })";
  const auto a = parse_config(text);
  const auto s = serialize_config(a);
  const auto b = parse_config(s);
  EXPECT_EQ(a, b);
  EXPECT_EQ(s, serialize_config(b));
  EXPECT_EQ(a.drive, Drive::RamzmLumped);
  EXPECT_EQ(a.matching, Matching::Transformer);
  EXPECT_EQ(b.optimize->theta_dc, (std::array<double, 2>{0.5, 3.0}));
}

TEST(Config, MixedAngleUnitsRejected) {
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_rad": 1.5, "theta_dc_pi": 1, "tau": 0.5}})")
                .find("mixed angle units"),
            std::string::npos);
  // an axis in the other unit counts too
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_pi": 0.5, "theta_dc_pi": 1, "tau": 0.5},
                            "sweep": {"axis1": {"param": "theta_dc_rad", "start": 0, "stop": 6, "count": 3}}})")
                .find("mixed"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"angle_unit": "rad", "modulator": {"v_pi": 5},
                            "bias": {"phi_bias_pi": 0.5, "theta_dc_pi": 1, "tau": 0.5}})")
                .find("angle_unit"),
            std::string::npos);
}

TEST(Config, StrictKeysAndTypes) {
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": 5}, "link": {"p_laser_dbm": 13, "gain": 1}})").find("link.gain"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": 5}, "extra": 1})").find("extra"), std::string::npos);
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": "five"}})").find("modulator.v_pi"), std::string::npos);
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": 5}, "link": {"p_laser_dbm": 13, "p_laser_w": 0.02}})")
                .find("p_laser"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": 5, "drive": "ramzm"}})").find("drive"), std::string::npos);
}

TEST(Config, RequiredFieldsNamed) {
  EXPECT_NE(config_error(R"({"modulator": {"insertion_loss_db": 10}})").find("modulator.v_pi"), std::string::npos);
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_pi": 0.5, "theta_dc_pi": 1}})").find("tau"),
            std::string::npos);
}

TEST(Config, ModelRangesBecomeConfigErrors) {
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_pi": 0.5, "theta_dc_pi": 1, "tau": 1.5}})")
                .find("tau"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": -1}})").find("v_pi"), std::string::npos);
  EXPECT_NE(config_error(R"({"modulator": {"v_pi": 5}, "analysis": {"matching": "transformer"}})")
                .find("transformer_turns"),
            std::string::npos);
}

TEST(Config, SyntaxErrorsCarryLineAndColumn) {
  const auto msg = config_error("{\n  \"modulator\": {\"v_pi\": 5,}\n}");
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(128.0), "128");
  EXPECT_EQ(format_number(-2.5e-20), "-2.5e-20");
  EXPECT_EQ(format_number(kInf), "inf");
  EXPECT_EQ(format_number(-kInf), "-inf");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  for (double v : {kPi, 1.0 / 3.0, 5.2825377132733715e-4, 1e-300, 6.02214076e23}) {
    const auto s = format_number(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v) << s;
  }
  EXPECT_EQ(json_number(kInf), "inf");
  EXPECT_EQ(json_number(2.0), 2.0);
}

TEST(Format, DisplayUnits) {
  EXPECT_NEAR(display_value(Metric::Gain, 0.01), -20.0, 1e-12);
  EXPECT_NEAR(display_value(Metric::IIP3, 1e-3), 0.0, 1e-12);
  EXPECT_EQ(display_value(Metric::IIP3, kInf), kInf);
  EXPECT_EQ(display_value(Metric::NF, 3.0), 3.0);
  EXPECT_EQ(display_value(Metric::Photocurrent, 1e-3), 1e-3);
  EXPECT_STREQ(display_unit(Metric::NoisePSD), "dBm/Hz");
}

TEST(Format, GridCsvShape) {
  SweepSpec s;
  s.axis1 = {SweepParam::ThetaDc, 0, kPi, 3, {}};
  s.axis2 = SweepAxis{SweepParam::Tau, 0.25, 0.75, 3, {}};
  s.metrics = {Metric::IIP3};
  const auto g = run_sweep(s);
  const auto csv = grid_csv(g, Metric::IIP3, "theta_dc_pi", {0, 0.5, 1}, "tau", {0.25, 0.5, 0.75});
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "theta_dc_pi\\tau,0.25,0.5,0.75");
  for (const auto& l : lines) EXPECT_EQ(std::count(l.begin(), l.end(), ','), 3);
  // (pi, 1/2) is the third-order null
  std::vector<std::string> last;
  std::istringstream ls(lines[3]);
  for (std::string c; std::getline(ls, c, ',');) last.push_back(c);
  ASSERT_EQ(last.size(), 4u);
  EXPECT_EQ(last[0], "1");
  EXPECT_EQ(last[2], "inf");
  EXPECT_NE(last[3], "inf");
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorKind::ConfigError), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::AlphaNotUnity), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::Infeasible), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::InvalidArgument), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::NotInSmallSignal), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::AliasError), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::StepTooSmall), 4);
}

TEST_F(CliDir, ReportGoldens) {
  CommandOptions opt;
  opt.format = "json";
  ASSERT_EQ(run("report", kMinimal, opt), 0) << err_.str();
  auto j = nlohmann::json::parse(slurp(dir_ / "out" / "report.json"));
  EXPECT_NEAR(j["metrics"]["sfdr_db"].get<double>(), 128.16, 1.5);
  EXPECT_EQ(j["metrics"]["limiting_order"], "fifth");
  EXPECT_EQ(j["metrics"]["iip3_dbm"], "inf");
  EXPECT_NEAR(j["metrics"]["gain_db"].get<double>(), -32.771573937346071, 1e-9);
  opt.modulator = "mzm-single";
  ASSERT_EQ(run("report", kMinimal, opt), 0) << err_.str();
  j = nlohmann::json::parse(slurp(dir_ / "out" / "report.json"));
  EXPECT_NEAR(j["metrics"]["sfdr_db"].get<double>(), 109.94, 1.0);
  EXPECT_EQ(j["drive"], "mzm-single");
}

TEST_F(CliDir, ReportCsvIsKeyValue) {
  ASSERT_EQ(run("report", kMinimal), 0) << err_.str();
  const auto rows = read_csv(dir_ / "out" / "report.csv");
  ASSERT_GT(rows.size(), 10u);
  bool found = false;
  for (const auto& r : rows) {
    ASSERT_EQ(r.size(), 2u);
    if (r[0] == "nf_db") found = std::fabs(std::stod(r[1]) - 41.82573853000148) < 1e-9;
  }
  EXPECT_TRUE(found);
}

TEST_F(CliDir, SweepWritesOneCsvPerMetric) {
  const std::string cfg = R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_pi": 0.5, "theta_dc_pi": 1, "tau": 0.5},
    "sweep": {"axis1": {"param": "theta_dc_pi", "start": 0, "stop": 1, "count": 3},
              "axis2": {"param": "tau", "start": 0.25, "stop": 0.75, "count": 3}}})";
  ASSERT_EQ(run("sweep", cfg), 0) << err_.str();
  for (const char* m : {"gain", "nf", "sfdr"}) {
    const auto rows = read_csv(dir_ / "out" / (std::string("sweep_") + m + ".csv"));
    ASSERT_EQ(rows.size(), 4u) << m;
    for (const auto& r : rows) EXPECT_EQ(r.size(), 4u) << m;
    EXPECT_EQ(rows[0][0], "theta_dc_pi\\tau");
    EXPECT_EQ(rows[3][0], "1");
  }
  // (pi, 1/2) holds the largest SFDR of this little grid
  const auto sfdr = read_csv(dir_ / "out" / "sweep_sfdr.csv");
  double best = -kInf;
  std::pair<int, int> at;
  for (int i = 1; i <= 3; ++i)
    for (int k = 1; k <= 3; ++k)
      if (std::stod(sfdr[i][k]) > best) best = std::stod(sfdr[i][k]), at = {i, k};
  EXPECT_EQ(at, std::make_pair(3, 2));
  CommandOptions opt;
  opt.metrics = {"iip3"};
  ASSERT_EQ(run("sweep", cfg, opt), 0);
  EXPECT_EQ(read_csv(dir_ / "out" / "sweep_iip3.csv")[3][2], "inf");
}

TEST_F(CliDir, SweepJson) {
  const std::string cfg = R"({"modulator": {"v_pi": 5},
    "sweep": {"axis1": {"param": "p_laser_dbm", "start": 10, "stop": 20, "count": 2}, "metrics": ["gain"],
              "timestamp": "fixed"}})";
  CommandOptions opt;
  opt.format = "json";
  ASSERT_EQ(run("sweep", cfg, opt), 0) << err_.str();
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "sweep.json"));
  EXPECT_EQ(j["timestamp"], "fixed");
  EXPECT_EQ(j["axis1"]["values"], nlohmann::json::array({10.0, 20.0}));
  const auto& v = j["data"]["gain"]["values"];
  EXPECT_NEAR(v[1][0].get<double>() - v[0][0].get<double>(), 20.0, 1e-9);  // gain goes as P_I^2
}

TEST_F(CliDir, TwoToneGainEnhancedIntercept) {
  const std::string cfg = R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_pi": 0.5, "theta_dc_pi": 0, "tau": 0.5},
    "two_tone": {"p_in_start_dbm": -60, "p_in_stop_dbm": -30, "points": 7}})";
  ASSERT_EQ(run("two-tone", cfg), 0) << err_.str();
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "two_tone_intercepts.json"));
  EXPECT_NEAR(j["iip3_fit_dbm"].get<double>(), 7.05, 0.1);
  EXPECT_NEAR(j["iip3_model_dbm"].get<double>(), 7.046702589477511, 1e-9);
  EXPECT_FALSE(j["third_order_null"].get<bool>());
  EXPECT_EQ(read_csv(dir_ / "out" / "two_tone.csv")[0],
            (std::vector<std::string>{"p_in_dbm", "fund_dbm", "im2_dbm", "im3_dbm", "im5_dbm"}));
}

TEST_F(CliDir, TwoToneMzmThirdOrderSlope) {
  const std::string cfg = R"({"modulator": {"v_pi": 5, "drive": "mzm-single"},
    "two_tone": {"p_in_start_dbm": -60, "p_in_stop_dbm": -30, "points": 7}})";
  ASSERT_EQ(run("two-tone", cfg), 0) << err_.str();
  const auto rows = read_csv(dir_ / "out" / "two_tone.csv");
  ASSERT_EQ(rows.size(), 8u);
  const double slope = (std::stod(rows[7][3]) - std::stod(rows[1][3])) / (std::stod(rows[7][0]) - std::stod(rows[1][0]));
  EXPECT_NEAR(slope, 3.0, 0.01);
}

TEST_F(CliDir, TwoToneLinearizedNull) {
  const std::string cfg = R"({"modulator": {"v_pi": 5},
    "two_tone": {"p_in_start_dbm": -40, "p_in_stop_dbm": -25, "points": 6}})";
  ASSERT_EQ(run("two-tone", cfg), 0) << err_.str();
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "two_tone_intercepts.json"));
  EXPECT_TRUE(j["third_order_null"].get<bool>());
  EXPECT_EQ(j["iip3_fit_dbm"], "inf");
  EXPECT_NEAR(j["iip5_fit_dbm"].get<double>(), 21.879087418759193, 0.1);
  const auto rows = read_csv(dir_ / "out" / "two_tone.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    // IM3 bin holds only fifth-order growth; IM5 at 3f1 - 2f2 is finite
    EXPECT_LT(std::stod(rows[i][3]) - std::stod(rows[i][1]), -100.0);
    EXPECT_TRUE(std::isfinite(std::stod(rows[i][4])));
  }
}

TEST_F(CliDir, OracleFailureIsExitFour) {
  const std::string cfg = R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_pi": 0.5, "theta_dc_pi": 0, "tau": 0.5},
    "two_tone": {"p_in_start_dbm": -10, "p_in_stop_dbm": 10, "points": 5}})";
  EXPECT_EQ(run("two-tone", cfg), 4);
  EXPECT_NE(err_.str().find("NotInSmallSignal"), std::string::npos);
  EXPECT_NE(err_.str().find("passes"), std::string::npos) << err_.str();
}

TEST_F(CliDir, LossyRingsNeedNumeric) {
  const std::string cfg =
      R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_pi": 0.5, "theta_dc_pi": 0.6, "tau": 0.7, "alpha": 0.97}})";
  EXPECT_EQ(run("report", cfg), 3);
  EXPECT_NE(err_.str().find("--numeric"), std::string::npos);
  CommandOptions opt;
  opt.numeric = true;
  EXPECT_EQ(run("report", cfg, opt), 0) << err_.str();
}

TEST_F(CliDir, ConfigFailuresAreExitTwo) {
  EXPECT_EQ(run("report", R"({"modulator": {}})"), 2);
  EXPECT_NE(err_.str().find("v_pi"), std::string::npos);
  EXPECT_EQ(run("sweep", kMinimal), 2);
  EXPECT_NE(err_.str().find("sweep"), std::string::npos);
  CommandOptions opt;
  opt.format = "xml";
  EXPECT_EQ(run("report", kMinimal, opt), 2);
  opt = {};
  opt.modulator = "laser";
  EXPECT_EQ(run("report", kMinimal, opt), 2);
}

TEST_F(CliDir, OptimizeGainObjective) {
  const std::string cfg = R"({"modulator": {"v_pi": 5},
    "optimize": {"objective": "max-gain", "phi_bias_pi": [0.5, 0.5]}})";
  CommandOptions opt;
  opt.format = "json";
  ASSERT_EQ(run("optimize", cfg, opt), 0) << err_.str();
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "optimize.json"));
  EXPECT_EQ(j["bias_pi"]["theta_dc_pi"].get<double>(), 0.0);
  EXPECT_EQ(j["bias_pi"]["tau"].get<double>(), 0.95);
  EXPECT_EQ(j["objective"], "max-gain");
  EXPECT_EQ(run("optimize", R"({"modulator": {"v_pi": 5}, "optimize": {"objective": "max-gain", "min_gain_db": 60}})"),
            3);
  EXPECT_NE(err_.str().find("Infeasible"), std::string::npos);
}

TEST_F(CliDir, NullBiasCurve) {
  ASSERT_EQ(run("null-bias", kMinimal), 0) << err_.str();
  const auto curve = read_csv(dir_ / "out" / "null_bias_curve.csv");
  ASSERT_EQ(curve.size(), 22u);
  double g25 = 0, g30 = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double dbm = std::stod(curve[i][0]);
    EXPECT_EQ(curve[i][4], dbm >= 21.5 ? "1" : "0") << dbm;
    if (dbm == 25) g25 = std::stod(curve[i][2]);
    if (dbm == 30) g30 = std::stod(curve[i][2]);
  }
  EXPECT_GT(g30 - g25, 6.0);
  const auto grid = read_csv(dir_ / "out" / "null_bias_gain.csv");
  EXPECT_EQ(grid.size(), 52u);
  EXPECT_EQ(grid[0].size(), 22u);
}

TEST_F(CliDir, BinaryExitCodes) {
  const std::string cli = RAMZM_CLI_PATH;
  const auto good = write_config(kMinimal);
  const auto out = (dir_ / "bin").string();
  EXPECT_EQ(shell(cli + " report --config " + good.string() + " --out " + out), 0);
  EXPECT_TRUE(fs::exists(dir_ / "bin" / "report.csv"));
  EXPECT_EQ(shell(cli + " report --config " + good.string() + " --out " + out + " --format json"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "bin" / "report.json"));
  EXPECT_EQ(shell(cli + " report --config " + good.string() + " --format yaml"), 2);
  EXPECT_EQ(shell(cli + " report --config " + (dir_ / "missing.json").string()), 2);
  EXPECT_EQ(shell(cli + " frobnicate"), 2);
  const auto bad = dir_ / "bad.json";
  std::ofstream(bad) << R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_rad": 1, "theta_dc_pi": 1, "tau": 0.5}})";
  EXPECT_EQ(shell(cli + " report --config " + bad.string()), 2);
  const auto lossy = dir_ / "lossy.json";
  std::ofstream(lossy) << R"({"modulator": {"v_pi": 5}, "bias": {"phi_bias_pi": 0.5, "theta_dc_pi": 1, "tau": 0.5, "alpha": 0.9}})";
  EXPECT_EQ(shell(cli + " report --config " + lossy.string() + " --out " + out), 3);
  EXPECT_EQ(shell(cli + " report --numeric --config " + lossy.string() + " --out " + out), 0);
}
