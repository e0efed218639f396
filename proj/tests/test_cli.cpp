#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "run.hpp"

namespace fs = std::filesystem;
using namespace sta::cli;

namespace {

fs::path scratch_dir() {
  const auto d = fs::temp_directory_path() / ("sta_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int call(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = main_entry(args, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

}  // namespace

TEST(CliConfig, DefaultsFilled) {
  const auto c = parse_config({"iontrap", "--a", "2", "--tau", "1"});
  EXPECT_EQ(c.subcommand, Subcommand::IonTrap);
  ASSERT_EQ(c.a.size(), 1u);
  EXPECT_EQ(c.a[0], 2.0);
  EXPECT_EQ(c.tau, 1.0);
  EXPECT_EQ(c.steps, 4000);
  EXPECT_EQ(c.iontrap.p_points, 129);
  EXPECT_EQ(c.iontrap.sigma_p, 0.05);
  EXPECT_EQ(c.iontrap.mode, "incoherent");
  EXPECT_EQ(c.format, "csv");
  const auto d = parse_config({"iontrap"});
  EXPECT_EQ(d.a, (std::vector<double>{1.0, 2.0, 4.0}));
  const auto g = parse_config({"gauge-check"});
  EXPECT_EQ(g.a, (std::vector<double>{2.0, 4.0}));
  EXPECT_EQ(g.gauge.p, (std::vector<double>{-1.0, 0.0, 1.0}));
}

TEST(CliConfig, RepeatedA) {
  const auto c = parse_config({"iontrap", "--a", "1", "--a", "2", "--a", "4"});
  EXPECT_EQ(c.a, (std::vector<double>{1.0, 2.0, 4.0}));
}

TEST(CliConfig, ValidationNamesKey) {
  try {
    parse_config({"iontrap", "--a", "0.5"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "a");
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
  }
  try {
    parse_config({"floquet", "--V1", "1"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "ell");
  }
  try {
    parse_config({"iontrap", "--tau", "-1"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "tau");
  }
  EXPECT_THROW(parse_config({"iontrap", "--format", "xml"}), ConfigError);
  EXPECT_THROW(parse_config({"iontrap", "--bogus", "1"}), ConfigError);
  EXPECT_THROW(parse_config({"nosuch"}), ConfigError);
  EXPECT_THROW(parse_config({}), ConfigError);
  EXPECT_THROW(parse_config({"floquet", "--scan", "--pump"}), ConfigError);
  EXPECT_EQ(call({"iontrap", "--a", "0.5"}), 2);
}

TEST(CliConfig, FileThenFlagPrecedence) {
  const auto dir = scratch_dir();
  const auto path = dir / "cfg.json";
  std::ofstream(path) << R"({"a": [2, 4], "tau": 3.5, "steps": 100, "sigma_p": 0.04})";
  const auto c = parse_config({"iontrap", "--config", path.string(), "--tau", "2"});
  EXPECT_EQ(c.tau, 2.0);
  EXPECT_EQ(c.steps, 100);
  EXPECT_EQ(c.iontrap.sigma_p, 0.04);
  EXPECT_EQ(c.a, (std::vector<double>{2.0, 4.0}));
  const auto d = parse_config({"iontrap", "--config", path.string(), "--a", "1"});
  EXPECT_EQ(d.a, (std::vector<double>{1.0}));
  EXPECT_EQ(d.tau, 3.5);

  std::ofstream(dir / "task.json") << R"({"scan": true, "scan_points": 3})";
  const auto f = parse_config({"floquet", "--config", (dir / "task.json").string()});
  EXPECT_EQ(f.floquet.task, "scan");
  EXPECT_EQ(f.floquet.scan_points, 3);
  const auto g = parse_config({"floquet", "--config", (dir / "task.json").string(), "--pump"});
  EXPECT_EQ(g.floquet.task, "pump");
  fs::remove_all(dir);
}

TEST(CliConfig, FileErrors) {
  const auto dir = scratch_dir();
  std::ofstream(dir / "unknown.json") << R"({"tau": 1, "colour": "red"})";
  try {
    parse_config({"iontrap", "--config", (dir / "unknown.json").string()});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "colour");
  }
  std::ofstream(dir / "broken.json") << "{tau: ";
  EXPECT_THROW(parse_config({"iontrap", "--config", (dir / "broken.json").string()}), ConfigError);
  std::ofstream(dir / "bad.json") << R"({"a": 0.25})";
  try {
    parse_config({"iontrap", "--config", (dir / "bad.json").string()});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "a");
  }
  EXPECT_THROW(parse_config({"iontrap", "--config", (dir / "missing.json").string()}), ConfigError);
  EXPECT_EQ(call({"iontrap", "--config", (dir / "missing.json").string()}), 2);
  fs::remove_all(dir);
}

TEST(CliRun, IontrapCsvLayout) {
  std::string out;
  ASSERT_EQ(call({"iontrap", "--a", "2", "--times", "3", "--steps", "200", "--p-points", "9"}, &out), 0);
  EXPECT_EQ(out.substr(0, out.find('\n')), "t,F_i,F_f");
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 4);
  EXPECT_EQ(out.find('\r'), std::string::npos);
  ASSERT_EQ(call({"iontrap", "--a", "1", "--a", "2", "--times", "3", "--steps", "200", "--p-points", "9"}, &out), 0);
  EXPECT_EQ(out.substr(0, out.find('\n')), "a,t,F_i,F_f");
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 7);
}

TEST(CliRun, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(1e-20), "9.9999999999999995e-21");
}

TEST(CliRun, GaugeCheckJson) {
  const auto dir = scratch_dir();
  const std::string prefix = (dir / "gauge").string();
  ASSERT_EQ(call({"gauge-check", "--a", "2", "--out", prefix, "--format", "json"}), 0);
  const auto j = nlohmann::json::parse(slurp(prefix + ".json"));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["pass"], true);
  EXPECT_LE(j["results"]["reports"][0]["max_deviation"].get<double>(), 1e-6);
  EXPECT_LE(j["results"]["reports"][0]["sigma_z_drift"].get<double>(), 1e-12);
  EXPECT_EQ(j["config"]["a"][0], 2.0);
  EXPECT_FALSE(fs::exists(prefix + ".json.tmp"));
  fs::remove_all(dir);
}

TEST(CliRun, FloquetEquivalence) {
  std::string out;
  ASSERT_EQ(call({"floquet", "--equivalence", "--a", "4", "--format", "json", "--T0", "1",
                  "--k", "1.6", "--phi-y", "1.7"},
                 &out),
            0);
  const auto j = nlohmann::json::parse(out);
  EXPECT_LE(j["results"]["reports"][0]["deviation"].get<double>(), 1e-8);
}

TEST(CliRun, FloquetScan) {
  std::string out;
  ASSERT_EQ(call({"floquet", "--scan", "--scan-points", "5", "--steps", "400"}, &out), 0);
  EXPECT_EQ(out.substr(0, out.find('\n')), "k,phi_y,phi_z,E1,E2");
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 6);
}

TEST(CliRun, AppendixOutputs) {
  std::string out;
  ASSERT_EQ(call({"appendix", "--mode", "classical", "--steps", "100"}, &out), 0);
  EXPECT_EQ(out.substr(0, out.find('\n')), "t,x,p,xbar,pbar,deviation");
  ASSERT_EQ(call({"appendix", "--mode", "coeffs", "--samples", "4"}, &out), 0);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 5);
  ASSERT_EQ(call({"rescale-info", "--a", "2", "--samples", "3"}, &out), 0);
  std::istringstream lines(out);
  std::string line;
  std::vector<std::string> all;
  while (std::getline(lines, line)) all.push_back(line);
  ASSERT_EQ(all.size(), 4u);
  EXPECT_EQ(all[0], "t,f,fdot,fddot,fdddot");
  EXPECT_EQ(all[1].rfind("0,0,1,0,", 0), 0u);
  EXPECT_EQ(all[2].rfind("0.25,0.5,3,", 0), 0u);
  EXPECT_EQ(all[3].rfind("0.5,1,1,", 0), 0u);
}

TEST(CliRun, ToleranceFailureExitCode) {
  // Two steps cannot resolve the classical trajectories.
  EXPECT_EQ(call({"appendix", "--steps", "2", "--potential", "quartic"}), 3);
}

TEST(CliRun, IoErrorRemovesPartialFiles) {
  const auto dir = scratch_dir();
  const auto prefix = dir / "gone" / "out";
  EXPECT_EQ(call({"rescale-info", "--out", prefix.string()}), 4);
  EXPECT_FALSE(fs::exists(prefix.string() + ".csv"));
  // The second file cannot be moved into place: the first must be removed again.
  const auto p2 = dir / "part";
  fs::create_directories(p2.string() + ".json");
  EXPECT_EQ(call({"rescale-info", "--out", p2.string()}), 4);
  EXPECT_FALSE(fs::exists(p2.string() + ".csv"));
  EXPECT_FALSE(fs::exists(p2.string() + ".csv.tmp"));
  fs::remove_all(dir);
}

TEST(CliRun, RepeatedRunsByteIdentical) {
  const auto dir = scratch_dir();
  for (const std::vector<std::string>& base :
       {std::vector<std::string>{"iontrap", "--times", "5", "--steps", "500", "--threads", "4"},
        std::vector<std::string>{"floquet", "--pump", "--scan-points", "8", "--steps", "300"},
        std::vector<std::string>{"appendix", "--potential", "quartic", "--steps", "200"}}) {
    auto a1 = base;
    a1.insert(a1.end(), {"--out", (dir / "r1").string()});
    auto a2 = base;
    a2.insert(a2.end(), {"--out", (dir / "r1").string()});
    ASSERT_EQ(call(a1), 0);
    const std::string csv1 = slurp(dir / "r1.csv");
    const std::string js1 = slurp(dir / "r1.json");
    ASSERT_EQ(call(a2), 0);
    EXPECT_EQ(csv1, slurp(dir / "r1.csv"));
    EXPECT_EQ(js1, slurp(dir / "r1.json"));
  }
  fs::remove_all(dir);
}

TEST(CliRun, BinaryHelpAndExitCodes) {
  const std::string bin = STA_CLI_PATH;
  EXPECT_EQ(std::system((bin + " --help > /dev/null").c_str()), 0);
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " iontrap --a 0.5 2> /dev/null").c_str())), 2);
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " rescale-info --samples 3 > /dev/null").c_str())), 0);
}
