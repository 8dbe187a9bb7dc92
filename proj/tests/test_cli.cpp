#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct CliResult {
  int status = -1;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(OPTOMECH_CLI_PATH) + " " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "optomech_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

const std::string kConfig = std::string("-c ") + OPTOMECH_DATA_DIR + "/default.cfg";

}  // namespace

TEST(Cli, VersionAndHelp) {
  const CliResult v = run("--version");
  EXPECT_EQ(v.status, 0);
  EXPECT_NE(v.out.find("optomech 1.0.0"), std::string::npos);
  EXPECT_EQ(run("--help").status, 0);
}

TEST(Cli, SpectrumWritesCsvAndSidecar) {
  const auto csv = scratch("spectrum.csv");
  const CliResult r = run("spectrum " + kConfig + " --spectrum_points=201 -o " + csv.string());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("summary:"), std::string::npos);
  EXPECT_NE(r.out.find("Gamma_opt_Hz="), std::string::npos);
  std::ifstream in(csv);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(content.find("omega_Hz,S_out,S_meas,S_bound"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(csv.string() + ".json"));
}

TEST(Cli, EntangleToStdout) {
  const CliResult r = run("entangle --filter_points=11");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("delta_prime_Hz,E_N"), std::string::npos);
  EXPECT_NE(r.out.find("log_base=e"), std::string::npos);
}

TEST(Cli, LocalizeSyntheticAndFromFile) {
  const auto csv = scratch("couplings.csv");
  std::ofstream(csv) << "# measured\ni,j,omega_m_Hz,g_Hz\n1,1,757000,310000\n2,1,1200000,150000\n1,2,1190000,220000\n"
                        "2,2,1510000,70000\n3,1,1690000,40000\n";
  EXPECT_EQ(run("localize --synthetic --localize_nx=30 --localize_ny=30 -o " + scratch("m.csv").string()).status, 0);
  const CliResult r = run("localize -d " + csv.string() + " --localize_nx=30 --localize_ny=30 -o " +
                    scratch("m2.csv").string());
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("x0_m="), std::string::npos);
}

TEST(Cli, ConfigErrorsExitWithTwo) {
  const auto bad = scratch("bad.cfg");
  std::ofstream(bad) << "eta_d = 1.2\n";
  const CliResult r = run("spectrum -c " + bad.string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("line 1"), std::string::npos);
  EXPECT_EQ(run("spectrum --eta_d=2").status, 2);
  EXPECT_EQ(run("spectrum --no_such_key=1").status, 2);
  EXPECT_EQ(run("spectrum -c /nonexistent/file.cfg").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("localize").status, 2);
}

TEST(Cli, InsufficientDataExitsWithTwo) {
  const auto csv = scratch("two.csv");
  std::ofstream(csv) << "i,j,omega_m_Hz,g_Hz\n1,1,757000,310000\n2,1,1200000,150000\n";
  EXPECT_EQ(run("localize -d " + csv.string()).status, 2);
}

TEST(Cli, NumericalFailureExitsWithThree) {
  // Blue detuning with this coupling has no steady state.
  const CliResult r = run("spectrum --detuning_Hz=1.8e6 --spectrum_f_min_Hz=1.5e6 --spectrum_f_max_Hz=2.5e6");
  EXPECT_EQ(r.status, 3) << r.out;
  EXPECT_NE(r.out.find("unstable"), std::string::npos);
}

TEST(Cli, ReproduceWritesFigureData) {
  const auto dir = scratch("repro");
  std::filesystem::remove_all(dir);
  const CliResult r = run("reproduce entangle --filter_points=21 --outdir " + dir.string());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "entanglement.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "entangle_summary.txt"));
}
