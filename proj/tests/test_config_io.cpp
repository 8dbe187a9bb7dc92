#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "optomech/config.hpp"
#include "optomech/csv.hpp"
#include "optomech/pipelines.hpp"

using namespace optomech;

namespace {

const std::string kDefaultConfig = std::string(OPTOMECH_DATA_DIR) + "/default.cfg";

const char* kMinimal =
    "kappa_T_Hz = 13.4e6\n"
    "kappa_R_Hz = 0.6e6\n"
    "kappa_L_Hz = 0\n"
    "detuning_Hz = -1.8e6\n"
    "n_cav = 27e6\n"
    "eta_d = 0.8\n"
    "g0_Hz = 115\n"
    "omega_m_Hz = 1928e3\n"
    "gamma_m_Hz = 0.17\n"
    "temperature_K = 10\n";

template <class F>
ConfigError capture(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ConfigError";
  return ConfigError("none");
}

}  // namespace

TEST(Config, ShippedFileEqualsBuiltInDefaults) {
  const RunConfig file = load_config(kDefaultConfig);
  EXPECT_EQ(serialize(file), serialize(RunConfig{}));
  EXPECT_EQ(config_hash(file), config_hash(RunConfig{}));
}

TEST(Config, MinimalFileFillsOptionalKeys) {
  const RunConfig c = parse_config(std::string(kMinimal));
  EXPECT_DOUBLE_EQ(c.kappa_T_Hz, 13.4e6);
  ASSERT_TRUE(c.g_Hz.has_value());
  EXPECT_DOUBLE_EQ(*c.g_Hz, 580e3);
  EXPECT_EQ(c.filter_points, 601);
}

TEST(Config, SerializationRoundTrips) {
  RunConfig c;
  c.detuning_Hz = -0.7e6;
  c.g_Hz.reset();
  c.spectrum_f_min_Hz = 1.5e6;
  c.spectrum_f_max_Hz = 2.5e6;
  c.localize_refine = true;
  const RunConfig back = parse_config(serialize(c));
  EXPECT_EQ(serialize(back), serialize(c));
  EXPECT_FALSE(back.g_Hz.has_value());
  EXPECT_NE(config_hash(back), config_hash(RunConfig{}));
}

TEST(Config, MissingRequiredKeyNamed) {
  std::string text = kMinimal;
  text.erase(text.find("n_cav"), std::string("n_cav = 27e6\n").size());
  const auto e = capture([&] { parse_config(text); });
  EXPECT_EQ(e.field(), "n_cav");
  EXPECT_NE(std::string(e.what()).find("n_cav"), std::string::npos);
}

TEST(Config, OutOfRangeValueReportsLine) {
  std::string text = kMinimal;
  text.replace(text.find("eta_d = 0.8"), 11, "eta_d = 1.2");
  const auto e = capture([&] { parse_config(text); });
  EXPECT_EQ(e.field(), "eta_d");
  EXPECT_EQ(e.line(), 6);
  EXPECT_EQ(std::string(e.what()).rfind("line 6:", 0), 0u);
}

TEST(Config, UnknownAndDuplicateKeys) {
  const auto unknown = capture([&] { parse_config(std::string(kMinimal) + "kapa_T_Hz = 1\n"); });
  EXPECT_EQ(unknown.line(), 11);
  EXPECT_EQ(unknown.field(), "kapa_T_Hz");
  const auto dup = capture([&] { parse_config(std::string(kMinimal) + "eta_d = 0.7\n"); });
  EXPECT_EQ(dup.line(), 11);
}

TEST(Config, MalformedLinesAndValues) {
  EXPECT_THROW(parse_config(std::string(kMinimal) + "just words\n"), ConfigError);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "mode_i = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "eta_d2 = x\n"), ConfigError);
  std::string bad = kMinimal;
  bad.replace(bad.find("n_cav = 27e6"), 12, "n_cav = 27e6x");
  EXPECT_THROW(parse_config(bad), ConfigError);
}

TEST(Config, CrossFieldChecks) {
  RunConfig c;
  c.membrane_position_m = 2e-3;
  EXPECT_THROW(validate(c), ConfigError);
  c = RunConfig{};
  c.spectrum_f_min_Hz = 1e6;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, OverridesUseTheSameChecks) {
  RunConfig c;
  apply_override(c, "detuning_Hz", "-1.0e6");
  EXPECT_DOUBLE_EQ(c.detuning_Hz, -1.0e6);
  apply_override(c, "g_Hz", "auto");
  EXPECT_FALSE(c.g_Hz.has_value());
  EXPECT_THROW(apply_override(c, "eta_d", "1.5"), ConfigError);
  EXPECT_THROW(apply_override(c, "nope", "1"), ConfigError);
}

TEST(Config, ParameterConversion) {
  const SystemParams p = system_params(RunConfig{});
  EXPECT_NEAR(p.optics.kappa(), to_angular(14e6), 1e-3);
  EXPECT_NEAR(p.mode.coupling(p.optics.n_cav), to_angular(580e3), 1e-6);
  RunConfig c;
  c.g_Hz.reset();
  EXPECT_NEAR(to_hz(system_params(c).mode.coupling(27e6)), 115.0 * std::sqrt(27e6), 1e-6);
}

TEST(Csv, MetadataHeaderAndRows) {
  CsvTable t = make_table(RunConfig{}, {"a", "b"});
  t.add_row({1.5, -2e-7});
  const std::string s = t.str();
  EXPECT_NE(s.find("# tool = optomech 1.0.0"), std::string::npos);
  EXPECT_NE(s.find("# config_hash = " + config_hash_hex(RunConfig{})), std::string::npos);
  EXPECT_NE(s.find("\na,b\n1.5,-2e-07\n"), std::string::npos);
  EXPECT_THROW(t.add_row({1.0}), Error);
}

TEST(Csv, DeterministicAcrossRuns) {
  RunConfig c;
  c.filter_points = 21;
  EXPECT_EQ(run_entangle(c).table.str(), run_entangle(c).table.str());
}

TEST(Csv, CouplingFileRoundTrip) {
  RunConfig c;
  const auto data = synthetic_dataset(c);
  std::istringstream in(couplings_table(c, data).str());
  const auto back = read_couplings(in);
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t n = 0; n < data.size(); ++n) {
    EXPECT_EQ(back[n].index_i, data[n].index_i);
    EXPECT_NEAR(back[n].g_meas, data[n].g_meas, 1e-10 * data[n].g_meas + 1e-300);
    EXPECT_NEAR(back[n].omega_m, data[n].omega_m, 1e-10 * data[n].omega_m);
  }
}

TEST(Csv, CouplingFileErrors) {
  std::istringstream no_header("1,1,1e6,1\n");
  EXPECT_THROW(read_couplings(no_header), ConfigError);
  std::istringstream bad_index("i,j,omega_m_Hz,g_Hz\n1.5,1,1e6,1\n");
  EXPECT_THROW(read_couplings(bad_index), ConfigError);
  std::istringstream short_row("i,j,omega_m_Hz,g_Hz\n1,1,1e6\n");
  const auto e = capture([&] { read_couplings(short_row); });
  EXPECT_EQ(e.line(), 2);
}
