#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "optomech/constants.hpp"
#include "optomech/entanglement.hpp"
#include "optomech/errors.hpp"
#include "optomech/params.hpp"
#include "optomech/transfer_matrix.hpp"

namespace optomech {

/// Everything a run needs. Frequencies are in Hz here and converted on use.
struct RunConfig {
  // optics
  double kappa_T_Hz = 13.4e6;
  double kappa_R_Hz = 0.6e6;
  double kappa_L_Hz = 0.0;
  double detuning_Hz = -1.8e6;
  double n_cav = 27e6;
  double eta_d = 0.80;
  double wavelength_m = 799.877e-9;
  // mechanics
  double g0_Hz = 115.0;
  std::optional<double> g_Hz = 580e3;  // measured light-enhanced coupling; unset means g0 sqrt(n_cav)
  double omega_m_Hz = 1928e3;
  double gamma_m_Hz = 0.170;
  double mass_kg = 62e-12;
  int mode_i = 3;
  int mode_j = 2;
  double temperature_K = 10.0;
  bool exact_occupation = false;
  // adjusted squeezing model
  double outcoupling_fit = 0.8;
  double mirror_noise = 0.25;
  // cavity stack
  double cavity_length_m = 1.7e-3;
  double membrane_position_m = 0.85e-3;
  double membrane_thickness_m = 60e-9;
  double membrane_index = 2.0;
  int sweep_points = 200;
  double points_per_fsr = 1e4;
  // membrane geometry and beam
  double membrane_Lx_m = 540.736e-6;  // 0.994 L_y
  double membrane_Ly_m = 544e-6;
  double tension_Pa = 1.0406e9;
  double density_kg_m3 = 3100.0;
  double beam_waist_m = 39e-6;
  double beam_x_m = 162.2208e-6;
  double beam_y_m = 108.8e-6;
  // spectra
  int spectrum_points = 4001;
  std::optional<double> spectrum_f_min_Hz;  // unset: +-10 effective linewidths
  std::optional<double> spectrum_f_max_Hz;
  bool adjusted_model = false;  // use outcoupling_fit and mirror_noise for S_meas
  // entanglement
  double filter_kappa_Hz = 0.2e6;
  std::optional<double> filter_eta;  // unset: ideal detection, outcoupling_fit
  double filter_delta_min_Hz = -3e6;
  double filter_delta_max_Hz = 3e6;
  int filter_points = 601;
  // localization
  int localize_nx = 200;
  int localize_ny = 200;
  bool localize_refine = false;
  int synthetic_max_index = 6;
  double synthetic_noise = 0.05;
  int synthetic_seed = 1;
};

namespace config_detail {

using Member = std::variant<double RunConfig::*, int RunConfig::*, bool RunConfig::*,
                            std::optional<double> RunConfig::*>;

struct FieldSpec {
  std::string_view name;
  Member member;
  bool required = false;
  double lo = -1e308;
  double hi = 1e308;
  bool lo_open = false;  // exclusive lower bound
};

constexpr double kInf = 1e308;

inline const std::vector<FieldSpec>& fields() {
  using R = RunConfig;
  static const std::vector<FieldSpec> table = {
      {"kappa_T_Hz", &R::kappa_T_Hz, true, 0.0, kInf},
      {"kappa_R_Hz", &R::kappa_R_Hz, true, 0.0, kInf},
      {"kappa_L_Hz", &R::kappa_L_Hz, true, 0.0, kInf},
      {"detuning_Hz", &R::detuning_Hz, true, -kInf, kInf},
      {"n_cav", &R::n_cav, true, 0.0, kInf},
      {"eta_d", &R::eta_d, true, 0.0, 1.0},
      {"wavelength_m", &R::wavelength_m, false, 0.0, kInf, true},
      {"g0_Hz", &R::g0_Hz, true, 0.0, kInf},
      {"g_Hz", &R::g_Hz, false, 0.0, kInf},
      {"omega_m_Hz", &R::omega_m_Hz, true, 0.0, kInf, true},
      {"gamma_m_Hz", &R::gamma_m_Hz, true, 0.0, kInf, true},
      {"mass_kg", &R::mass_kg, false, 0.0, kInf, true},
      {"mode_i", &R::mode_i, false, 1.0, 1000.0},
      {"mode_j", &R::mode_j, false, 1.0, 1000.0},
      {"temperature_K", &R::temperature_K, true, 0.0, kInf, true},
      {"exact_occupation", &R::exact_occupation},
      {"outcoupling_fit", &R::outcoupling_fit, false, 0.0, 1.0},
      {"mirror_noise", &R::mirror_noise, false, 0.0, kInf},
      {"cavity_length_m", &R::cavity_length_m, false, 0.0, kInf, true},
      {"membrane_position_m", &R::membrane_position_m, false, 0.0, kInf, true},
      {"membrane_thickness_m", &R::membrane_thickness_m, false, 0.0, kInf},
      {"membrane_index", &R::membrane_index, false, 1.0, kInf},
      {"sweep_points", &R::sweep_points, false, 2.0, 1e6},
      {"points_per_fsr", &R::points_per_fsr, false, 10.0, 1e7},
      {"membrane_Lx_m", &R::membrane_Lx_m, false, 0.0, kInf, true},
      {"membrane_Ly_m", &R::membrane_Ly_m, false, 0.0, kInf, true},
      {"tension_Pa", &R::tension_Pa, false, 0.0, kInf, true},
      {"density_kg_m3", &R::density_kg_m3, false, 0.0, kInf, true},
      {"beam_waist_m", &R::beam_waist_m, false, 0.0, kInf, true},
      {"beam_x_m", &R::beam_x_m, false, 0.0, kInf},
      {"beam_y_m", &R::beam_y_m, false, 0.0, kInf},
      {"spectrum_points", &R::spectrum_points, false, 2.0, 1e7},
      {"spectrum_f_min_Hz", &R::spectrum_f_min_Hz, false, 0.0, kInf},
      {"spectrum_f_max_Hz", &R::spectrum_f_max_Hz, false, 0.0, kInf, true},
      {"adjusted_model", &R::adjusted_model},
      {"filter_kappa_Hz", &R::filter_kappa_Hz, false, 0.0, kInf, true},
      {"filter_eta", &R::filter_eta, false, 0.0, 1.0},
      {"filter_delta_min_Hz", &R::filter_delta_min_Hz, false, -kInf, kInf},
      {"filter_delta_max_Hz", &R::filter_delta_max_Hz, false, -kInf, kInf},
      {"filter_points", &R::filter_points, false, 2.0, 1e6},
      {"localize_nx", &R::localize_nx, false, 2.0, 1e5},
      {"localize_ny", &R::localize_ny, false, 2.0, 1e5},
      {"localize_refine", &R::localize_refine},
      {"synthetic_max_index", &R::synthetic_max_index, false, 2.0, 100.0},
      {"synthetic_noise", &R::synthetic_noise, false, 0.0, 1.0},
      {"synthetic_seed", &R::synthetic_seed, false, 0.0, 2147483647.0},
  };
  return table;
}

inline const FieldSpec* find_field(std::string_view name) {
  for (const auto& f : fields())
    if (f.name == name) return &f;
  return nullptr;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& text, const std::string& key, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || !std::isfinite(v))
    throw ConfigError(key + ": expected a number, got '" + text + "'", key, line);
  return v;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void check_range(const FieldSpec& f, double v, int line) {
  const std::string key(f.name);
  const bool low_ok = f.lo_open ? v > f.lo : v >= f.lo;
  if (!low_ok || v > f.hi) {
    std::string range = (f.lo_open ? "(" : "[") + format_real(f.lo) + ", " + format_real(f.hi) + "]";
    throw ConfigError(key + ": value " + format_real(v) + " outside " + range, key, line);
  }
}

inline void assign(RunConfig& cfg, const FieldSpec& f, const std::string& text, int line) {
  const std::string key(f.name);
  std::visit(
      [&](auto member) {
        using T = std::remove_reference_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, bool>) {
          if (text == "true" || text == "1") cfg.*member = true;
          else if (text == "false" || text == "0") cfg.*member = false;
          else throw ConfigError(key + ": expected true or false, got '" + text + "'", key, line);
        } else if constexpr (std::is_same_v<T, int>) {
          const double v = parse_real(text, key, line);
          if (v != std::floor(v)) throw ConfigError(key + ": expected an integer", key, line);
          check_range(f, v, line);
          cfg.*member = static_cast<int>(v);
        } else if constexpr (std::is_same_v<T, double>) {
          const double v = parse_real(text, key, line);
          check_range(f, v, line);
          cfg.*member = v;
        } else {
          if (text == "auto") {
            cfg.*member = std::nullopt;
          } else {
            const double v = parse_real(text, key, line);
            check_range(f, v, line);
            cfg.*member = v;
          }
        }
      },
      f.member);
}

inline std::string render(const RunConfig& cfg, const FieldSpec& f) {
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cv_t<std::remove_reference_t<decltype(cfg.*member)>>;
        const auto& v = cfg.*member;
        if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, int>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, double>) return format_real(v);
        else return v ? format_real(*v) : std::string("auto");
      },
      f.member);
}

}  // namespace config_detail

/// Cross-field checks and module invariants; errors name the offending field.
inline void validate(const RunConfig& c) {
  const auto fail = [](const std::string& field, const std::string& msg) {
    throw ConfigError(field + ": " + msg, field);
  };
  if (!(c.kappa_T_Hz + c.kappa_R_Hz + c.kappa_L_Hz > 0.0))
    fail("kappa_T_Hz", "total cavity decay rate must be positive");
  if (!(c.membrane_position_m < c.cavity_length_m))
    fail("membrane_position_m", "membrane must sit inside the cavity");
  if (!(c.beam_x_m <= c.membrane_Lx_m)) fail("beam_x_m", "beam centre outside the membrane");
  if (!(c.beam_y_m <= c.membrane_Ly_m)) fail("beam_y_m", "beam centre outside the membrane");
  if (c.spectrum_f_min_Hz.has_value() != c.spectrum_f_max_Hz.has_value())
    fail("spectrum_f_max_Hz", "set both spectrum_f_min_Hz and spectrum_f_max_Hz or neither");
  if (c.spectrum_f_min_Hz && !(*c.spectrum_f_max_Hz > *c.spectrum_f_min_Hz))
    fail("spectrum_f_max_Hz", "must exceed spectrum_f_min_Hz");
  if (!(c.filter_delta_max_Hz > c.filter_delta_min_Hz))
    fail("filter_delta_max_Hz", "must exceed filter_delta_min_Hz");
  const auto transmission = [&](double kappa_hz) {
    return to_angular(kappa_hz) * 2.0 * c.cavity_length_m / kSpeedOfLight;
  };
  if (transmission(c.kappa_T_Hz) >= 1.0) fail("kappa_T_Hz", "implies mirror transmission >= 1");
  if (transmission(c.kappa_R_Hz) >= 1.0) fail("kappa_R_Hz", "implies mirror transmission >= 1");
}

/// Parses `key = value` lines with `#` comments; unknown, duplicate and missing keys are errors.
inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = config_detail::trim(raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'", {}, line);
    const std::string key = config_detail::trim(text.substr(0, eq));
    const std::string value = config_detail::trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key", {}, line);
    const auto* spec = config_detail::find_field(key);
    if (!spec)
      throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'", key, line);
    if (!seen.emplace(key, line).second)
      throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'", key, line);
    try {
      config_detail::assign(cfg, *spec, value, line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line) + ": " + e.what(), e.field(), line);
    }
  }
  for (const auto& f : config_detail::fields())
    if (f.required && !seen.count(std::string(f.name)))
      throw ConfigError("missing required key '" + std::string(f.name) + "'", std::string(f.name));
  validate(cfg);
  return cfg;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Applies a single `key=value` override, with the same checks as the file parser.
inline void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto* spec = config_detail::find_field(key);
  if (!spec) throw ConfigError("unknown key '" + key + "'", key);
  config_detail::assign(cfg, *spec, config_detail::trim(value), 0);
}

/// Canonical `key = value` listing in table order (round-trips through parse_config).
inline std::string serialize(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : config_detail::fields())
    out += std::string(f.name) + " = " + config_detail::render(cfg, f) + "\n";
  return out;
}

/// 64-bit FNV-1a of the canonical listing.
inline std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash_hex(const RunConfig& cfg) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

// Conversions from the file representation to module parameters.

inline SystemParams system_params(const RunConfig& c) {
  SystemParams p;
  p.optics.kappa_T = to_angular(c.kappa_T_Hz);
  p.optics.kappa_R = to_angular(c.kappa_R_Hz);
  p.optics.kappa_L = to_angular(c.kappa_L_Hz);
  p.optics.detuning = to_angular(c.detuning_Hz);
  p.optics.n_cav = c.n_cav;
  p.optics.eta_d = c.eta_d;
  p.optics.wavelength = c.wavelength_m;
  p.mode.index_i = c.mode_i;
  p.mode.index_j = c.mode_j;
  p.mode.omega_m = to_angular(c.omega_m_Hz);
  p.mode.gamma_m = to_angular(c.gamma_m_Hz);
  p.mode.mass = c.mass_kg;
  p.mode.g0 = to_angular(c.g0_Hz);
  if (c.g_Hz) p.mode.measured_coupling = to_angular(*c.g_Hz);
  p.env.temperature = c.temperature_K;
  p.env.exact_occupation = c.exact_occupation;
  p.geometry.L_x = c.membrane_Lx_m;
  p.geometry.L_y = c.membrane_Ly_m;
  p.geometry.tension = c.tension_Pa;
  p.geometry.density = c.density_kg_m3;
  p.geometry.beam_waist = c.beam_waist_m;
  p.geometry.beam_x = c.beam_x_m;
  p.geometry.beam_y = c.beam_y_m;
  p.validate();
  return p;
}

inline CavityStack cavity_stack(const RunConfig& c) {
  const double T1 = mirror_transmission_for_decay_rate(to_angular(c.kappa_R_Hz), c.cavity_length_m);
  const double T2 = mirror_transmission_for_decay_rate(to_angular(c.kappa_T_Hz), c.cavity_length_m);
  const auto membrane = thin_film_membrane(c.membrane_thickness_m, c.membrane_index, c.wavelength_m);
  CavityStack s = CavityStack::from_transmissions(T1, T2, membrane, c.cavity_length_m,
                                                  c.membrane_position_m);
  s.validate();
  return s;
}

/// Collection efficiency of the entanglement filter: explicit, or ideal detection times outcoupling_fit.
inline double filter_efficiency(const RunConfig& c) {
  return c.filter_eta ? *c.filter_eta : c.outcoupling_fit;
}

}  // namespace optomech
