#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "optomech/config.hpp"
#include "optomech/csv.hpp"
#include "optomech/entanglement.hpp"
#include "optomech/localization.hpp"
#include "optomech/spectra.hpp"
#include "optomech/transfer_matrix.hpp"

namespace optomech {

/// Ordered scalar results; rendered as `key = value` lines or JSON by the CLI.
struct Summary {
  std::vector<std::pair<std::string, std::string>> items;

  void add(const std::string& key, double value) { items.emplace_back(key, fmt(value)); }
  void add(const std::string& key, const std::string& value) { items.emplace_back(key, value); }
  void append(const Summary& other) { items.insert(items.end(), other.items.begin(), other.items.end()); }

  std::string text() const {
    std::string out;
    for (const auto& [k, v] : items) out += k + " = " + v + "\n";
    return out;
  }
};

// ---------------------------------------------------------------- working point

struct WorkingPointResult {
  std::vector<WorkingPoint> points;
  CsvTable table;
};

inline WorkingPointResult run_working_point(const RunConfig& cfg) {
  const CavityStack stack = cavity_stack(cfg);
  SweepOptions opt;
  opt.points_per_fsr = cfg.points_per_fsr;
  WorkingPointResult r;
  r.points = working_point_sweep(stack, kTwoPi / cfg.wavelength_m, cfg.sweep_points, opt);
  r.table = make_table(cfg, {"two_k_zm_over_2pi", "kappa_Hz", "eta_c", "G_Hz_per_m", "delta_f_cav_Hz"});
  for (const auto& wp : r.points)
    r.table.add_row({wp.two_k_zm / kTwoPi, to_hz(wp.kappa), wp.eta_c, wp.G, wp.delta_f_cav});
  return r;
}

// ---------------------------------------------------------------- spectra

/// Detection efficiency and background of the selected squeezing model.
struct DetectionModel {
  double eta = 1.0;
  double mirror_noise = 0.0;
  std::string name;
};

inline DetectionModel detection_model(const RunConfig& cfg, bool adjusted) {
  const SystemParams p = system_params(cfg);
  if (adjusted) return {p.optics.eta_d * cfg.outcoupling_fit, cfg.mirror_noise, "adjusted"};
  return {p.optics.eta_d * p.optics.outcoupling(), 0.0, "table"};
}

inline std::vector<double> spectrum_grid(const RunConfig& cfg, const SystemParams& p) {
  if (cfg.spectrum_f_min_Hz)
    return linear_grid(to_angular(*cfg.spectrum_f_min_Hz), to_angular(*cfg.spectrum_f_max_Hz),
                       cfg.spectrum_points);
  return default_grid(p, {p.mode}, cfg.spectrum_points);
}

struct SpectrumResult {
  Spectrum out;   // unit detection efficiency
  Spectrum meas;  // after the detection chain
  double bound = 0.0;
  DetectionModel detection;
  Summary summary;
  CsvTable table;
};

inline Summary derived_scalars(const SystemParams& p) {
  Summary s;
  const double g = p.mode.coupling(p.optics.n_cav);
  const double gamma_opt = measurement_rate_from_coupling(g, p.optics.kappa());
  const double n = thermal_occupation(p.env, p.mode);
  s.add("g_Hz", to_hz(g));
  s.add("Gamma_opt_Hz", to_hz(gamma_opt));
  s.add("n_th", n);
  s.add("n_Gamma_m_Hz", to_hz(n * p.mode.gamma_m));
  s.add("C_q", quantum_cooperativity(gamma_opt, n, p.mode.gamma_m));
  const double bound = squeezing_bound(p, p.mode);
  s.add("S_bound", bound);
  s.add("S_bound_dB", db(bound));
  return s;
}

inline SpectrumResult run_spectrum(const RunConfig& cfg) {
  const SystemParams p = system_params(cfg);
  const DriftSystem sys = build_drift(p);
  SpectrumResult r;
  r.detection = detection_model(cfg, cfg.adjusted_model);
  r.out = full_spectrum(sys, spectrum_grid(cfg, p));
  r.meas = detection_chain(r.out, r.detection.eta, r.detection.mirror_noise);
  r.bound = squeezing_bound(p, p.mode);

  r.summary = derived_scalars(p);
  r.summary.add("n_eff", effective_occupation(sys, 0));
  r.summary.add("model", r.detection.name);
  r.summary.add("eta", r.detection.eta);
  r.summary.add("mirror_noise", r.detection.mirror_noise);
  r.summary.add("min_S_out", r.out.min_value());
  r.summary.add("min_S_out_dB", db(r.out.min_value()));
  r.summary.add("min_S_meas", r.meas.min_value());
  r.summary.add("min_S_meas_dB", db(r.meas.min_value()));
  r.summary.add("omega_min_Hz", to_hz(r.meas.omega[r.meas.argmin()]));

  r.table = make_table(cfg, {"omega_Hz", "S_out", "S_meas", "S_bound"});
  r.table.add_meta("model", r.detection.name);
  for (std::size_t n = 0; n < r.out.size(); ++n)
    r.table.add_row({to_hz(r.out.omega[n]), r.out.values[n], r.meas.values[n], r.bound});
  return r;
}

// ---------------------------------------------------------------- squeezing bound

/// Parameters with the detected port carrying all decay (kappa_T/kappa = 1), detuning replaced.
inline SystemParams overcoupled(SystemParams p, double detuning) {
  p.optics.kappa_T = p.optics.kappa();
  p.optics.kappa_R = 0.0;
  p.optics.kappa_L = 0.0;
  p.optics.detuning = detuning;
  return p;
}

/// Detunings -2.0, -1.9, ..., -0.1 MHz.
inline std::vector<double> bound_detunings() {
  std::vector<double> d;
  for (int n = 20; n >= 1; --n) d.push_back(to_angular(-0.1e6 * n));
  return d;
}

struct BoundRow {
  double detuning = 0.0;
  SpectrumMinimum minimum;
};

struct BoundResult {
  std::vector<BoundRow> rows;
  double bound = 0.0;
  Summary summary;
  CsvTable table;
};

inline BoundResult run_bound(const RunConfig& cfg) {
  const SystemParams p = system_params(cfg);
  BoundResult r;
  r.bound = squeezing_bound(p, p.mode);
  const double lo = to_angular(1.5e6), hi = to_angular(2.5e6);
  for (double d : bound_detunings())
    r.rows.push_back({d, spectrum_minimum(build_drift(overcoupled(p, d)), lo, hi)});
  r.summary = derived_scalars(p);
  r.table = make_table(cfg, {"detuning_Hz", "min_S_full", "omega_min_Hz", "S_bound"});
  for (const auto& row : r.rows)
    r.table.add_row({to_hz(row.detuning), row.minimum.value, to_hz(row.minimum.omega), r.bound});
  return r;
}

// ---------------------------------------------------------------- entanglement

struct EntangleResult {
  EntanglementSweep sweep;
  double eta = 1.0;
  Summary summary;
  CsvTable table;
};

inline EntangleResult run_entangle(const RunConfig& cfg) {
  const SystemParams p = system_params(cfg);
  EntangleResult r;
  r.eta = filter_efficiency(cfg);
  const auto grid = linear_grid(to_angular(cfg.filter_delta_min_Hz), to_angular(cfg.filter_delta_max_Hz),
                                cfg.filter_points);
  r.sweep = entanglement_sweep(p, p.mode, to_angular(cfg.filter_kappa_Hz), r.eta, grid);
  r.summary.add("filter_kappa_Hz", cfg.filter_kappa_Hz);
  r.summary.add("filter_eta", r.eta);
  r.summary.add("log_base", "e");
  r.summary.add("max_E_N", r.sweep.best().E_N);
  r.summary.add("argmax_delta_prime_Hz", to_hz(r.sweep.best().delta_f));
  r.summary.add("max_lyapunov_residual", r.sweep.max_residual());
  r.table = make_table(cfg, {"delta_prime_Hz", "E_N"});
  r.table.add_meta("log_base", "e");
  for (const auto& pt : r.sweep.points) r.table.add_row({to_hz(pt.delta_f), pt.E_N});
  return r;
}

// ---------------------------------------------------------------- localization

/// Couplings for modes (1..max, 1..max) at the configured beam position, with seeded noise.
inline std::vector<CouplingMeasurement> synthetic_dataset(const RunConfig& cfg) {
  const SystemParams p = system_params(cfg);
  std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.synthetic_seed));
  const double scale = to_angular(580e3) * std::sqrt(p.mode.omega_m);
  return synthetic_couplings(mode_grid(cfg.synthetic_max_index), p.geometry, p.geometry.beam_x,
                             p.geometry.beam_y, scale, cfg.synthetic_noise, rng);
}

struct LocalizeResult {
  LikelihoodMap map;
  Summary summary;
  CsvTable table;
};

inline LocalizeResult run_localize(const RunConfig& cfg, const std::vector<CouplingMeasurement>& data) {
  const SystemParams p = system_params(cfg);
  LocalizeResult r;
  LocalizeOptions opt;
  opt.refine = cfg.localize_refine;
  r.map = localize(data, p.geometry, cfg.localize_nx, cfg.localize_ny, opt);
  r.summary.add("modes", static_cast<double>(data.size()));
  r.summary.add("x0_m", r.map.x0);
  r.summary.add("y0_m", r.map.y0);
  r.summary.add("sigma2", r.map.sigma2);
  if (r.map.refined) {
    r.summary.add("x0_refined_m", r.map.refined->first);
    r.summary.add("y0_refined_m", r.map.refined->second);
  }
  r.table = make_table(cfg, {"x_m", "y_m", "chi2", "likelihood"});
  r.table.add_meta("quadrant", "[0, L_x/2] x [0, L_y/2]");
  for (std::size_t iy = 0; iy < r.map.ny(); ++iy)
    for (std::size_t ix = 0; ix < r.map.nx(); ++ix) {
      const std::size_t n = iy * r.map.nx() + ix;
      r.table.add_row({r.map.grid_x[ix], r.map.grid_y[iy], r.map.chi2[n], r.map.likelihood[n]});
    }
  return r;
}

// ---------------------------------------------------------------- reproduction

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = {"working-point", "spectrum", "squeeze", "entangle", "localize"};
  return ids;
}

/// Writes the data behind one figure into outdir and returns its summary.
inline Summary reproduce(const std::string& figure, const RunConfig& cfg, const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  const auto out = [&](const std::string& name) { return (outdir / name).string(); };
  Summary s;
  s.add("figure", figure);

  if (figure == "working-point") {
    const auto r = run_working_point(cfg);
    write_file(out("working_point.csv"), r.table.str());
    double kmin = r.points.front().kappa, kmax = kmin, gmax = 0.0, at = 0.0;
    for (const auto& wp : r.points) {
      kmin = std::min(kmin, wp.kappa);
      kmax = std::max(kmax, wp.kappa);
      if (std::abs(wp.G) > gmax) {
        gmax = std::abs(wp.G);
        at = wp.two_k_zm / kTwoPi;
      }
    }
    s.add("kappa_min_Hz", to_hz(kmin));
    s.add("kappa_max_Hz", to_hz(kmax));
    s.add("max_abs_G_Hz_per_m", gmax);
    s.add("max_abs_G_at_two_k_zm_over_2pi", at);
  } else if (figure == "spectrum") {
    RunConfig table_cfg = cfg, adjusted_cfg = cfg;
    table_cfg.adjusted_model = false;
    adjusted_cfg.adjusted_model = true;
    const auto a = run_spectrum(table_cfg);
    const auto b = run_spectrum(adjusted_cfg);
    CsvTable t = make_table(cfg, {"omega_Hz", "S_out", "S_meas_table", "S_meas_adjusted", "S_bound"});
    for (std::size_t n = 0; n < a.out.size(); ++n)
      t.add_row({to_hz(a.out.omega[n]), a.out.values[n], a.meas.values[n], b.meas.values[n], a.bound});
    write_file(out("spectrum.csv"), t.str());
    s.append(a.summary);
    s.add("min_S_meas_adjusted", b.meas.min_value());
    s.add("min_S_meas_adjusted_dB", db(b.meas.min_value()));
  } else if (figure == "squeeze") {
    const auto r = run_bound(cfg);
    write_file(out("squeeze_bound.csv"), r.table.str());
    const SystemParams p = system_params(cfg);
    const auto grid = linear_grid(to_angular(1.5e6), to_angular(2.5e6), cfg.spectrum_points);
    CsvTable curves = make_table(cfg, {"detuning_Hz", "omega_Hz", "S_full", "S_approx"});
    for (double d : bound_detunings()) {
      const SystemParams q = overcoupled(p, d);
      const auto full = full_spectrum(build_drift(q), grid);
      const auto approx = approx_spectrum(q, q.mode, grid);
      for (std::size_t n = 0; n < grid.size(); ++n)
        curves.add_row({to_hz(d), to_hz(grid[n]), full.values[n], approx.total.values[n]});
    }
    write_file(out("squeeze_spectra.csv"), curves.str());
    RunConfig table_cfg = cfg;
    table_cfg.adjusted_model = false;
    const auto meas = run_spectrum(table_cfg);
    s.add("min_S_meas", meas.meas.min_value());
    s.add("min_S_meas_dB", db(meas.meas.min_value()));
    s.add("ideal_bound", r.bound);
    s.add("ideal_bound_dB", db(r.bound));
    s.add("min_S_full_at_smallest_detuning", r.rows.back().minimum.value);
  } else if (figure == "entangle") {
    const auto r = run_entangle(cfg);
    write_file(out("entanglement.csv"), r.table.str());
    s.append(r.summary);
  } else if (figure == "localize") {
    const auto data = synthetic_dataset(cfg);
    write_file(out("synthetic_couplings.csv"), couplings_table(cfg, data).str());
    const auto r = run_localize(cfg, data);
    write_file(out("localization_map.csv"), r.table.str());
    s.add("true_x_m", cfg.beam_x_m);
    s.add("true_y_m", cfg.beam_y_m);
    s.append(r.summary);
  } else {
    throw ConfigError("unknown figure id '" + figure + "'", "figure");
  }
  write_file(out(figure + "_summary.txt"), s.text());
  return s;
}

}  // namespace optomech
