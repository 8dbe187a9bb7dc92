// Command-line front end: working-point, spectrum, bound, entangle, localize, reproduce.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "optomech/pipelines.hpp"

namespace {

using namespace optomech;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config_path;
  std::string out = "-";
};

RunConfig resolve_config(const Common& c, const std::vector<std::string>& extras) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  for (const auto& arg : extras) {
    const auto eq = arg.find('=');
    if (arg.rfind("--", 0) != 0 || eq == std::string::npos)
      throw ConfigError("unrecognised argument '" + arg + "' (overrides take the form --key=value)");
    apply_override(cfg, arg.substr(2, eq - 2), arg.substr(eq + 1));
  }
  validate(cfg);
  return cfg;
}

void emit(const std::string& out, const std::string& content) {
  if (out == "-") std::cout << content;
  else write_file(out, content);
}

/// Summaries go to stdout when the data went to a file, otherwise to stderr.
void report(const Common& c, const Summary& s) {
  std::ostream& os = c.out == "-" ? std::cerr : std::cout;
  os << "summary:";
  for (const auto& [k, v] : s.items) os << ' ' << k << '=' << v;
  os << '\n';
}

nlohmann::ordered_json to_json(const Summary& s, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["tool"] = std::string(kToolName) + " " + kToolVersion;
  j["config_hash"] = config_hash_hex(cfg);
  for (const auto& [k, v] : s.items) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end && *end == '\0' && !v.empty()) j[k] = d;
    else j[k] = v;
  }
  return j;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "configuration file (key = value)");
  sub->add_option("-o,--out", c.out, "output CSV path, '-' for stdout");
  sub->allow_extras();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membrane-in-the-middle optomechanics toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

  Common wp_opt, spec_opt, bound_opt, ent_opt, loc_opt, rep_opt;
  std::string sidecar, data_path, figure, outdir = "reproduction";
  bool synthetic = false;

  auto* wp = app.add_subcommand("working-point", "transfer-matrix sweep over 2 k z_m");
  add_common(wp, wp_opt);
  auto* spec = app.add_subcommand("spectrum", "output and measured squeezing spectra");
  add_common(spec, spec_opt);
  spec->add_option("--sidecar", sidecar, "JSON file for derived scalars (default: <out>.json)");
  auto* bound = app.add_subcommand("bound", "full-model minima against the squeezing bound");
  add_common(bound, bound_opt);
  auto* ent = app.add_subcommand("entangle", "logarithmic negativity versus filter detuning");
  add_common(ent, ent_opt);
  auto* loc = app.add_subcommand("localize", "beam position from measured mode couplings");
  add_common(loc, loc_opt);
  auto* source = loc->add_option_group("source");
  source->add_option("-d,--data", data_path, "coupling CSV with columns i, j, omega_m_Hz, g_Hz");
  source->add_flag("--synthetic", synthetic, "use seeded synthetic couplings at beam_x_m, beam_y_m");
  source->require_option(1);
  auto* rep = app.add_subcommand("reproduce", "write the data behind a figure");
  add_common(rep, rep_opt);
  std::vector<std::string> ids = figure_ids();
  ids.push_back("all");
  rep->add_option("figure", figure, "figure id")->required()->check(CLI::IsMember(ids));
  rep->add_option("--outdir", outdir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*wp) {
      const RunConfig cfg = resolve_config(wp_opt, wp->remaining());
      emit(wp_opt.out, run_working_point(cfg).table.str());
    } else if (*spec) {
      const RunConfig cfg = resolve_config(spec_opt, spec->remaining());
      const auto r = run_spectrum(cfg);
      emit(spec_opt.out, r.table.str());
      std::string side = sidecar;
      if (side.empty() && spec_opt.out != "-") side = spec_opt.out + ".json";
      if (!side.empty()) write_file(side, to_json(r.summary, cfg).dump(2) + "\n");
      report(spec_opt, r.summary);
    } else if (*bound) {
      const RunConfig cfg = resolve_config(bound_opt, bound->remaining());
      const auto r = run_bound(cfg);
      emit(bound_opt.out, r.table.str());
      report(bound_opt, r.summary);
    } else if (*ent) {
      const RunConfig cfg = resolve_config(ent_opt, ent->remaining());
      const auto r = run_entangle(cfg);
      emit(ent_opt.out, r.table.str());
      report(ent_opt, r.summary);
    } else if (*loc) {
      const RunConfig cfg = resolve_config(loc_opt, loc->remaining());
      const auto data = synthetic ? synthetic_dataset(cfg) : read_couplings_file(data_path);
      const auto r = run_localize(cfg, data);
      emit(loc_opt.out, r.table.str());
      report(loc_opt, r.summary);
    } else if (*rep) {
      const RunConfig cfg = resolve_config(rep_opt, rep->remaining());
      const std::vector<std::string> todo =
          figure == "all" ? figure_ids() : std::vector<std::string>{figure};
      for (const auto& id : todo) std::cout << reproduce(id, cfg, outdir).text() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InsufficientDataError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DegenerateDataError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
