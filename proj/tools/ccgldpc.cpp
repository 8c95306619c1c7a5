#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ccgldpc/job.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw ccgldpc::ConfigError("cannot read config file " + path.string());
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path resolve_preset(const std::string& name, const char* argv0) {
  std::vector<fs::path> candidates = {name, name + ".json",
                                      fs::path("presets") / (name + ".json")};
  std::error_code ec;
  fs::path exe = fs::canonical(argv0, ec);
  if (!ec) {
    fs::path dir = exe.parent_path();
    candidates.push_back(dir / "presets" / (name + ".json"));
    candidates.push_back(dir / ".." / "presets" / (name + ".json"));
    candidates.push_back(dir / ".." / ".." / "presets" / (name + ".json"));
  }
  for (const fs::path& c : candidates) {
    if (fs::exists(c, ec) && fs::is_regular_file(c, ec)) return c;
  }
  throw ccgldpc::ConfigError("preset '" + name + "' not found");
}

struct FlagSet {
  std::string config_path;
  std::string ensemble;
  std::string component;
  std::string coupling;
  std::string n_list;
  std::string grid;
  std::string out;
  std::string format;
  std::string kind = "bp";
  double resolution = -1.0;
  double map_resolution = -1.0;
  double alpha = -1.0;
  long mc_sections = -1;
  int cap = -1;
  int workers = -1;
  long long seed = -1;
  bool structured_bcc = false;
};

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

json config_from_flags(const FlagSet& fl, const std::string& analysis) {
  json cfg;
  if (!fl.config_path.empty()) {
    cfg = json::parse(read_file(fl.config_path));
    if (!cfg.is_object()) {
      throw ccgldpc::ConfigError("config must be a JSON object");
    }
  }
  if (!analysis.empty()) cfg["analysis"] = analysis;

  if (!fl.ensemble.empty()) {
    std::vector<int> dvdc = parse_int_list(fl.ensemble);
    if (dvdc.size() != 2) {
      throw ccgldpc::ConfigError("--ensemble expects dv,dc");
    }
    json entry = {{"dv", dvdc[0]}, {"dc", dvdc[1]}};
    if (!fl.component.empty()) entry["component"] = fl.component;
    if (!fl.coupling.empty() && fl.coupling != "uncoupled") {
      std::vector<int> ml = parse_int_list(fl.coupling);
      if (ml.size() != 2) {
        throw ccgldpc::ConfigError("--coupling expects m,L or 'uncoupled'");
      }
      entry["coupling"] = {{"m", ml[0]}, {"L", ml[1]}};
    }
    cfg["ensembles"] = json::array({entry});
  } else if (!fl.component.empty() || !fl.coupling.empty()) {
    throw ccgldpc::ConfigError(
        "--component/--coupling need --ensemble dv,dc");
  }

  if (!fl.n_list.empty()) cfg["block_sections"] = parse_int_list(fl.n_list);
  if (!fl.grid.empty()) cfg["transfer_grid"] = parse_double_list(fl.grid);
  if (fl.resolution >= 0.0) cfg["resolution"] = fl.resolution;
  if (fl.map_resolution >= 0.0) cfg["map_resolution"] = fl.map_resolution;
  if (fl.alpha >= 0.0) cfg["alpha"] = fl.alpha;
  if (fl.cap >= 0) cfg["cap"] = fl.cap;
  if (fl.mc_sections >= 0) cfg["mc_sections"] = fl.mc_sections;
  if (fl.structured_bcc) cfg["structured_bcc"] = true;
  if (!fl.out.empty()) cfg["output"] = fl.out;
  if (!fl.format.empty()) cfg["format"] = fl.format;
  if (fl.workers >= 0) cfg["workers"] = fl.workers;
  if (fl.seed >= 0) cfg["seed"] = fl.seed;
  return cfg;
}

int run_from_json(const json& cfg_json) {
  ccgldpc::JobConfig cfg = ccgldpc::parse_job_config(cfg_json.dump());
  ccgldpc::JobResult res = ccgldpc::run_job(cfg);

  std::ostream& log_stream = cfg.output.empty() ? std::cerr : std::cout;
  for (const ccgldpc::CellLog& log : res.logs) {
    char line[512];
    std::snprintf(line, sizeof(line), "[%s] %s  (%.2f s)\n",
                  log.failed ? "fail" : " ok ", log.summary.c_str(),
                  log.seconds);
    log_stream << line;
  }
  if (cfg.output.empty()) {
    std::cout << res.artifact;
  } else {
    log_stream << "wrote " << cfg.output << "\n";
  }
  return res.exit_code;
}

void add_common_flags(CLI::App* cmd, FlagSet& fl, bool with_ensemble) {
  cmd->add_option("--config", fl.config_path,
                  "JSON job description; flags override its fields");
  if (with_ensemble) {
    cmd->add_option("--ensemble", fl.ensemble, "degrees dv,dc");
    cmd->add_option("--component", fl.component,
                    "ldpc or conv:NUM/DEN (octal generator)");
  }
  cmd->add_option("--out", fl.out, "artifact path (default: stdout)");
  cmd->add_option("--format", fl.format, "csv or json");
  cmd->add_option("--workers", fl.workers, "worker threads");
  cmd->add_option("--seed", fl.seed, "seed recorded in provenance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "density evolution thresholds, transfer functions, and weight "
      "enumerators for LDPC ensembles with convolutional constraints"};
  app.require_subcommand(1);

  FlagSet fl;
  std::string preset;

  CLI::App* threshold = app.add_subcommand(
      "threshold", "BP or MAP threshold of one ensemble");
  add_common_flags(threshold, fl, true);
  threshold->add_option("--kind", fl.kind, "bp or map (default bp)");
  threshold->add_option("--coupling", fl.coupling, "m,L or 'uncoupled'");
  threshold->add_option("--resolution", fl.resolution,
                        "bisection half-width target");
  threshold->add_option("--map-resolution", fl.map_resolution,
                        "grid-halving stability target");

  CLI::App* curve = app.add_subcommand(
      "exit-curve", "extrinsic erasure curve over the channel parameter");
  add_common_flags(curve, fl, true);

  CLI::App* dmin = app.add_subcommand(
      "dmin", "minimum-distance bound curve over block lengths");
  add_common_flags(dmin, fl, true);
  dmin->add_option("--alpha", fl.alpha, "ensemble fraction in (0,1)");
  dmin->add_option("--N-list", fl.n_list, "trellis section counts");
  dmin->add_option("--cap", fl.cap, "spectrum truncation (0 = auto)");
  dmin->add_flag("--structured-bcc", fl.structured_bcc,
                 "two-component average for (2,3) ensembles");

  CLI::App* wenum = app.add_subcommand(
      "wenum", "raw component weight spectrum");
  add_common_flags(wenum, fl, true);
  wenum->add_option("--N-list", fl.n_list, "trellis section counts");
  wenum->add_option("--cap", fl.cap, "spectrum truncation (0 = full)");

  CLI::App* transfer = app.add_subcommand(
      "transfer", "exact erasure transfer function on a parameter grid");
  add_common_flags(transfer, fl, true);
  transfer->add_option("--grid", fl.grid, "comma list of erasure rates");
  transfer->add_option("--mc-sections", fl.mc_sections,
                       "adds sampled columns when positive");

  CLI::App* reproduce = app.add_subcommand(
      "reproduce", "run a shipped preset (table1, table2, fig4)");
  reproduce->add_option("preset", preset, "preset name or path")
      ->required();
  add_common_flags(reproduce, fl, false);

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg;
    if (app.got_subcommand(threshold)) {
      if (fl.kind != "bp" && fl.kind != "map") {
        throw ccgldpc::ConfigError("--kind must be bp or map");
      }
      cfg = config_from_flags(fl, fl.kind);
    } else if (app.got_subcommand(curve)) {
      cfg = config_from_flags(fl, "exit-curve");
    } else if (app.got_subcommand(dmin)) {
      cfg = config_from_flags(fl, "dmin");
    } else if (app.got_subcommand(wenum)) {
      cfg = config_from_flags(fl, "wenum");
    } else if (app.got_subcommand(transfer)) {
      cfg = config_from_flags(fl, "transfer");
    } else {
      fl.config_path = resolve_preset(preset, argv[0]).string();
      cfg = config_from_flags(fl, "");
    }
    return run_from_json(cfg);
  } catch (const ccgldpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
