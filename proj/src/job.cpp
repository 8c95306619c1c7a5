#include "ccgldpc/job.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "ccgldpc/log_domain.hpp"
#include "ccgldpc/thresholds.hpp"
#include "ccgldpc/transfer.hpp"
#include "ccgldpc/weight_enum.hpp"
#include "json.hpp"

namespace ccgldpc {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";

const std::vector<std::string>& analysis_names() {
  static const std::vector<std::string> names = {
      "bp", "map", "exit-curve", "dmin", "wenum", "transfer"};
  return names;
}

}  // namespace

Analysis parse_analysis(const std::string& name) {
  const auto& names = analysis_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return static_cast<Analysis>(j);
  }
  throw ConfigError("unknown analysis '" + name + "'");
}

std::string analysis_name(Analysis a) {
  return analysis_names().at(static_cast<std::size_t>(a));
}

namespace {

void reject_unknown_keys(const json& obj, const char* where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError(std::string("unknown field '") + item.key() +
                        "' in " + where);
    }
  }
}

EnsembleSpec parse_spec_entry(const json& e) {
  if (!e.is_object()) throw ConfigError("ensemble entries must be objects");
  reject_unknown_keys(
      e, "ensemble entry",
      {"dv", "dc", "component", "coupling", "analysis", "block_sections"});
  if (!e.contains("dv") || !e.contains("dc")) {
    throw ConfigError("ensemble entry needs dv and dc");
  }
  EnsembleSpec spec;
  spec.dv = e.at("dv").get<int>();
  spec.dc = e.at("dc").get<int>();
  std::string comp = e.value("component", "ldpc");
  if (comp.rfind("conv:", 0) == 0) {
    try {
      spec.conv = parse_generator(comp.substr(5));
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("bad component: ") + err.what());
    }
  } else if (comp != "ldpc") {
    throw ConfigError("component must be 'ldpc' or 'conv:NUM/DEN'");
  }
  if (e.contains("coupling") && !e.at("coupling").is_null()) {
    const json& c = e.at("coupling");
    reject_unknown_keys(c, "coupling", {"m", "L"});
    CouplingSpec cs;
    cs.m = c.value("m", 1);
    cs.L = c.value("L", 100);
    spec.coupling = cs;
  }
  return spec;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string describe_cell(const JobCell& cell) {
  return cell.spec.describe() + " " + analysis_name(cell.analysis);
}

// one uniform column set per analysis category so mixed bp/map configs
// still emit a single rectangular table
enum class Category { kThreshold, kCurve, kDmin, kSpectrum, kTransfer };

Category category_of(Analysis a) {
  switch (a) {
    case Analysis::kBpThreshold:
    case Analysis::kMapThreshold:
      return Category::kThreshold;
    case Analysis::kExitCurve:
      return Category::kCurve;
    case Analysis::kDminCurve:
      return Category::kDmin;
    case Analysis::kWeightSpectrum:
      return Category::kSpectrum;
    case Analysis::kTransferGrid:
      return Category::kTransfer;
  }
  throw std::logic_error("unreachable");
}

std::vector<std::string> columns_for(Category c, bool with_mc) {
  switch (c) {
    case Category::kThreshold:
      return {"dv", "dc", "component", "coupling_m", "coupling_L",
              "analysis", "value", "resolution", "de_target",
              "de_stall_tol", "chain_length", "de_runs",
              "budget_exhausted", "note", "error"};
    case Category::kCurve:
      return {"dv", "dc", "component", "eps", "pe", "note", "error"};
    case Category::kDmin:
      return {"dv", "dc", "component", "alpha", "N", "n", "d_hat",
              "truncated", "cap", "note", "error"};
    case Category::kSpectrum:
      return {"dv", "dc", "component", "N", "n", "w", "log10_count",
              "note", "error"};
    case Category::kTransfer: {
      std::vector<std::string> cols = {"dv", "dc", "component", "q_s",
                                       "q_p", "p_s", "p_p"};
      if (with_mc) {
        cols.insert(cols.end(),
                    {"mc_p_s", "mc_se_s", "mc_p_p", "mc_se_p"});
      }
      cols.insert(cols.end(), {"note", "error"});
      return cols;
    }
  }
  throw std::logic_error("unreachable");
}

struct Row {
  std::vector<std::string> fields;
};

struct CellResult {
  std::vector<Row> rows;
  std::string error;
  double seconds = 0.0;
  std::string summary;
};

Row base_row(const JobCell& cell, std::size_t width) {
  Row r;
  r.fields.assign(width, "");
  r.fields[0] = std::to_string(cell.spec.dv);
  r.fields[1] = std::to_string(cell.spec.dc);
  r.fields[2] =
      cell.spec.is_conv() ? "conv:" + cell.spec.conv->label : "ldpc";
  return r;
}

std::string bit_erasure_note(const EnsembleSpec& spec) {
  return !spec.is_conv() && spec.dv == 2 ? "criterion=bit-erasure-DE" : "";
}

CellResult run_threshold_cell(const JobCell& cell, const JobConfig& cfg,
                              const std::vector<std::string>& cols) {
  CellResult res;
  Row r = base_row(cell, cols.size());
  r.fields[3] =
      cell.spec.is_coupled() ? std::to_string(cell.spec.coupling->m) : "";
  r.fields[4] =
      cell.spec.is_coupled() ? std::to_string(cell.spec.coupling->L) : "";
  r.fields[5] = analysis_name(cell.analysis);
  r.fields[8] = format_double(cfg.de.target);
  r.fields[9] = format_double(cfg.de.stall_tol);
  r.fields[13] = bit_erasure_note(cell.spec);

  if (cell.analysis == Analysis::kBpThreshold) {
    ThresholdResult t = bp_threshold(cell.spec, cfg.resolution, cfg.de);
    r.fields[6] = format_double(t.value);
    r.fields[7] = format_double(t.resolution);
    r.fields[10] =
        cell.spec.is_coupled() ? std::to_string(t.chain_length) : "";
    r.fields[11] = std::to_string(t.de_runs);
    r.fields[12] = std::to_string(t.budget_exhausted_runs);
    res.summary = describe_cell(cell) + " = " + format_double(t.value);
  } else {
    MapThresholdResult m =
        map_threshold(cell.spec, cfg.map_resolution, cfg.de);
    r.fields[6] = format_double(m.value);
    r.fields[7] = format_double(m.resolution);
    res.summary = describe_cell(cell) + " = " + format_double(m.value);
  }
  res.rows.push_back(std::move(r));
  return res;
}

CellResult run_curve_cell(const JobCell& cell, const JobConfig& cfg,
                          const std::vector<std::string>& cols) {
  CellResult res;
  ExitCurve curve = exit_curve(cell.spec, {}, cfg.de);
  for (std::size_t j = 0; j < curve.eps.size(); ++j) {
    Row r = base_row(cell, cols.size());
    r.fields[3] = format_double(curve.eps[j]);
    r.fields[4] = format_double(curve.pe[j]);
    r.fields[5] = bit_erasure_note(cell.spec);
    res.rows.push_back(std::move(r));
  }
  res.summary = describe_cell(cell) + ": " +
                std::to_string(curve.eps.size()) + " points";
  return res;
}

CellResult run_dmin_cell(const JobCell& cell, const JobConfig& cfg,
                         const std::vector<std::string>& cols) {
  CellResult res;
  const std::vector<int>& sections = cell.block_sections;
  if (sections.empty()) {
    throw std::invalid_argument("no block sections configured");
  }
  std::vector<DminPoint> pts = dmin_curve(cell.spec, cfg.alpha, sections,
                                          cfg.cap, cfg.structured_bcc);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    Row r = base_row(cell, cols.size());
    r.fields[3] = format_double(cfg.alpha);
    r.fields[4] = std::to_string(sections[j]);
    r.fields[5] = std::to_string(pts[j].n);
    r.fields[6] = std::to_string(pts[j].d_hat);
    r.fields[7] = pts[j].truncated ? "1" : "0";
    r.fields[8] = std::to_string(pts[j].cap_used);
    res.rows.push_back(std::move(r));
  }
  res.summary =
      describe_cell(cell) + ": " + std::to_string(pts.size()) + " points";
  return res;
}

CellResult run_spectrum_cell(const JobCell& cell, const JobConfig& cfg,
                             const std::vector<std::string>& cols) {
  CellResult res;
  if (cell.block_sections.empty()) {
    throw std::invalid_argument("no block sections configured");
  }
  for (int N : cell.block_sections) {
    WeightSpectrum ws;
    if (cell.spec.is_conv()) {
      Trellis t = build_trellis(*cell.spec.conv);
      WeightSpectrum probe =
          component_spectrum_conv(t, N, cell.spec.dc, {}, 0);
      int cap = cfg.cap > 0 ? std::min(cfg.cap, probe.n) : probe.n;
      ws = component_spectrum_conv(t, N, cell.spec.dc, {}, cap);
    } else {
      int n = cell.spec.dc * N;
      int cap = cfg.cap > 0 ? std::min(cfg.cap, n) : n;
      ws = component_spectrum_ldpc(N, cell.spec.dc, cap);
    }
    for (int w = 0; w <= ws.W; ++w) {
      if (ws.log_a[w] == kLogZero) continue;
      Row r = base_row(cell, cols.size());
      r.fields[3] = std::to_string(N);
      r.fields[4] = std::to_string(ws.n);
      r.fields[5] = std::to_string(w);
      r.fields[6] = format_double(ws.log_a[w] / std::log(10.0));
      res.rows.push_back(std::move(r));
    }
  }
  res.summary = describe_cell(cell) + ": " +
                std::to_string(res.rows.size()) + " weights";
  return res;
}

CellResult run_transfer_cell(const JobCell& cell, const JobConfig& cfg,
                             const std::vector<std::string>& cols) {
  CellResult res;
  if (!cell.spec.is_conv()) {
    throw std::invalid_argument(
        "transfer analysis needs a convolutional component");
  }
  TransferFunction tf(*cell.spec.conv);
  for (double qs : cfg.transfer_grid) {
    for (double qp : cfg.transfer_grid) {
      Row r = base_row(cell, cols.size());
      TransferPoint tp = tf.eval(qs, qp);
      r.fields[3] = format_double(qs);
      r.fields[4] = format_double(qp);
      r.fields[5] = format_double(tp.p_s);
      r.fields[6] = format_double(tp.p_p);
      if (cfg.mc_sections > 0) {
        McTransferEstimate mc = mc_transfer_oracle(
            *cell.spec.conv, qs, qp, cfg.mc_sections, cfg.seed);
        r.fields[7] = format_double(mc.p_s);
        r.fields[8] = format_double(mc.se_s);
        r.fields[9] = format_double(mc.p_p);
        r.fields[10] = format_double(mc.se_p);
      }
      res.rows.push_back(std::move(r));
    }
  }
  res.summary = describe_cell(cell) + ": " +
                std::to_string(res.rows.size()) + " grid points";
  return res;
}

CellResult run_cell(const JobCell& cell, const JobConfig& cfg,
                    const std::vector<std::string>& cols) {
  switch (category_of(cell.analysis)) {
    case Category::kThreshold:
      return run_threshold_cell(cell, cfg, cols);
    case Category::kCurve:
      return run_curve_cell(cell, cfg, cols);
    case Category::kDmin:
      return run_dmin_cell(cell, cfg, cols);
    case Category::kSpectrum:
      return run_spectrum_cell(cell, cfg, cols);
    case Category::kTransfer:
      return run_transfer_cell(cell, cfg, cols);
  }
  throw std::logic_error("unreachable");
}

ordered_json canonical_config(const JobConfig& cfg) {
  ordered_json j;
  j["alpha"] = cfg.alpha;
  j["cap"] = cfg.cap;
  j["de"] = {{"max_iterations", cfg.de.max_iterations},
             {"stall_tol", cfg.de.stall_tol},
             {"target", cfg.de.target}};
  j["format"] = cfg.format;
  j["map_resolution"] = cfg.map_resolution;
  j["mc_sections"] = cfg.mc_sections;
  j["resolution"] = cfg.resolution;
  j["seed"] = cfg.seed;
  j["structured_bcc"] = cfg.structured_bcc;
  j["transfer_grid"] = cfg.transfer_grid;
  ordered_json cells = ordered_json::array();
  for (const JobCell& c : cfg.cells) {
    ordered_json e;
    e["dv"] = c.spec.dv;
    e["dc"] = c.spec.dc;
    e["component"] =
        c.spec.is_conv() ? "conv:" + c.spec.conv->label : "ldpc";
    if (c.spec.is_coupled()) {
      e["coupling"] = {{"L", c.spec.coupling->L},
                       {"m", c.spec.coupling->m}};
    }
    e["analysis"] = analysis_name(c.analysis);
    if (!c.block_sections.empty()) e["block_sections"] = c.block_sections;
    cells.push_back(std::move(e));
  }
  j["ensembles"] = std::move(cells);
  return j;
}

std::string provenance_block(const JobConfig& cfg, const char* comment) {
  std::ostringstream out;
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  out << comment << " ccgldpc " << kToolVersion << "\n";
  out << comment << " config-hash fnv1a:" << hash << "\n";
  out << comment << " de-target " << format_double(cfg.de.target)
      << " de-stall-tol " << format_double(cfg.de.stall_tol)
      << " de-max-iterations " << cfg.de.max_iterations << "\n";
  out << comment << " resolution " << format_double(cfg.resolution)
      << " map-resolution " << format_double(cfg.map_resolution) << "\n";
  out << comment << " alpha " << format_double(cfg.alpha) << " seed "
      << cfg.seed << "\n";
  out << comment << " libs eigen " << EIGEN_WORLD_VERSION << "."
      << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << " json "
      << NLOHMANN_JSON_VERSION_MAJOR << "." << NLOHMANN_JSON_VERSION_MINOR
      << "." << NLOHMANN_JSON_VERSION_PATCH << "\n";
  return out.str();
}

}  // namespace

JobConfig parse_job_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(root, "config",
                      {"analysis", "ensembles", "resolution",
                       "map_resolution", "de", "alpha", "block_sections",
                       "cap", "structured_bcc", "transfer_grid",
                       "mc_sections", "output", "format", "seed",
                       "workers"});

  JobConfig cfg;
  Analysis default_analysis =
      parse_analysis(root.value("analysis", "bp"));
  cfg.resolution = root.value("resolution", cfg.resolution);
  cfg.map_resolution = root.value("map_resolution", cfg.map_resolution);
  if (root.contains("de")) {
    const json& d = root.at("de");
    reject_unknown_keys(d, "de", {"target", "stall_tol", "max_iterations"});
    cfg.de.target = d.value("target", cfg.de.target);
    cfg.de.stall_tol = d.value("stall_tol", cfg.de.stall_tol);
    cfg.de.max_iterations =
        d.value("max_iterations", cfg.de.max_iterations);
  }
  cfg.alpha = root.value("alpha", cfg.alpha);
  cfg.cap = root.value("cap", cfg.cap);
  cfg.structured_bcc = root.value("structured_bcc", cfg.structured_bcc);
  if (root.contains("transfer_grid")) {
    cfg.transfer_grid =
        root.at("transfer_grid").get<std::vector<double>>();
  }
  cfg.mc_sections = root.value("mc_sections", cfg.mc_sections);
  cfg.output = root.value("output", cfg.output);
  cfg.format = root.value("format", cfg.format);
  if (cfg.format != "csv" && cfg.format != "json") {
    throw ConfigError("format must be 'csv' or 'json'");
  }
  cfg.seed = root.value("seed", cfg.seed);
  cfg.workers = root.value("workers", cfg.workers);

  std::vector<int> default_sections;
  if (root.contains("block_sections")) {
    default_sections = root.at("block_sections").get<std::vector<int>>();
  }

  if (!root.contains("ensembles") || !root.at("ensembles").is_array() ||
      root.at("ensembles").empty()) {
    throw ConfigError("config needs a nonempty 'ensembles' array");
  }
  for (const json& e : root.at("ensembles")) {
    JobCell cell;
    cell.spec = parse_spec_entry(e);
    cell.analysis = e.contains("analysis")
                        ? parse_analysis(e.at("analysis").get<std::string>())
                        : default_analysis;
    cell.block_sections =
        e.contains("block_sections")
            ? e.at("block_sections").get<std::vector<int>>()
            : default_sections;
    try {
      validate(cell.spec);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("invalid ensemble: ") + err.what());
    }
    cfg.cells.push_back(std::move(cell));
  }

  Category cat = category_of(cfg.cells.front().analysis);
  for (const JobCell& c : cfg.cells) {
    if (category_of(c.analysis) != cat) {
      throw ConfigError(
          "all cells must share one artifact schema; mixing " +
          analysis_name(cfg.cells.front().analysis) + " with " +
          analysis_name(c.analysis) + " is not supported");
    }
  }
  return cfg;
}

std::uint64_t config_hash(const JobConfig& cfg) {
  std::string canon = canonical_config(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

JobResult run_job(const JobConfig& cfg) {
  if (cfg.cells.empty()) throw ConfigError("no cells to run");

  int workers = cfg.workers;
  if (workers <= 0) {
    const char* env = std::getenv("CCGLDPC_WORKERS");
    workers = env != nullptr ? std::atoi(env) : 1;
  }
  workers = std::clamp<int>(workers, 1,
                            static_cast<int>(cfg.cells.size()));

  Category cat = category_of(cfg.cells.front().analysis);
  std::vector<std::string> cols =
      columns_for(cat, cfg.mc_sections > 0);

  std::vector<CellResult> results(cfg.cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t j = next.fetch_add(1);
      if (j >= cfg.cells.size()) return;
      auto t0 = std::chrono::steady_clock::now();
      try {
        results[j] = run_cell(cfg.cells[j], cfg, cols);
      } catch (const std::exception& e) {
        results[j].error = e.what();
        results[j].summary = describe_cell(cfg.cells[j]) + " failed";
      }
      results[j].seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  JobResult out;
  for (std::size_t j = 0; j < results.size(); ++j) {
    CellResult& r = results[j];
    if (!r.error.empty()) {
      out.exit_code = 1;
      Row er = base_row(cfg.cells[j], cols.size());
      if (cat == Category::kThreshold) {
        er.fields[5] = analysis_name(cfg.cells[j].analysis);
      }
      er.fields.back() = r.error;
      r.rows.push_back(std::move(er));
    }
    out.logs.push_back(
        {r.summary.empty() ? r.error : r.summary, r.seconds,
         !r.error.empty()});
  }

  std::ostringstream text;
  if (cfg.format == "csv") {
    text << provenance_block(cfg, "#");
    for (std::size_t c = 0; c < cols.size(); ++c) {
      text << cols[c] << (c + 1 < cols.size() ? "," : "\n");
    }
    for (const CellResult& r : results) {
      for (const Row& row : r.rows) {
        for (std::size_t c = 0; c < row.fields.size(); ++c) {
          text << row.fields[c] << (c + 1 < row.fields.size() ? "," : "\n");
        }
      }
    }
  } else {
    ordered_json doc;
    doc["provenance"] = {
        {"tool", std::string("ccgldpc ") + kToolVersion},
        {"config_hash", config_hash(cfg)},
        {"de_target", cfg.de.target},
        {"de_stall_tol", cfg.de.stall_tol},
        {"resolution", cfg.resolution},
        {"map_resolution", cfg.map_resolution},
        {"alpha", cfg.alpha},
        {"seed", cfg.seed}};
    doc["columns"] = cols;
    ordered_json rows = ordered_json::array();
    for (const CellResult& r : results) {
      for (const Row& row : r.rows) rows.push_back(row.fields);
    }
    doc["rows"] = std::move(rows);
    text << doc.dump(2) << "\n";
  }
  out.artifact = text.str();

  if (!cfg.output.empty()) {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) {
      throw std::runtime_error("cannot open output file " + cfg.output);
    }
    f << out.artifact;
    if (!f.good()) {
      throw std::runtime_error("failed writing " + cfg.output);
    }
  }
  return out;
}

}  // namespace ccgldpc
