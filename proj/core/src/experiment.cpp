#include "misodof/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "json.hpp"

#ifndef MISODOF_VERSION
#define MISODOF_VERSION "0.0.0"
#endif

namespace misodof {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json point_json(const DofPoint& p) { return json::array({p.d1, p.d2}); }

}  // namespace

std::string version() { return MISODOF_VERSION; }

void ExperimentConfig::validate() const {
  if (schemes.empty()) throw std::invalid_argument("config: schemes must not be empty");
  if (p_grid_db.empty()) throw std::invalid_argument("config: p_grid_db must not be empty");
  for (std::size_t i = 1; i < p_grid_db.size(); ++i) {
    if (!(p_grid_db[i] > p_grid_db[i - 1])) throw std::invalid_argument("config: p_grid_db must be strictly increasing");
  }
  if (n_trials < 1) throw std::invalid_argument("config: n_trials must be >= 1");
  if (n_cycles < 1) throw std::invalid_argument("config: n_cycles must be >= 1");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("config: tolerance must be >= 0");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  static const std::set<std::string> known{"alpha1",  "alpha2", "schemes",    "p_grid_db", "n_trials",
                                           "n_cycles", "seed",   "output_dir", "tolerance", "threads"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  ExperimentConfig c;
  try {
    c.quality = CsitQuality(j.value("alpha1", c.quality.alpha1()), j.value("alpha2", c.quality.alpha2()));
    if (j.contains("schemes")) c.schemes = j.at("schemes").get<std::vector<std::string>>();
    if (j.contains("p_grid_db")) c.p_grid_db = j.at("p_grid_db").get<std::vector<double>>();
    c.n_trials = j.value("n_trials", c.n_trials);
    c.n_cycles = j.value("n_cycles", c.n_cycles);
    c.seed = j.value("seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.tolerance = j.value("tolerance", c.tolerance);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["alpha1"] = quality.alpha1();
  j["alpha2"] = quality.alpha2();
  j["schemes"] = schemes;
  j["p_grid_db"] = p_grid_db;
  j["n_trials"] = n_trials;
  j["n_cycles"] = n_cycles;
  j["seed"] = seed;
  j["output_dir"] = output_dir.string();
  j["tolerance"] = tolerance;
  j["threads"] = threads;
  return j.dump(2);
}

bool RunReport::all_pass() const noexcept {
  for (const auto& r : results) {
    if (!r.pass) return false;
  }
  return !results.empty();
}

RunReport evaluate(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  std::vector<SchemePlan> plans;
  for (const auto& name : config.schemes) plans.push_back(build_preset(name, config.quality, config.n_cycles));

  std::vector<SnrPoint> grid;
  for (double db : config.p_grid_db) grid.push_back(SnrPoint::from_db(db, config.quality));

  RunReport report{config, dof_region(config.quality), {}, version(), 0.0};
  MonteCarloOptions options;
  options.n_trials = config.n_trials;
  options.seed = config.seed;
  options.threads = config.threads;

  for (std::size_t i = 0; i < plans.size(); ++i) {
    const SchemePlan& plan = plans[i];
    SchemeResult r;
    r.requested = config.schemes[i];
    r.scheme = plan.name;
    r.estimate = estimate_dof(plan, grid, options);
    r.target = plan.predicted_dof;
    r.finite_target = plan.finite_dof();
    r.channel_uses = plan.channel_uses();
    r.max_deviation = std::max(std::abs(r.estimate.slope.d1 - r.target.d1), std::abs(r.estimate.slope.d2 - r.target.d2));
    r.pass = r.max_deviation <= config.tolerance;
    r.inside_region = contains(report.region, r.estimate.slope, config.tolerance);
    r.outer_bound_slack = outer_bound_slack(config.quality, r.estimate.slope);
    report.results.push_back(std::move(r));
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string ledger_csv(const RunReport& report) {
  std::ostringstream out;
  out << "# misodof ledger v" << kCsvVersion << ", P = 10^(P_dB/10), rates in bits per channel use\n";
  out << "scheme,alpha1,alpha2,P_dB,R1,R2,uses,d1_hat,d2_hat,stderr1,stderr2,seed\n";
  const auto& q = report.config.quality;
  for (const auto& r : report.results) {
    for (std::size_t i = 0; i < r.estimate.points.size(); ++i) {
      const auto& pt = r.estimate.points[i];
      out << r.scheme << ',' << fmt(q.alpha1()) << ',' << fmt(q.alpha2()) << ','
          << fmt(report.config.p_grid_db[i]) << ',' << fmt(pt.rate1) << ',' << fmt(pt.rate2) << ','
          << fmt(r.channel_uses) << ',' << fmt(r.estimate.slope.d1) << ',' << fmt(r.estimate.slope.d2) << ','
          << fmt(r.estimate.std_error[0]) << ',' << fmt(r.estimate.std_error[1]) << ',' << report.config.seed
          << '\n';
    }
  }
  return out.str();
}

std::string report_json(const RunReport& report, int indent) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["version"] = report.version;
  j["config"] = json::parse(report.config.to_json());
  j["wall_seconds"] = report.wall_seconds;
  j["region_vertices"] = json::parse(vertices_json(report.region));
  j["all_pass"] = report.all_pass();
  json results = json::array();
  for (const auto& r : report.results) {
    json e;
    e["requested"] = r.requested;
    e["scheme"] = r.scheme;
    e["slope"] = point_json(r.estimate.slope);
    e["std_error"] = {r.estimate.std_error[0], r.estimate.std_error[1]};
    e["target"] = point_json(r.target);
    e["finite_target"] = point_json(r.finite_target);
    e["channel_uses"] = r.channel_uses;
    e["max_deviation"] = r.max_deviation;
    e["pass"] = r.pass;
    e["inside_region"] = r.inside_region;
    e["outer_bound_slack"] = {r.outer_bound_slack.first, r.outer_bound_slack.second};
    json pts = json::array();
    for (const auto& p : r.estimate.points) pts.push_back({{"log2_p", p.log2_p}, {"R1", p.rate1}, {"R2", p.rate2}});
    e["points"] = pts;
    results.push_back(e);
  }
  j["results"] = results;
  return j.dump(indent);
}

std::string region_json(const CsitQuality& quality, int indent) {
  const DofRegion region = dof_region(quality);
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["alpha1"] = quality.alpha1();
  j["alpha2"] = quality.alpha2();
  j["case"] = quality.max_sum_on_upper_edge() ? "upper-edge" : "three-line";
  j["vertices"] = json::parse(vertices_json(region));
  json corners = json::array();
  for (const auto& c : corner_points(quality)) corners.push_back(point_json(c));
  j["corners"] = corners;
  json hs = json::array();
  for (const auto& h : region.halfspaces) hs.push_back({{"a", h.a()}, {"b", h.b()}, {"c", h.c()}});
  j["halfspaces"] = hs;
  return j.dump(indent);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw fs::filesystem_error("cannot create directory", path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw fs::filesystem_error("cannot rename into place", tmp, path, ec);
  }
}

void region_export(const CsitQuality& quality, const std::filesystem::path& path) {
  write_atomic(path, region_json(quality) + "\n");
}

RunReport run(const ExperimentConfig& config) {
  RunReport report = evaluate(config);
  write_atomic(config.output_dir / "ledger.csv", ledger_csv(report));
  write_atomic(config.output_dir / "report.json", report_json(report) + "\n");
  region_export(config.quality, config.output_dir / "region.json");
  return report;
}

std::string quality_label(const CsitQuality& quality) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "a1_%g_a2_%g", quality.alpha1(), quality.alpha2());
  return buf;
}

std::vector<SweepEntry> sweep(std::span<const CsitQuality> qualities, const ExperimentConfig& base) {
  if (qualities.empty()) throw std::invalid_argument("sweep: quality list is empty");
  std::vector<SweepEntry> entries;
  json index = json::array();
  for (const auto& q : qualities) {
    ExperimentConfig c = base;
    c.quality = q;
    c.output_dir = base.output_dir / quality_label(q);
    SweepEntry e{q, c.output_dir, std::nullopt, {}};
    try {
      e.report = run(c);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    json row{{"alpha1", q.alpha1()}, {"alpha2", q.alpha2()}, {"directory", quality_label(q)}};
    if (e.report) {
      row["status"] = e.pass() ? "pass" : "fail";
      json schemes = json::array();
      for (const auto& r : e.report->results) {
        schemes.push_back({{"scheme", r.scheme}, {"slope", point_json(r.estimate.slope)}, {"pass", r.pass}});
      }
      row["schemes"] = schemes;
    } else {
      row["status"] = "error";
      row["error"] = e.error;
    }
    index.push_back(row);
    entries.push_back(std::move(e));
  }
  json top{{"schema_version", kReportSchemaVersion}, {"version", version()}, {"runs", index}};
  write_atomic(base.output_dir / "index.json", top.dump(2) + "\n");
  return entries;
}

}  // namespace misodof
