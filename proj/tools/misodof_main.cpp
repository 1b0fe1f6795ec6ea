// misodof: region export, scheme experiments and plan inspection.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "misodof/experiment.hpp"
#include "misodof/scheme.hpp"

using namespace misodof;

namespace {

struct Overrides {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::vector<std::string> schemes;
  std::vector<double> grid;
  std::size_t trials = 0;
  std::size_t cycles = 0;
  std::uint64_t seed = 0;
  std::string out;
  double tolerance = 0.0;
  unsigned threads = 0;
  std::string config_path;
};

void add_experiment_options(CLI::App* app, Overrides& o, bool with_quality) {
  app->add_option("-c,--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  if (with_quality) {
    app->add_option("--alpha1", o.alpha1, "CSIT exponent of user 1");
    app->add_option("--alpha2", o.alpha2, "CSIT exponent of user 2");
  }
  app->add_option("-s,--scheme", o.schemes, "preset name, repeatable (default auto)");
  app->add_option("--grid", o.grid, "SNR grid in dB, P = 10^(dB/10)")->delimiter(',');
  app->add_option("--trials", o.trials, "Monte-Carlo trials per SNR point");
  app->add_option("--cycles", o.cycles, "cycles per scheme run");
  app->add_option("--seed", o.seed, "base seed");
  app->add_option("-o,--out", o.out, "output directory");
  app->add_option("--tolerance", o.tolerance, "slope acceptance slack");
  app->add_option("--threads", o.threads, "worker threads, 0 for all cores");
}

bool given(const CLI::App* app, const std::string& name) {
  const CLI::Option* opt = app->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

ExperimentConfig make_config(const CLI::App* app, const Overrides& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config_path);
  if (given(app, "--alpha1") || given(app, "--alpha2")) {
    c.quality = CsitQuality(given(app, "--alpha1") ? o.alpha1 : c.quality.alpha1(),
                            given(app, "--alpha2") ? o.alpha2 : c.quality.alpha2());
  }
  if (given(app, "--scheme")) c.schemes = o.schemes;
  if (given(app, "--grid")) c.p_grid_db = o.grid;
  if (given(app, "--trials")) c.n_trials = o.trials;
  if (given(app, "--cycles")) c.n_cycles = o.cycles;
  if (given(app, "--seed")) c.seed = o.seed;
  if (given(app, "--out")) c.output_dir = o.out;
  if (given(app, "--tolerance")) c.tolerance = o.tolerance;
  if (given(app, "--threads")) c.threads = o.threads;
  c.validate();
  return c;
}

void print_summary(const RunReport& report) {
  std::printf("alpha = (%g, %g)  P grid %g..%g dB  %zu trials  %zu cycles  seed %llu\n",
              report.config.quality.alpha1(), report.config.quality.alpha2(), report.config.p_grid_db.front(),
              report.config.p_grid_db.back(), report.config.n_trials, report.config.n_cycles,
              static_cast<unsigned long long>(report.config.seed));
  std::printf("%-12s %9s %9s %9s %9s %9s %9s  %s\n", "scheme", "d1_hat", "d2_hat", "d1", "d2", "stderr1", "stderr2",
              "result");
  for (const auto& r : report.results) {
    std::printf("%-12s %9.4f %9.4f %9.4f %9.4f %9.2e %9.2e  %s%s\n", r.scheme.c_str(), r.estimate.slope.d1,
                r.estimate.slope.d2, r.target.d1, r.target.d2, r.estimate.std_error[0], r.estimate.std_error[1],
                r.pass ? "pass" : "FAIL", r.inside_region ? "" : " (outside region)");
  }
  std::printf("wall %.2f s\n", report.wall_seconds);
}

CsitQuality parse_quality(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--quality", "expected alpha1:alpha2, got " + s);
  return CsitQuality(std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-user MISO broadcast channel DoF simulator"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  double ra1 = 0.0, ra2 = 0.0;
  std::string region_out;
  auto* region = app.add_subcommand("region", "export the DoF region polygon and corner points");
  region->add_option("--alpha1", ra1, "CSIT exponent of user 1")->required();
  region->add_option("--alpha2", ra2, "CSIT exponent of user 2")->required();
  region->add_option("-o,--out", region_out, "write JSON here instead of stdout");

  Overrides run_opts;
  auto* run_cmd = app.add_subcommand("run", "estimate DoF slopes for the configured schemes");
  add_experiment_options(run_cmd, run_opts, true);

  Overrides sweep_opts;
  std::vector<std::string> sweep_qualities;
  auto* sweep_cmd = app.add_subcommand("sweep", "run the configuration over several CSIT qualities");
  add_experiment_options(sweep_cmd, sweep_opts, false);
  sweep_cmd->add_option("-q,--quality", sweep_qualities, "alpha1:alpha2, repeatable")->required();

  std::string vscheme = "auto";
  double va1 = 0.3, va2 = 0.5;
  std::size_t vcycles = 1;
  bool vjson = false;
  auto* validate_cmd = app.add_subcommand("validate", "print plan diagnostics and per-slot layer tables");
  validate_cmd->add_option("-s,--scheme", vscheme, "preset name");
  validate_cmd->add_option("--alpha1", va1, "CSIT exponent of user 1");
  validate_cmd->add_option("--alpha2", va2, "CSIT exponent of user 2");
  validate_cmd->add_option("--cycles", vcycles, "cycles to build");
  validate_cmd->add_flag("--json", vjson, "print the plan as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*region) {
      const CsitQuality q(ra1, ra2);
      if (region_out.empty()) {
        std::cout << region_json(q) << '\n';
      } else {
        region_export(q, region_out);
      }
      return 0;
    }
    if (*run_cmd) {
      const RunReport report = run(make_config(run_cmd, run_opts));
      print_summary(report);
      std::printf("wrote %s\n", report.config.output_dir.string().c_str());
      return report.all_pass() ? 0 : 2;
    }
    if (*sweep_cmd) {
      const ExperimentConfig base = make_config(sweep_cmd, sweep_opts);
      std::vector<CsitQuality> qualities;
      for (const auto& s : sweep_qualities) qualities.push_back(parse_quality(s));
      const auto entries = sweep(qualities, base);
      bool ok = true;
      for (const auto& e : entries) {
        if (e.report) {
          print_summary(*e.report);
        } else {
          std::printf("alpha = (%g, %g)  error: %s\n", e.quality.alpha1(), e.quality.alpha2(), e.error.c_str());
        }
        ok = ok && e.pass();
      }
      std::printf("wrote %s\n", (base.output_dir / "index.json").string().c_str());
      return ok ? 0 : 2;
    }
    if (*validate_cmd) {
      const SchemePlan plan = build_preset(vscheme, CsitQuality(va1, va2), vcycles);
      const auto diags = validate_plan(plan);
      if (vjson) {
        std::cout << plan_to_json(plan) << '\n';
      } else {
        std::cout << plan_tables(plan);
      }
      for (const auto& d : diags) std::cerr << "diagnostic: " << d << '\n';
      if (diags.empty()) std::cerr << "plan " << plan.name << ": ok\n";
      return diags.empty() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "misodof: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
