#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "misodof/dof_geometry.hpp"
#include "misodof/rate_evaluator.hpp"

namespace misodof {

std::string version();

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kCsvVersion = 1;

struct ExperimentConfig {
  CsitQuality quality{0.3, 0.5};
  // Preset names; "auto" picks the max-sum scheme allowed by the quality.
  std::vector<std::string> schemes{"auto"};
  std::vector<double> p_grid_db{60.0, 80.0, 100.0, 120.0};
  std::size_t n_trials = 2000;
  std::size_t n_cycles = 50;
  std::uint64_t seed = 7;
  std::filesystem::path output_dir{"misodof-out"};
  double tolerance = 0.05;
  unsigned threads = 0;

  /// Throws std::invalid_argument on an empty scheme list, a grid that is
  /// not strictly increasing, zero trials or zero cycles, or tolerance < 0.
  void validate() const;

  /// Keys mirror the field names; quality is given as alpha1/alpha2. Missing
  /// keys keep their defaults, unknown keys are rejected.
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  std::string to_json() const;
};

struct SchemeResult {
  std::string requested;
  std::string scheme;  // resolved preset name
  DofEstimate estimate;
  DofPoint target;
  DofPoint finite_target;  // bookkeeping DoF at the configured cycle count
  double channel_uses = 0.0;
  double max_deviation = 0.0;
  bool pass = false;
  bool inside_region = false;
  std::pair<double, double> outer_bound_slack{0.0, 0.0};
};

struct RunReport {
  ExperimentConfig config;
  DofRegion region;
  std::vector<SchemeResult> results;
  std::string version;
  double wall_seconds = 0.0;

  bool all_pass() const noexcept;
};

/// Builds every requested plan first, so a scheme that does not fit the
/// quality fails before any simulation starts, then estimates each slope.
RunReport evaluate(const ExperimentConfig& config);

/// evaluate() plus ledger.csv, report.json and region.json in output_dir,
/// each written to a temporary file and renamed into place.
RunReport run(const ExperimentConfig& config);

/// One row per (scheme, grid point). Deterministic for a fixed config.
std::string ledger_csv(const RunReport& report);
std::string report_json(const RunReport& report, int indent = 2);

/// Polygon, corner points and the active case for redrawing the region.
std::string region_json(const CsitQuality& quality, int indent = 2);
void region_export(const CsitQuality& quality, const std::filesystem::path& path);

struct SweepEntry {
  CsitQuality quality;
  std::filesystem::path directory;
  std::optional<RunReport> report;
  std::string error;  // set when the run threw

  bool pass() const noexcept { return report && report->all_pass(); }
};

/// Runs base with each quality substituted, under base.output_dir/<label>,
/// and writes index.json there. Failed runs are recorded and skipped.
/// Throws std::invalid_argument on an empty list.
std::vector<SweepEntry> sweep(std::span<const CsitQuality> qualities, const ExperimentConfig& base);

std::string quality_label(const CsitQuality& quality);

void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace misodof
