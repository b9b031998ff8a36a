#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fourbar/blended.hpp"
#include "fourbar/motion.hpp"
#include "fourbar/optimizer.hpp"

namespace fourbar {

inline constexpr const char* kSimVersionTag = "fourbar-sim-1";

struct SamplingConfig {
  Vec3 delta = Vec3(0.0, 0.503, 0.920);
  int lines = 7;
  std::uint64_t anchor_seed = 77;
  int anchor_candidates = 400;
  int min_run = 14;   // shortest acceptable feasible run per line
  int max_run = 60;   // cap on samples per line
  std::optional<std::vector<Vec3>> explicit_shifts;  // bypasses anchor selection
  std::optional<Vec3> explicit_origin;
};

struct FittingConfig {
  std::optional<int> order;
  double svd_tol = 1e-8;
};

struct ValidationConfig {
  int lines = 10;
  std::uint64_t seed = 1;
  double spacing = 0.9;  // mm between holdout samples
  int max_steps = 20;    // per side of the base point
  double threshold = 5.0;  // N m split for the restricted RMSE
};

struct OptimizationConfig {
  std::array<int, 3> resolution = {101, 101, 101};
  int top_k = 10;
  int workers = 1;
  Vec3 original_design = Vec3::Zero();
};

struct OutputPaths {
  std::string cache = "cache.csv";
  std::string model = "model.json";
  std::string validation = "validation.csv";
  std::string report = "report.txt";
};

struct PipelineConfig {
  std::array<std::pair<double, double>, 3> design_box;
  DesignFrame frame;
  EndEffectorMap end_effector{0.0, 1.0};
  PtpTask task{0.0, 1.0};
  MotionLaw law;
  MassModel mass;
  SamplingConfig sampling;
  FittingConfig fitting;
  ValidationConfig validation;
  OptimizationConfig optimization;
  OutputPaths outputs;

  bool in_box(const Vec3& u) const {
    for (int a = 0; a < 3; ++a)
      if (u[a] < design_box[a].first || u[a] > design_box[a].second) return false;
    return true;
  }
  std::pair<Vec3, Vec3> box_bounds() const {
    return {Vec3(design_box[0].first, design_box[1].first, design_box[2].first),
            Vec3(design_box[0].second, design_box[1].second, design_box[2].second)};
  }
};

// Throws ConfigError with a named message for every invariant violation.
PipelineConfig load_config(const std::string& path);

struct CacheRow {
  int line = 0;
  int step = 0;
  Vec3 u = Vec3::Zero();
  bool ok = false;
  double t_rms = 0.0;
  double t_max = 0.0;
  std::string reason;
};

// CSV-backed store of simulated samples, keyed by (line, step), protected by
// a checksum trailer. Rows round-trip bit-exactly (hexfloat columns).
struct SampleCache {
  std::string sim_tag = kSimVersionTag;
  std::map<std::pair<int, int>, CacheRow> rows;

  static SampleCache load(const std::string& path);  // ConfigError on checksum mismatch
  void save(const std::string& path) const;
};

// Line layout chosen by the deterministic anchor-selection rule (greedy
// farthest-point among feasible run starts); counts are left unset until the
// samples exist.
SamplingPlan plan_lines(const PipelineConfig& config);

struct SampleSummary {
  SamplingPlan plan;       // counts filled with the realized N_i
  int simulated = 0;       // fresh simulator runs
  int reused = 0;          // rows served from the cache
  int total_ok = 0;        // training samples available to the fitter
};

SampleSummary cmd_sample(const PipelineConfig& config, SampleCache& cache);

struct FitSummary {
  SamplingPlan plan;
  std::vector<int> terms_per_line;
  int total_terms = 0;
};

FitSummary cmd_fit(const PipelineConfig& config, const SampleCache& cache,
                   const std::string& model_path);

struct ValidationSummary {
  ValidationStats stats;
  int lines_used = 0;
  std::uint64_t seed = 0;
};

ValidationSummary cmd_validate(const PipelineConfig& config, const std::string& model_path,
                               const std::string& out_csv,
                               std::optional<std::uint64_t> seed_override = std::nullopt);

struct OptimizeSummary {
  OptimumReport global;          // value = model value at argmin
  double global_simulated = 0.0; // argmin re-simulated once
  OptimumReport local;           // simulated values throughout
  double original_value = 0.0;
  double original_max = 0.0;
  double global_max = 0.0;
  double local_max = 0.0;
  bool discrepancy_flag = false; // |model - sim| > 3x validation RMSE
};

OptimizeSummary cmd_optimize(const PipelineConfig& config, const std::string& model_path,
                             const std::string& report_path, int workers_override = 0);

// Reads the validation CSV trailer written by cmd_validate.
std::optional<ValidationStats> read_validation_summary(const std::string& path);

}  // namespace fourbar
