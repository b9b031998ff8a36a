// Command-line front end for the four-bar torque-surrogate pipeline:
//   fourbar_cli <sample|fit|validate|optimize|report> --config <path>
// Exit codes: 0 success, 1 configuration/usage error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fourbar/pipeline.hpp"

namespace {

void print_plan(const fourbar::SamplingPlan& plan) {
  for (int i = 0; i < plan.lines(); ++i) {
    const fourbar::Vec3 s = plan.origin_shift + plan.shifts[i];
    std::printf("line %d: start (%.4f, %.4f, %.4f) mm, samples %d\n", i, s[0], s[1], s[2],
                plan.counts[i]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"four-bar mechanism torque optimization pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string cache_override, model_override;
  std::uint64_t seed = 0;
  int workers = 0;
  app.add_option("--config", config_path, "pipeline configuration (JSON)")->required();
  app.add_option("--cache", cache_override, "override the sample-cache path");
  app.add_option("--model", model_override, "override the model path");
  auto* seed_opt = app.add_option("--seed", seed, "override the validation seed");
  app.add_option("--workers", workers, "override the worker-thread count");

  auto* cmd_sample = app.add_subcommand("sample", "simulate the training lines");
  auto* cmd_fit = app.add_subcommand("fit", "fit the blended exponential model");
  auto* cmd_validate = app.add_subcommand("validate", "hold-out accuracy of the model");
  auto* cmd_optimize = app.add_subcommand("optimize", "grid + local search, write the report");
  auto* cmd_report = app.add_subcommand("report", "print the last optimization report");
  for (auto* sub : {cmd_sample, cmd_fit, cmd_validate, cmd_optimize, cmd_report})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    const fourbar::PipelineConfig config = fourbar::load_config(config_path);
    const std::string cache_path =
        cache_override.empty() ? config.outputs.cache : cache_override;
    const std::string model_path =
        model_override.empty() ? config.outputs.model : model_override;

    if (*cmd_sample) {
      fourbar::SampleCache cache;
      if (std::filesystem::exists(cache_path)) cache = fourbar::SampleCache::load(cache_path);
      const auto summary = fourbar::cmd_sample(config, cache);
      cache.save(cache_path);
      print_plan(summary.plan);
      std::printf("simulated %d, reused %d, usable samples %d -> %s\n", summary.simulated,
                  summary.reused, summary.total_ok, cache_path.c_str());
    } else if (*cmd_fit) {
      const auto cache = fourbar::SampleCache::load(cache_path);
      const auto summary = fourbar::cmd_fit(config, cache, model_path);
      for (int i = 0; i < int(summary.terms_per_line.size()); ++i)
        std::printf("line %d: %d exponential terms over %d samples\n", i,
                    summary.terms_per_line[i], summary.plan.counts[i]);
      std::printf("blended model: %d lines, %d terms -> %s\n", summary.plan.lines(),
                  summary.total_terms, model_path.c_str());
    } else if (*cmd_validate) {
      std::optional<std::uint64_t> seed_arg;
      if (seed_opt->count() > 0) seed_arg = seed;
      const auto summary =
          fourbar::cmd_validate(config, model_path, config.outputs.validation, seed_arg);
      std::printf("holdout lines %d (seed %llu), %d points\n", summary.lines_used,
                  static_cast<unsigned long long>(summary.seed), summary.stats.n_points);
      std::printf("rmse %.6g Nm, max |err| %.6g Nm", summary.stats.rmse,
                  summary.stats.max_abs_err);
      if (summary.stats.rmse_below)
        std::printf(", rmse below threshold %.6g Nm (%d pts)", *summary.stats.rmse_below,
                    summary.stats.n_below);
      std::printf(" -> %s\n", config.outputs.validation.c_str());
    } else if (*cmd_optimize) {
      const auto summary =
          fourbar::cmd_optimize(config, model_path, config.outputs.report, workers);
      std::printf("original  T_RMS %.6f Nm at (%.3f, %.3f, %.3f)\n", summary.original_value,
                  config.optimization.original_design[0], config.optimization.original_design[1],
                  config.optimization.original_design[2]);
      std::printf("local     T_RMS %.6f Nm at (%.3f, %.3f, %.3f)\n", summary.local.value,
                  summary.local.argmin[0], summary.local.argmin[1], summary.local.argmin[2]);
      std::printf("global    T_RMS %.6f Nm at (%.3f, %.3f, %.3f)%s\n", summary.global_simulated,
                  summary.global.argmin[0], summary.global.argmin[1], summary.global.argmin[2],
                  summary.discrepancy_flag ? "  [model/sim discrepancy]" : "");
      std::printf("report -> %s\n", config.outputs.report.c_str());
    } else if (*cmd_report) {
      std::ifstream in(config.outputs.report);
      if (!in)
        throw fourbar::ConfigError("no report at '" + config.outputs.report +
                                   "'; run optimize first");
      std::cout << in.rdbuf();
    }
  } catch (const fourbar::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fourbar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
