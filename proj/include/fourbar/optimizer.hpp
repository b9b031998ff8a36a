#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "fourbar/hull.hpp"
#include "fourbar/motion.hpp"

namespace fourbar {

// Fixed geometry shared by every candidate design during a search.
struct DesignFrame {
  Vec2 pivot_c;
  Elbow elbow = Elbow::up;

  FourBarDesign design_at(const Vec3& lengths) const {
    return FourBarDesign{lengths[0], lengths[1], lengths[2], pivot_c, elbow};
  }
};

struct OptimumReport {
  Vec3 argmin = Vec3::Zero();
  double value = 0.0;  // model value for grid search, simulated for local search
  std::array<int, 3> grid_resolution = {0, 0, 0};
  long evaluated = 0;           // nodes examined / simulations run
  long feasible_evaluated = 0;  // nodes that passed feasibility + hull filters
  std::vector<std::pair<Vec3, double>> top_k;
};

struct GridSpec {
  std::array<int, 3> resolution = {215, 215, 215};
  // search box; when absent the trust-region bounding box is used
  std::optional<std::pair<Vec3, Vec3>> box;
  int top_k = 10;
  int workers = 1;
};

// Exhaustive evaluation of the surrogate on an axis-aligned grid, filtered by
// static + dynamic feasibility and trust-region membership. Deterministic for
// any worker count; ties broken toward the lexicographically smallest design.
// Throws EmptyRegionError when no node passes the filters.
OptimumReport grid_search(const BlendedModel& model, const TrustRegion& region,
                          const DesignFrame& frame, const PtpTask& task, const GridSpec& spec);

// Compass / coordinate pattern search on an arbitrary objective: initial step
// 5% of each axis range, halved when a poll cycle fails, stopping at 0.01%.
// Infeasible probes are rejected. Returns the best visited point.
OptimumReport local_search_baseline(const std::function<SimOutcome(const Vec3&)>& objective,
                                    const Vec3& start, const std::pair<Vec3, Vec3>& box);

}  // namespace fourbar
