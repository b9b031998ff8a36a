#include "fourbar/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "fourbar/errors.hpp"

namespace fourbar {

namespace {

struct GridNode {
  double value;
  int i, j, k;
  Vec3 u;
};

bool node_less(const GridNode& a, const GridNode& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.u[0] != b.u[0]) return a.u[0] < b.u[0];
  if (a.u[1] != b.u[1]) return a.u[1] < b.u[1];
  return a.u[2] < b.u[2];
}

bool adjacent(const GridNode& a, const GridNode& b) {
  return std::abs(a.i - b.i) <= 1 && std::abs(a.j - b.j) <= 1 && std::abs(a.k - b.k) <= 1;
}

// Bounded sorted candidate buffer: enough raw nodes that adjacency
// suppression can still produce the requested distinct top-K.
class CandidateBuffer {
 public:
  explicit CandidateBuffer(size_t cap) : cap_(cap) {}

  void offer(const GridNode& n) {
    if (nodes_.size() == cap_ && !node_less(n, nodes_.back())) return;
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), n, node_less);
    nodes_.insert(it, n);
    if (nodes_.size() > cap_) nodes_.pop_back();
  }

  const std::vector<GridNode>& sorted() const { return nodes_; }

 private:
  size_t cap_;
  std::vector<GridNode> nodes_;
};

}  // namespace

OptimumReport grid_search(const BlendedModel& model, const TrustRegion& region,
                          const DesignFrame& frame, const PtpTask& task, const GridSpec& spec) {
  for (int r : spec.resolution)
    if (r < 2) throw EmptyRegionError("grid resolution must be >= 2 per axis");

  const auto [lo, hi] = spec.box ? *spec.box : trust_region_bounds(region);
  std::array<Eigen::VectorXd, 3> axes;
  for (int a = 0; a < 3; ++a)
    axes[a] = Eigen::VectorXd::LinSpaced(spec.resolution[a], lo[a], hi[a]);

  const int workers = std::max(1, spec.workers);
  const size_t buffer_cap = size_t(spec.top_k) * 32 + 32;
  std::vector<CandidateBuffer> buffers(workers, CandidateBuffer(buffer_cap));
  std::vector<long> visited(workers, 0), passed(workers, 0);
  std::vector<long> rej_hull(workers, 0), rej_static(workers, 0), rej_dynamic(workers, 0);

  const auto run_slab = [&](int w, int i_begin, int i_end) {
    CandidateBuffer& buf = buffers[w];
    for (int i = i_begin; i < i_end; ++i)
      for (int j = 0; j < spec.resolution[1]; ++j)
        for (int k = 0; k < spec.resolution[2]; ++k) {
          ++visited[w];
          const Vec3 u(axes[0][i], axes[1][j], axes[2][k]);
          if (!hull_membership(region, u)) {
            ++rej_hull[w];
            continue;
          }
          const FourBarDesign d = frame.design_at(u);
          if (!is_static_feasible(d, task)) {
            ++rej_static[w];
            continue;
          }
          if (!is_dynamic_feasible(d, task)) {
            ++rej_dynamic[w];
            continue;
          }
          ++passed[w];
          buf.offer({evaluate_model(model, u), i, j, k, u});
        }
  };

  if (workers == 1) {
    run_slab(0, 0, spec.resolution[0]);
  } else {
    std::vector<std::thread> pool;
    const int per = (spec.resolution[0] + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int b = std::min(w * per, spec.resolution[0]);
      const int e = std::min(b + per, spec.resolution[0]);
      pool.emplace_back(run_slab, w, b, e);
    }
    for (auto& t : pool) t.join();
  }

  // deterministic merge: global sort, then suppress grid-adjacent candidates
  std::vector<GridNode> merged;
  for (const auto& b : buffers)
    merged.insert(merged.end(), b.sorted().begin(), b.sorted().end());
  std::sort(merged.begin(), merged.end(), node_less);

  OptimumReport report;
  report.grid_resolution = spec.resolution;
  for (long v : visited) report.evaluated += v;
  for (long p : passed) report.feasible_evaluated += p;
  if (merged.empty()) {
    long h = 0, s = 0, dy = 0;
    for (int w = 0; w < workers; ++w) h += rej_hull[w], s += rej_static[w], dy += rej_dynamic[w];
    throw EmptyRegionError("no grid node is feasible inside the trust region (" +
                           std::to_string(report.evaluated) + " examined: " + std::to_string(h) +
                           " outside hull, " + std::to_string(s) + " static-infeasible, " +
                           std::to_string(dy) + " dynamic-infeasible)");
  }

  std::vector<GridNode> kept;
  for (const GridNode& n : merged) {
    if (int(kept.size()) >= spec.top_k) break;
    bool shadowed = false;
    for (const GridNode& better : kept)
      if (adjacent(n, better)) {
        shadowed = true;
        break;
      }
    if (!shadowed) kept.push_back(n);
  }
  report.argmin = kept.front().u;
  report.value = kept.front().value;
  for (const GridNode& n : kept) report.top_k.emplace_back(n.u, n.value);
  return report;
}

OptimumReport local_search_baseline(const std::function<SimOutcome(const Vec3&)>& objective,
                                    const Vec3& start, const std::pair<Vec3, Vec3>& box) {
  const Vec3 range = box.second - box.first;
  Vec3 step = 0.05 * range;
  const Vec3 step_floor = 1e-4 * range;

  OptimumReport report;
  SimOutcome cur = objective(start);
  ++report.evaluated;
  if (!cur.ok)
    throw EmptyRegionError("local search start design is infeasible: " + cur.reason);
  Vec3 best = start;
  double best_val = cur.t_rms;

  while ((step.array() >= step_floor.array()).any()) {
    bool improved = false;
    for (int axis = 0; axis < 3 && !improved; ++axis)
      for (double sign : {+1.0, -1.0}) {
        Vec3 probe = best;
        probe[axis] += sign * step[axis];
        if ((probe.array() < box.first.array()).any() ||
            (probe.array() > box.second.array()).any())
          continue;
        const SimOutcome out = objective(probe);
        ++report.evaluated;
        ++report.feasible_evaluated;
        if (!out.ok) {
          --report.feasible_evaluated;
          continue;
        }
        if (out.t_rms < best_val) {
          best = probe;
          best_val = out.t_rms;
          improved = true;
          break;
        }
      }
    if (!improved) step *= 0.5;
  }
  report.argmin = best;
  report.value = best_val;
  report.top_k.emplace_back(best, best_val);
  return report;
}

}  // namespace fourbar
