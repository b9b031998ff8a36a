#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fourbar/feasibility.hpp"
#include "fourbar/hull.hpp"
#include "fourbar/optimizer.hpp"

using namespace fourbar;

namespace {

// A compact design box with a surrogate whose trust region covers it fully.
// The sampling direction has all components nonzero, the anchor rectangle in
// the characteristic plane strictly contains the box footprint, and every
// line restriction is a clean two-node exponential.
struct BoxScenario {
  Vec3 lo{0.8, 1.8, 0.9};
  Vec3 hi{1.2, 2.2, 1.1};
  SamplingPlan plan;
  BlendedModel model;
  TrustRegion region;
  DesignFrame frame{Vec2(2.0, 0.0), Elbow::up};

  BoxScenario() {
    const Vec3 delta(0.02, 0.02, 0.012);
    plan.delta = delta;
    plan.origin_shift = Vec3(0.8, 1.8, 0.88);

    // anchors at chosen characteristic-plane targets, solved back to
    // delta-orthogonal shifts through [c1; c2; delta] s = (tp, tq, 0).
    // The scatter is deliberately irregular: symmetric layouts (e.g. the
    // rectangle corners plus midpoints) are annihilated by a polynomial in
    // the 7-term basis and make the collocation singular.
    Eigen::Matrix3d forms;
    forms.row(0) = Vec3(delta.y(), -delta.x(), 0.0);
    forms.row(1) = Vec3(delta.z(), 0.0, -delta.x());
    forms.row(2) = delta;
    const double targets[7][2] = {{0, 0},
                                  {0.0125, 0.0012},
                                  {-0.0110, 0.0063},
                                  {-0.0128, -0.0041},
                                  {0.0096, -0.0068},
                                  {0.0018, 0.0071},
                                  {0.0121, 0.0058}};
    plan.shifts.push_back(Vec3::Zero());
    for (int i = 1; i < 7; ++i)
      plan.shifts.push_back(
          forms.colPivHouseholderQr().solve(Vec3(targets[i][0], targets[i][1], 0.0)));
    plan.counts.assign(7, 26);

    std::vector<LineExpModel> lines;
    for (int i = 0; i < 7; ++i) {
      // coefficient varies across the anchors so the surrogate has genuine
      // three-dimensional structure
      const double g = 1.0 + 30.0 * targets[i][0] + 45.0 * targets[i][1] +
                       400.0 * targets[i][0] * targets[i][1];
      Eigen::VectorXd samples(26);
      for (int k = 0; k < 26; ++k) samples[k] = 2.0 + g * std::exp(0.12 * k);
      lines.push_back(fit_line_exponential(samples));
    }
    model = build_blended(plan, std::move(lines));
    region = make_trust_region(model);
  }
};

struct ScanResult {
  Vec3 argmin;
  double value;
  long feasible;
};

// The reference the search must reproduce: visit every node, apply the same
// filters, track the minimum with value-then-lexicographic tie-breaking.
ScanResult exhaustive_scan(const BoxScenario& s, const PtpTask& task,
                           const std::array<int, 3>& res) {
  std::array<Eigen::VectorXd, 3> axes;
  for (int a = 0; a < 3; ++a) axes[a] = Eigen::VectorXd::LinSpaced(res[a], s.lo[a], s.hi[a]);
  ScanResult out{Vec3::Zero(), std::numeric_limits<double>::infinity(), 0};
  for (int i = 0; i < res[0]; ++i)
    for (int j = 0; j < res[1]; ++j)
      for (int k = 0; k < res[2]; ++k) {
        const Vec3 u(axes[0][i], axes[1][j], axes[2][k]);
        if (!hull_membership(s.region, u)) continue;
        const FourBarDesign d = s.frame.design_at(u);
        if (!is_static_feasible(d, task) || !is_dynamic_feasible(d, task)) continue;
        ++out.feasible;
        const double v = evaluate_model(s.model, u);
        const bool better =
            v < out.value ||
            (v == out.value && std::lexicographical_compare(u.data(), u.data() + 3,
                                                            out.argmin.data(),
                                                            out.argmin.data() + 3));
        if (better) {
          out.value = v;
          out.argmin = u;
        }
      }
  return out;
}

GridSpec spec_for(const BoxScenario& s, std::array<int, 3> res, int top_k = 4, int workers = 1) {
  GridSpec spec;
  spec.resolution = res;
  spec.box = std::make_pair(s.lo, s.hi);
  spec.top_k = top_k;
  spec.workers = workers;
  return spec;
}

}  // namespace

TEST_CASE("grid search reproduces an exhaustive scan") {
  const BoxScenario s;
  // the surrogate's trusted prism really does cover the whole box
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 u(corner & 1 ? s.hi[0] : s.lo[0], corner & 2 ? s.hi[1] : s.lo[1],
                 corner & 4 ? s.hi[2] : s.lo[2]);
    REQUIRE(hull_membership(s.region, u));
  }

  SUBCASE("every node feasible") {
    const PtpTask task{1.47, 1.67};
    const ScanResult want = exhaustive_scan(s, task, {20, 20, 20});
    CHECK(want.feasible == 8000);  // this task keeps the whole box assemblable

    const OptimumReport report = grid_search(s.model, s.region, s.frame, task, spec_for(s, {20, 20, 20}));
    CHECK(report.evaluated == 8000);
    CHECK(report.feasible_evaluated == want.feasible);
    CHECK(report.argmin == want.argmin);
    CHECK(report.value == want.value);
    CHECK(report.grid_resolution == std::array<int, 3>{20, 20, 20});
  }

  SUBCASE("task that splits the box into feasible and unassemblable parts") {
    const PtpTask task{0.3, 0.5};
    const ScanResult want = exhaustive_scan(s, task, {20, 20, 20});
    CHECK(want.feasible > 0);
    CHECK(want.feasible < 8000);

    const OptimumReport report = grid_search(s.model, s.region, s.frame, task, spec_for(s, {20, 20, 20}));
    CHECK(report.feasible_evaluated == want.feasible);
    CHECK(report.argmin == want.argmin);
    CHECK(report.value == want.value);
  }
}

TEST_CASE("dyadic grid refinement never loses the minimum") {
  const BoxScenario s;
  const PtpTask task{1.47, 1.67};
  const double v5 = grid_search(s.model, s.region, s.frame, task, spec_for(s, {5, 5, 5})).value;
  const double v9 = grid_search(s.model, s.region, s.frame, task, spec_for(s, {9, 9, 9})).value;
  // the coarse nodes are (up to roundoff in the axis construction) a subset
  // of the fine ones
  CHECK(v9 <= v5 + 1e-12 * (1.0 + std::abs(v5)));
}

TEST_CASE("worker count leaves the report untouched") {
  const BoxScenario s;
  const PtpTask task{1.47, 1.67};
  const OptimumReport one = grid_search(s.model, s.region, s.frame, task, spec_for(s, {17, 13, 11}, 6, 1));
  const OptimumReport three = grid_search(s.model, s.region, s.frame, task, spec_for(s, {17, 13, 11}, 6, 3));
  CHECK(one.argmin == three.argmin);
  CHECK(one.value == three.value);
  CHECK(one.evaluated == three.evaluated);
  CHECK(one.feasible_evaluated == three.feasible_evaluated);
  REQUIRE(one.top_k.size() == three.top_k.size());
  for (size_t i = 0; i < one.top_k.size(); ++i) {
    CHECK(one.top_k[i].first == three.top_k[i].first);
    CHECK(one.top_k[i].second == three.top_k[i].second);
  }
}

TEST_CASE("ranked minima are sorted and spatially distinct") {
  const BoxScenario s;
  const PtpTask task{1.47, 1.67};
  const std::array<int, 3> res{15, 15, 15};
  const OptimumReport report = grid_search(s.model, s.region, s.frame, task, spec_for(s, res, 5));
  REQUIRE(report.top_k.size() == 5);
  CHECK(report.top_k[0].first == report.argmin);
  CHECK(report.top_k[0].second == report.value);

  const auto index_of = [&](const Vec3& u) {
    Eigen::Vector3i idx;
    for (int a = 0; a < 3; ++a)
      idx[a] = int(std::lround((u[a] - s.lo[a]) / (s.hi[a] - s.lo[a]) * (res[a] - 1)));
    return idx;
  };
  for (size_t i = 0; i < report.top_k.size(); ++i) {
    if (i > 0) CHECK(report.top_k[i - 1].second <= report.top_k[i].second);
    for (size_t j = i + 1; j < report.top_k.size(); ++j) {
      const Eigen::Vector3i di = index_of(report.top_k[i].first) - index_of(report.top_k[j].first);
      CHECK(di.cwiseAbs().maxCoeff() >= 2);  // neighbours of a kept node are suppressed
    }
  }
}

TEST_CASE("an exhausted region reports its rejection tally") {
  const BoxScenario s;
  const PtpTask task{1.47, 1.67};
  GridSpec far = spec_for(s, {4, 4, 4});
  far.box = std::make_pair(Vec3(10.0, 10.0, 10.0), Vec3(11.0, 11.0, 11.0));
  CHECK_THROWS_WITH_AS(grid_search(s.model, s.region, s.frame, task, far),
                       doctest::Contains("examined"), EmptyRegionError);

  GridSpec degenerate = spec_for(s, {1, 5, 5});
  CHECK_THROWS_AS(grid_search(s.model, s.region, s.frame, task, degenerate), EmptyRegionError);
}

TEST_CASE("pattern search settles onto a convex bowl's minimum") {
  const Vec3 target(0.43, 0.61, 0.27);
  const auto objective = [&](const Vec3& u) {
    return SimOutcome{true, 1.0 + (u - target).squaredNorm(), 0.0, ""};
  };
  const std::pair<Vec3, Vec3> box{Vec3(0.0, 0.0, 0.0), Vec3(1.0, 1.0, 1.0)};
  const OptimumReport report = local_search_baseline(objective, Vec3(0.9, 0.1, 0.8), box);
  CHECK((report.argmin - target).cwiseAbs().maxCoeff() <= 1e-3);
  CHECK(report.value <= 1.0 + 3e-6);
  CHECK(report.evaluated > 10);
  REQUIRE(report.top_k.size() == 1);
  CHECK(report.top_k[0].first == report.argmin);
  CHECK(report.top_k[0].second == report.value);
}

TEST_CASE("pattern search respects the box and infeasible probes") {
  const std::pair<Vec3, Vec3> box{Vec3(0.0, 0.0, 0.0), Vec3(1.0, 1.0, 1.0)};

  SUBCASE("optimum beyond the box lands on its face") {
    const Vec3 target(1.2, 0.5, 0.5);
    const auto objective = [&](const Vec3& u) {
      return SimOutcome{true, 1.0 + (u - target).squaredNorm(), 0.0, ""};
    };
    const OptimumReport report = local_search_baseline(objective, Vec3(0.5, 0.5, 0.5), box);
    CHECK(report.argmin.x() <= 1.0 + 1e-12);
    CHECK(report.argmin.x() >= 1.0 - 1e-3);
  }

  SUBCASE("an infeasible half-space stops the descent at its edge") {
    const Vec3 target(0.8, 0.5, 0.5);
    const auto objective = [&](const Vec3& u) {
      if (u.x() > 0.6) return SimOutcome{false, 0.0, 0.0, "torque budget exceeded"};
      return SimOutcome{true, 1.0 + (u - target).squaredNorm(), 0.0, ""};
    };
    const OptimumReport report = local_search_baseline(objective, Vec3(0.5, 0.5, 0.5), box);
    CHECK(report.argmin.x() <= 0.6);
    CHECK(report.argmin.x() >= 0.6 - 2e-3);
    CHECK(report.feasible_evaluated < report.evaluated);
  }

  SUBCASE("an infeasible start is an error, not a silent answer") {
    const auto objective = [&](const Vec3&) {
      return SimOutcome{false, 0.0, 0.0, "unassemblable"};
    };
    CHECK_THROWS_WITH_AS(local_search_baseline(objective, Vec3(0.5, 0.5, 0.5), box),
                         doctest::Contains("unassemblable"), EmptyRegionError);
  }
}

TEST_CASE("pattern search stays in the basin it starts in") {
  const Vec3 a(0.25, 0.25, 0.25), b(0.75, 0.75, 0.75);
  const auto objective = [&](const Vec3& u) {
    const double va = std::exp(-(u - a).squaredNorm() / 0.005);
    const double vb = 1.5 * std::exp(-(u - b).squaredNorm() / 0.005);
    return SimOutcome{true, 2.0 - va - vb, 0.0, ""};
  };
  const std::pair<Vec3, Vec3> box{Vec3(0.0, 0.0, 0.0), Vec3(1.0, 1.0, 1.0)};
  const OptimumReport report = local_search_baseline(objective, Vec3(0.2, 0.2, 0.2), box);
  CHECK((report.argmin - a).norm() <= 0.02);
  CHECK((report.argmin - b).norm() >= 0.5);
  CHECK(report.value >= 0.6);  // the deeper minimum (value 0.5) was never reached
}
