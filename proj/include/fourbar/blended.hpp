#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "fourbar/chebyshev.hpp"
#include "fourbar/exponential.hpp"
#include "fourbar/projection.hpp"

namespace fourbar {

// Layout of the parallel sample lines in (translated) design space: line i
// runs through shifts[i] along delta with counts[i] equidistant samples.
struct SamplingPlan {
  Vec3 delta = Vec3::Zero();
  Vec3 origin_shift = Vec3::Zero();  // real-space point mapped to the translated origin
  std::vector<Vec3> shifts;          // shifts[0] must be zero
  std::vector<int> counts;

  int lines() const { return int(shifts.size()); }
  // Real-space location of sample k on line i.
  Vec3 sample_point(int i, double k) const { return origin_shift + shifts[i] + k * delta; }
  bool valid() const {
    return delta.squaredNorm() > 0.0 && !shifts.empty() && shifts.size() == counts.size() &&
           shifts[0].isZero(0.0);
  }
};

// Affine map of the anchor bounding box onto [-1,1]^2 for Chebyshev
// evaluation; degenerate spans collapse to the midpoint.
struct PqScaling {
  double p_lo = -1.0, p_hi = 1.0, q_lo = -1.0, q_hi = 1.0;

  Vec2 apply(const Vec2& pq) const {
    const auto map1 = [](double x, double lo, double hi) {
      return hi > lo ? 2.0 * (x - lo) / (hi - lo) - 1.0 : 0.0;
    };
    return Vec2(map1(pq.x(), p_lo, p_hi), map1(pq.y(), q_lo, q_hi));
  }
};

// The global surrogate: per-line exponential terms blended over the normal
// plane through bivariate Chebyshev coefficient functions
//   a_j^(i)(p,q) = sum_b tau[i](j,b) basis_b(scaled p, q),
// built to be cardinal at the line anchors.
struct BlendedModel {
  SamplingPlan plan;
  std::vector<LineExpModel> lines;
  CharPair which_pair = CharPair::c12;
  std::vector<ChebTerm> basis;
  PqScaling scaling;
  std::vector<Eigen::MatrixXcd> tau;  // tau[i] is n_i x basis.size()
  Eigen::VectorXd anchor_p;           // p(shifts[i]) along delta
  Eigen::MatrixX2d anchors;           // (p_line, q_line) per line, unscaled

  int total_terms() const {
    int n = 0;
    for (const auto& l : lines) n += l.n_terms;
    return n;
  }
};

struct EvalDetail {
  double value = 0.0;
  double imag_residual = 0.0;
};

struct ValidationStats {
  double rmse = 0.0;
  std::optional<double> rmse_below;  // absent when no point clears the threshold
  int n_points = 0;
  int n_below = 0;
  double max_abs_err = 0.0;
};

// Solves the l x l Chebyshev collocation problem at the line anchors and
// absorbs each line's shift into its coefficients. Throws
// CollocationSingularError for degenerate anchor positions.
BlendedModel build_blended(const SamplingPlan& plan, std::vector<LineExpModel> line_models);

double evaluate_model(const BlendedModel& model, const Vec3& u);
EvalDetail evaluate_model_detail(const BlendedModel& model, const Vec3& u);

// Coefficient functions of line i evaluated at unscaled normal-plane
// coordinates pq: the vector a^(i)(p,q), one entry per exponential term.
Eigen::VectorXcd coefficients_at(const BlendedModel& model, int line, const Vec2& pq);

ValidationStats validate_model(const BlendedModel& model,
                               const std::vector<std::pair<Vec3, double>>& holdout,
                               double threshold);

}  // namespace fourbar
