#include "fourbar/blended.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "fourbar/errors.hpp"

namespace fourbar {

namespace {

Eigen::VectorXd basis_values(const std::vector<ChebTerm>& basis, const Vec2& scaled) {
  Eigen::VectorXd phi(basis.size());
  for (size_t b = 0; b < basis.size(); ++b) phi[b] = basis[b].eval(scaled.x(), scaled.y());
  return phi;
}

}  // namespace

BlendedModel build_blended(const SamplingPlan& plan, std::vector<LineExpModel> line_models) {
  if (!plan.valid()) throw CollocationSingularError("invalid sampling plan");
  const int l = plan.lines();
  if (int(line_models.size()) != l)
    throw CollocationSingularError("line model count does not match plan");

  BlendedModel model;
  model.plan = plan;
  model.lines = std::move(line_models);
  model.which_pair = select_char_pair(plan.delta);
  model.basis = chebyshev_basis(l);

  model.anchors.resize(l, 2);
  model.anchor_p.resize(l);
  for (int i = 0; i < l; ++i) {
    model.anchors.row(i) =
        line_coordinates(plan.delta, plan.shifts[i], model.which_pair).transpose();
    model.anchor_p[i] = normal_projection(plan.delta, plan.shifts[i]).first;
  }
  model.scaling.p_lo = model.anchors.col(0).minCoeff();
  model.scaling.p_hi = model.anchors.col(0).maxCoeff();
  model.scaling.q_lo = model.anchors.col(1).minCoeff();
  model.scaling.q_hi = model.anchors.col(1).maxCoeff();

  Eigen::MatrixXd colloc(l, l);
  for (int i = 0; i < l; ++i) {
    const Eigen::VectorXd phi =
        basis_values(model.basis, model.scaling.apply(model.anchors.row(i).transpose()));
    colloc.row(i) = phi.transpose();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(colloc);
  if (!lu.isInvertible()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(colloc);
    const auto& sv = svd.singularValues();
    const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1]
                                                : std::numeric_limits<double>::infinity();
    throw CollocationSingularError(
        "anchor collocation matrix singular (condition estimate " + std::to_string(cond) +
        "); anchors likely in degenerate position for a " + std::to_string(l) + "-term basis");
  }
  const Eigen::MatrixXd colloc_inv = lu.inverse();

  // alpha_j^(i) = beta_j^(i) exp(-p(shift_i) lambda_j^(i)) re-centers each
  // line model at the translated origin; the cardinal combination then reads
  // tau[i](j, b) = alpha_j^(i) * colloc_inv(b, i).
  model.tau.resize(l);
  for (int i = 0; i < l; ++i) {
    const LineExpModel& lm = model.lines[i];
    Eigen::VectorXcd alpha(lm.n_terms);
    for (int j = 0; j < lm.n_terms; ++j)
      alpha[j] = lm.coefficients[j] * std::exp(-model.anchor_p[i] * lm.log_nodes[j]);
    model.tau[i] = alpha * colloc_inv.col(i).transpose().cast<std::complex<double>>();
  }
  return model;
}

EvalDetail evaluate_model_detail(const BlendedModel& model, const Vec3& u) {
  const Vec3 x = u - model.plan.origin_shift;
  const double p = normal_projection(model.plan.delta, x).first;
  const Vec2 pq = line_coordinates(model.plan.delta, x, model.which_pair);
  const Eigen::VectorXd phi = basis_values(model.basis, model.scaling.apply(pq));

  std::complex<double> acc(0.0, 0.0);
  for (size_t i = 0; i < model.tau.size(); ++i) {
    const Eigen::VectorXcd coeff = model.tau[i] * phi.cast<std::complex<double>>();
    const LineExpModel& lm = model.lines[i];
    for (int j = 0; j < lm.n_terms; ++j) acc += coeff[j] * std::exp(p * lm.log_nodes[j]);
  }
  EvalDetail out;
  out.value = acc.real();
  out.imag_residual = std::abs(acc.imag());
  return out;
}

double evaluate_model(const BlendedModel& model, const Vec3& u) {
  return evaluate_model_detail(model, u).value;
}

Eigen::VectorXcd coefficients_at(const BlendedModel& model, int line, const Vec2& pq) {
  const Eigen::VectorXd phi = basis_values(model.basis, model.scaling.apply(pq));
  return model.tau[line] * phi.cast<std::complex<double>>();
}

ValidationStats validate_model(const BlendedModel& model,
                               const std::vector<std::pair<Vec3, double>>& holdout,
                               double threshold) {
  ValidationStats stats;
  double sum_all = 0.0, sum_below = 0.0;
  for (const auto& [u, truth] : holdout) {
    const double err = evaluate_model(model, u) - truth;
    sum_all += err * err;
    stats.max_abs_err = std::max(stats.max_abs_err, std::abs(err));
    ++stats.n_points;
    if (truth < threshold) {
      sum_below += err * err;
      ++stats.n_below;
    }
  }
  if (stats.n_points > 0) stats.rmse = std::sqrt(sum_all / stats.n_points);
  if (stats.n_below > 0) stats.rmse_below = std::sqrt(sum_below / stats.n_below);
  return stats;
}

}  // namespace fourbar
