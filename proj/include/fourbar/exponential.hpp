#pragma once

#include <Eigen/Core>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace fourbar {

// Sparse exponential model of one equidistantly sampled line:
//   f(k) ~= sum_j coefficients[j] * nodes[j]^k.
struct LineExpModel {
  int n_terms = 0;
  Eigen::VectorXcd coefficients;  // beta_j
  Eigen::VectorXcd nodes;         // mu_j
  Eigen::VectorXcd log_nodes;     // lambda_j = principal log mu_j
  double fit_residual = 0.0;      // max over samples of |model - sample|
  std::vector<std::string> warnings;

  // Continuation of the model to fractional sample index k.
  std::complex<double> eval(double k) const;
};

// Recovers nodes and coefficients by the matrix-pencil method: nodes from the
// shift structure of the dominant right singular subspace of the sample
// Hankel matrix, coefficients from the Vandermonde least-squares system.
// When `order` is absent the order is the count of singular values with
// sigma_k/sigma_1 > svd_tol.
LineExpModel fit_line_exponential(const Eigen::VectorXd& samples,
                                  std::optional<int> order = std::nullopt,
                                  double svd_tol = 1e-8);

// sigma_order / sigma_1 of the same Hankel matrix the fitter decomposes; a
// direct measure of how well the sample sequence determines `order` terms.
double hankel_singular_ratio(const Eigen::VectorXd& samples, int order);

}  // namespace fourbar
