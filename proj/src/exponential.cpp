#include "fourbar/exponential.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "fourbar/errors.hpp"

namespace fourbar {

namespace {

Eigen::MatrixXd hankel_matrix(const Eigen::VectorXd& f) {
  const Eigen::Index n = f.size();
  const Eigen::Index pencil = n / 2;          // columns shift window
  const Eigen::Index rows = n - pencil;       // >= pencil
  Eigen::MatrixXd h(rows, pencil + 1);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j <= pencil; ++j) h(i, j) = f[i + j];
  return h;
}

}  // namespace

std::complex<double> LineExpModel::eval(double k) const {
  std::complex<double> acc(0.0, 0.0);
  for (int j = 0; j < n_terms; ++j) acc += coefficients[j] * std::exp(k * log_nodes[j]);
  return acc;
}

double hankel_singular_ratio(const Eigen::VectorXd& samples, int order) {
  const Eigen::MatrixXd h = hankel_matrix(samples);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h);
  const auto& sv = svd.singularValues();
  if (order < 1 || order > sv.size() || sv[0] == 0.0) return 0.0;
  return sv[order - 1] / sv[0];
}

LineExpModel fit_line_exponential(const Eigen::VectorXd& samples, std::optional<int> order,
                                  double svd_tol) {
  const Eigen::Index n_samples = samples.size();
  if (order && (*order < 1 || n_samples < 2 * *order))
    throw RankError("need at least 2*order samples, got " + std::to_string(n_samples));
  if (n_samples < 2) throw RankError("need at least 2 samples");

  const Eigen::MatrixXd h = hankel_matrix(samples);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  LineExpModel model;
  if (sv[0] == 0.0) return model;  // identically zero signal: empty model

  int n;
  if (order) {
    n = *order;
    if (n > sv.size() || sv[n - 1] / sv[0] < 1e-13)
      throw RankError("Hankel matrix numerically rank-deficient below order " +
                      std::to_string(n));
  } else {
    n = 0;
    while (n < sv.size() && sv[n] / sv[0] > svd_tol) ++n;
    if (n == 0) return model;
  }
  const Eigen::Index pencil = h.cols() - 1;
  if (n > pencil)
    throw RankError("order " + std::to_string(n) + " exceeds pencil size " +
                    std::to_string(pencil));

  // Shift-invariance of the dominant right singular subspace: rows of W
  // correspond to consecutive sample offsets, so W_up * F = W_down has the
  // node values as the eigenvalues of F.
  const Eigen::MatrixXd w = svd.matrixV().leftCols(n);
  const Eigen::MatrixXd w_up = w.topRows(pencil);
  const Eigen::MatrixXd w_down = w.bottomRows(pencil);
  const Eigen::MatrixXd f_map = w_up.colPivHouseholderQr().solve(w_down);
  Eigen::EigenSolver<Eigen::MatrixXd> eig(f_map);
  if (eig.info() != Eigen::Success) throw RankError("node eigenproblem failed to converge");

  model.n_terms = n;
  model.nodes = eig.eigenvalues();
  model.log_nodes.resize(n);
  for (int j = 0; j < n; ++j) {
    const std::complex<double> mu = model.nodes[j];
    model.log_nodes[j] = std::log(mu);
    if (mu.real() < 0.0 && std::abs(mu.imag()) <= 1e-12 * std::abs(mu.real()))
      model.warnings.push_back("node " + std::to_string(j) +
                               " on the negative real axis: log branch choice is material");
  }

  Eigen::MatrixXcd vand(n_samples, n);
  for (int j = 0; j < n; ++j) {
    std::complex<double> pw(1.0, 0.0);
    for (Eigen::Index k = 0; k < n_samples; ++k) {
      vand(k, j) = pw;
      pw *= model.nodes[j];
    }
  }
  model.coefficients = vand.colPivHouseholderQr().solve(samples.cast<std::complex<double>>());

  double resid = 0.0;
  for (Eigen::Index k = 0; k < n_samples; ++k)
    resid = std::max(resid, std::abs(model.eval(double(k)) - samples[k]));
  model.fit_residual = resid;
  if (resid > 1e-6 * samples.norm())
    model.warnings.push_back("conditioning: Vandermonde residual " + std::to_string(resid) +
                             " exceeds 1e-6 * sample norm");
  return model;
}

}  // namespace fourbar
