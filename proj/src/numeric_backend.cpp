#include "linesect/numeric_backend.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "linesect/error.hpp"

namespace linesect::backend {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

double default_rank_tol(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<double>(std::max(rows, cols)) * kEps;
}

NullSpaceResult null_space(const Eigen::MatrixXd& m, std::optional<double> rank_tol) {
  if (m.size() == 0) throw Error(ErrorKind::shape_mismatch, "null_space of an empty matrix");
  const double tol = rank_tol.value_or(default_rank_tol(m.rows(), m.cols()));

  // JacobiSVD with a full V: the null-space basis is the trailing block of V.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  NullSpaceResult out;
  out.singular_values = svd.singularValues();
  const double sigma_max = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
  int rank = 0;
  if (sigma_max > 0.0) {
    for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
      if (out.singular_values(i) > tol * sigma_max) ++rank;
    }
  }
  out.rank = rank;
  out.basis = svd.matrixV().rightCols(m.cols() - rank);
  return out;
}

GeneralizedEigenResult generalized_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw Error(ErrorKind::shape_mismatch, "generalized_eig needs two square matrices of equal size");
  }
  GeneralizedEigenResult out;
  const Eigen::Index n = a.rows();
  if (n == 0) return out;

  // Left eigenvectors of (A, B) are the right eigenvectors of (A^T, B^T);
  // both pencils share their eigenvalues.
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::MatrixXd bt = b.transpose();
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> qz(at, bt, true);
  if (qz.info() != Eigen::Success) {
    throw Error(ErrorKind::degenerate_geometry, "QZ iteration did not converge");
  }
  out.pairs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::complex<double> alpha = qz.alphas()(i);
    double beta = qz.betas()(i);
    if (beta < 0.0) {
      alpha = -alpha;
      beta = -beta;
    }
    out.pairs.push_back({alpha, beta});
  }
  out.left_vectors = qz.eigenvectors();
  return out;
}

bool is_infinite(const EigenPair& pair, double b_norm, Eigen::Index n) {
  return pair.beta <= 16.0 * static_cast<double>(std::max<Eigen::Index>(n, 1)) * kEps *
                          std::max(b_norm, std::numeric_limits<double>::min());
}

bool is_indeterminate(const EigenPair& pair, double a_norm, double b_norm, Eigen::Index n) {
  const double scale = 16.0 * static_cast<double>(std::max<Eigen::Index>(n, 1)) * kEps;
  return is_infinite(pair, b_norm, n) && std::abs(pair.alpha) <= scale * a_norm;
}

bool is_real(std::complex<double> xi, double tol) {
  return std::abs(xi.imag()) <= tol * (1.0 + std::abs(xi.real()));
}

Eigen::MatrixXd smallest_left_singular_vectors(const Eigen::MatrixXd& m, Eigen::Index count) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
  const Eigen::MatrixXd& u = svd.matrixU();
  // Beyond min(rows, cols) the columns of U span the exact left null space;
  // they come last, after the columns paired with the smallest singular values.
  Eigen::MatrixXd out(m.rows(), count);
  for (Eigen::Index k = 0; k < count; ++k) out.col(k) = u.col(m.rows() - 1 - k);
  return out;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

double reciprocal_condition(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::VectorXd s = singular_values(m);
  if (s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

}  // namespace linesect::backend
