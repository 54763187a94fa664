#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Core>

// Dense linear algebra used by the pipeline: SVD null spaces and a QZ-style
// generalized eigensolver. Everything here is a pure function of its inputs.
namespace linesect::backend {

struct NullSpaceResult {
  Eigen::MatrixXd basis;  // orthonormal columns
  int rank = 0;
  Eigen::VectorXd singular_values;  // nonincreasing
};

/// Default relative rank threshold: max(rows, cols) * machine epsilon.
double default_rank_tol(Eigen::Index rows, Eigen::Index cols);

/// Numerical right null space. Singular values above rank_tol * sigma_max
/// count toward the rank; a zero matrix has a full null space.
NullSpaceResult null_space(const Eigen::MatrixXd& m, std::optional<double> rank_tol = std::nullopt);

/// Homogeneous eigenvalue: xi = alpha / beta, beta >= 0.
struct EigenPair {
  std::complex<double> alpha;
  double beta = 0.0;

  std::complex<double> value() const { return alpha / beta; }
};

struct GeneralizedEigenResult {
  std::vector<EigenPair> pairs;
  // Column j satisfies phi^T (A - xi_j B) = 0. Columns belonging to
  // eigenvalues at infinity or to defective clusters may be inaccurate.
  Eigen::MatrixXcd left_vectors;
};

/// All n eigenpairs of the square pencil (A, B). B may be singular.
GeneralizedEigenResult generalized_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// True when beta is negligible against ||B||, i.e. the eigenvalue sits at
/// infinity (or the pencil is singular there).
bool is_infinite(const EigenPair& pair, double b_norm, Eigen::Index n);

/// A pair with both alpha and beta negligible: det(A - xi B) vanishes
/// identically in the pencil.
bool is_indeterminate(const EigenPair& pair, double a_norm, double b_norm, Eigen::Index n);

/// |Im xi| <= tol * (1 + |Re xi|).
bool is_real(std::complex<double> xi, double tol = 1e-8);

/// Smallest left singular vectors of m (as columns), ordered from the
/// smallest singular value up.
Eigen::MatrixXd smallest_left_singular_vectors(const Eigen::MatrixXd& m, Eigen::Index count);

/// Singular values of m, nonincreasing.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& m);

/// Reciprocal 2-norm condition number of a square matrix.
double reciprocal_condition(const Eigen::MatrixXd& m);

}  // namespace linesect::backend
