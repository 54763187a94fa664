#include "linesect/polybasis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "linesect/error.hpp"

namespace linesect {

namespace {

void check_params(std::span<const double> params, std::size_t expected, const char* what) {
  if (params.size() != expected) {
    throw Error(ErrorKind::shape_mismatch,
                std::string(what) + ": expected " + std::to_string(expected) +
                    " nodal parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(params[i])) {
      throw Error(ErrorKind::invalid_input, std::string(what) + ": non-finite nodal parameter");
    }
  }
  for (std::size_t i = 1; i < params.size(); ++i) {
    if (params[i] == params[i - 1]) {
      throw Error(ErrorKind::ill_posed_basis,
                  std::string(what) + ": duplicate nodal parameter " + std::to_string(params[i]));
    }
    if (params[i] < params[i - 1]) {
      throw Error(ErrorKind::invalid_input,
                  std::string(what) + ": nodal parameters must be strictly increasing");
    }
  }
}

void check_degree(int degree, const char* what) {
  if (degree < 0) throw Error(ErrorKind::invalid_input, std::string(what) + ": empty geometry");
  if (degree > kMaxDegree) {
    throw Error(ErrorKind::invalid_input, std::string(what) + ": degree " +
                                              std::to_string(degree) + " exceeds supported maximum " +
                                              std::to_string(kMaxDegree));
  }
}

// Inverse of the Vandermonde matrix V(i, j) = t_i^j via a pivoted solve.
Eigen::MatrixXd inverse_vandermonde(std::span<const double> params) {
  const auto n = static_cast<Eigen::Index>(params.size());
  Eigen::MatrixXd v(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      v(i, j) = p;
      p *= params[static_cast<std::size_t>(i)];
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::ill_posed_basis, "singular Vandermonde matrix");
  }
  return lu.solve(Eigen::MatrixXd::Identity(n, n));
}

}  // namespace

PowerCurve::PowerCurve(std::vector<Vec2> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw Error(ErrorKind::invalid_input, "curve needs at least one coefficient");
  for (const auto& c : coeffs_) {
    if (!c.allFinite()) throw Error(ErrorKind::invalid_input, "non-finite curve coefficient");
  }
}

Vec2 PowerCurve::evaluate(double t) const {
  Vec2 x = coeffs_.back();
  for (auto it = coeffs_.rbegin() + 1; it != coeffs_.rend(); ++it) x = x * t + *it;
  return x;
}

Vec2 PowerCurve::derivative(double t) const {
  Vec2 d = Vec2::Zero();
  for (int j = degree(); j >= 1; --j) d = d * t + j * coeffs_[static_cast<std::size_t>(j)];
  return d;
}

int PowerCurve::effective_degree(double rel_tol) const {
  double scale = 0.0;
  for (const auto& c : coeffs_) scale = std::max(scale, c.cwiseAbs().maxCoeff());
  for (int j = degree(); j > 0; --j) {
    if (coeffs_[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff() > rel_tol * scale) return j;
  }
  return 0;
}

PowerSurface::PowerSurface(std::array<int, 2> bidegree, std::vector<Vec3> coeffs)
    : bidegree_(bidegree), coeffs_(std::move(coeffs)) {
  if (bidegree_[0] < 0 || bidegree_[1] < 0) {
    throw Error(ErrorKind::invalid_input, "negative surface degree");
  }
  const auto expected = static_cast<std::size_t>((bidegree_[0] + 1) * (bidegree_[1] + 1));
  if (coeffs_.size() != expected) {
    throw Error(ErrorKind::shape_mismatch, "surface coefficient grid has " +
                                               std::to_string(coeffs_.size()) + " entries, expected " +
                                               std::to_string(expected));
  }
  for (const auto& c : coeffs_) {
    if (!c.allFinite()) throw Error(ErrorKind::invalid_input, "non-finite surface coefficient");
  }
}

Vec3 PowerSurface::evaluate(const Vec2& t) const {
  // Horner in t1 for each t2-row, then Horner in t2.
  Vec3 x = Vec3::Zero();
  for (int j2 = bidegree_[1]; j2 >= 0; --j2) {
    Vec3 row = coeff(bidegree_[0], j2);
    for (int j1 = bidegree_[0] - 1; j1 >= 0; --j1) row = row * t[0] + coeff(j1, j2);
    x = x * t[1] + row;
  }
  return x;
}

Eigen::Matrix<double, 3, 2> PowerSurface::jacobian(const Vec2& t) const {
  Eigen::Matrix<double, 3, 2> jac = Eigen::Matrix<double, 3, 2>::Zero();
  for (int j2 = 0; j2 <= bidegree_[1]; ++j2) {
    for (int j1 = 0; j1 <= bidegree_[0]; ++j1) {
      const Vec3& a = coeff(j1, j2);
      if (j1 > 0) jac.col(0) += j1 * std::pow(t[0], j1 - 1) * std::pow(t[1], j2) * a;
      if (j2 > 0) jac.col(1) += j2 * std::pow(t[0], j1) * std::pow(t[1], j2 - 1) * a;
    }
  }
  return jac;
}

std::array<int, 2> PowerSurface::effective_bidegree(double rel_tol) const {
  double scale = 0.0;
  for (const auto& c : coeffs_) scale = std::max(scale, c.cwiseAbs().maxCoeff());
  std::array<int, 2> eff{0, 0};
  for (int j2 = 0; j2 <= bidegree_[1]; ++j2) {
    for (int j1 = 0; j1 <= bidegree_[0]; ++j1) {
      if (coeff(j1, j2).cwiseAbs().maxCoeff() > rel_tol * scale) {
        eff[0] = std::max(eff[0], j1);
        eff[1] = std::max(eff[1], j2);
      }
    }
  }
  return eff;
}

std::vector<Vec3> PowerSurface::restrict_to(int direction, double value) const {
  const int other = 1 - direction;
  std::vector<Vec3> out(static_cast<std::size_t>(bidegree_[other] + 1), Vec3::Zero());
  for (int j2 = 0; j2 <= bidegree_[1]; ++j2) {
    for (int j1 = 0; j1 <= bidegree_[0]; ++j1) {
      const int fixed_power = direction == 0 ? j1 : j2;
      const int free_power = direction == 0 ? j2 : j1;
      out[static_cast<std::size_t>(free_power)] += std::pow(value, fixed_power) * coeff(j1, j2);
    }
  }
  return out;
}

std::vector<double> uniform_params(int count) {
  std::vector<double> p(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) p[static_cast<std::size_t>(i)] = count == 1 ? 0.0 : double(i) / (count - 1);
  return p;
}

LagrangeCurve LagrangeCurve::uniform(std::vector<Vec2> nodes) {
  const int n = static_cast<int>(nodes.size());
  return LagrangeCurve{std::move(nodes), uniform_params(n)};
}

LagrangeSurface LagrangeSurface::uniform(std::array<int, 2> bidegree, std::vector<Vec3> nodes) {
  return LagrangeSurface{bidegree, std::move(nodes),
                         {uniform_params(bidegree[0] + 1), uniform_params(bidegree[1] + 1)}};
}

PowerCurve lagrange_to_power(const LagrangeCurve& curve) {
  const int degree = static_cast<int>(curve.nodes.size()) - 1;
  check_degree(degree, "lagrange curve");
  check_params(curve.params, curve.nodes.size(), "lagrange curve");

  const Eigen::MatrixXd vinv = inverse_vandermonde(curve.params);
  std::vector<Vec2> coeffs(curve.nodes.size(), Vec2::Zero());
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      coeffs[j] += vinv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * curve.nodes[i];
    }
  }
  return PowerCurve(std::move(coeffs));
}

PowerSurface lagrange_to_power(const LagrangeSurface& surface) {
  const auto [q1, q2] = surface.bidegree;
  check_degree(q1, "lagrange surface");
  check_degree(q2, "lagrange surface");
  const auto expected = static_cast<std::size_t>((q1 + 1) * (q2 + 1));
  if (surface.nodes.size() != expected) {
    throw Error(ErrorKind::shape_mismatch, "lagrange surface node grid has " +
                                               std::to_string(surface.nodes.size()) +
                                               " entries, expected " + std::to_string(expected));
  }
  check_params(surface.params[0], static_cast<std::size_t>(q1 + 1), "lagrange surface (direction 1)");
  check_params(surface.params[1], static_cast<std::size_t>(q2 + 1), "lagrange surface (direction 2)");

  // Nodes X = V1 * alpha * V2^T per coordinate, hence alpha = V1^-1 X V2^-T.
  const Eigen::MatrixXd v1inv = inverse_vandermonde(surface.params[0]);
  const Eigen::MatrixXd v2inv = inverse_vandermonde(surface.params[1]);
  std::vector<Vec3> coeffs(expected, Vec3::Zero());
  for (int d = 0; d < 3; ++d) {
    Eigen::MatrixXd x(q1 + 1, q2 + 1);
    for (int i2 = 0; i2 <= q2; ++i2) {
      for (int i1 = 0; i1 <= q1; ++i1) x(i1, i2) = surface.node(i1, i2)[d];
    }
    const Eigen::MatrixXd alpha = v1inv * x * v2inv.transpose();
    for (int j2 = 0; j2 <= q2; ++j2) {
      for (int j1 = 0; j1 <= q1; ++j1) {
        coeffs[static_cast<std::size_t>(j1 + (q1 + 1) * j2)][d] = alpha(j1, j2);
      }
    }
  }
  return PowerSurface({q1, q2}, std::move(coeffs));
}

std::vector<double> poly_multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

double poly_evaluate(std::span<const double> coeffs, double t) {
  double v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * t + *it;
  return v;
}

std::vector<double> real_roots(std::span<const double> coeffs, double rel_tol, double imag_tol) {
  double scale = 0.0;
  for (double c : coeffs) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return {};
  std::size_t n = coeffs.size();
  while (n > 1 && std::abs(coeffs[n - 1]) <= rel_tol * scale) --n;
  const auto degree = static_cast<Eigen::Index>(n - 1);
  if (degree == 0) return {};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  companion.diagonal(-1).setOnes();
  for (Eigen::Index i = 0; i < degree; ++i) {
    companion(i, degree - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs[n - 1];
  }
  Eigen::EigenSolver<Eigen::MatrixXd> eig(companion, false);
  std::vector<double> roots;
  for (const auto& z : eig.eigenvalues()) {
    if (std::abs(z.imag()) <= imag_tol * (1.0 + std::abs(z.real()))) roots.push_back(z.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace linesect
