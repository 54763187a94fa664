#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace linesect {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// Highest polynomial degree accepted for nodal-basis conversion. The
// Vandermonde systems get badly conditioned beyond this.
inline constexpr int kMaxDegree = 10;

/// Planar polynomial curve x(t) = sum_j t^j * alpha_j, coefficients stored
/// lowest degree first. Trailing zero coefficients are kept: the declared
/// degree is what the rest of the pipeline sizes its matrices from.
class PowerCurve {
 public:
  explicit PowerCurve(std::vector<Vec2> coeffs);

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Vec2>& coeffs() const noexcept { return coeffs_; }
  const Vec2& coeff(int j) const { return coeffs_.at(static_cast<std::size_t>(j)); }

  Vec2 evaluate(double t) const;
  Vec2 derivative(double t) const;

  /// Largest j with |alpha_j| above rel_tol * max|alpha|. Reported, never applied.
  int effective_degree(double rel_tol = 1e-12) const;

 private:
  std::vector<Vec2> coeffs_;
};

/// Tensor-product surface x(t1, t2) = sum t1^j1 t2^j2 alpha_{j1,j2} in R^3.
/// Coefficients are stored with j1 varying fastest.
class PowerSurface {
 public:
  PowerSurface(std::array<int, 2> bidegree, std::vector<Vec3> coeffs);

  std::array<int, 2> bidegree() const noexcept { return bidegree_; }
  const std::vector<Vec3>& coeffs() const noexcept { return coeffs_; }
  const Vec3& coeff(int j1, int j2) const {
    return coeffs_.at(static_cast<std::size_t>(j1 + (bidegree_[0] + 1) * j2));
  }

  Vec3 evaluate(const Vec2& t) const;
  /// Columns are dx/dt1 and dx/dt2.
  Eigen::Matrix<double, 3, 2> jacobian(const Vec2& t) const;

  std::array<int, 2> effective_bidegree(double rel_tol = 1e-12) const;

  /// Univariate coefficients (lowest first) of t_other -> x(t) with parameter
  /// `direction` (0 or 1) held at `value`.
  std::vector<Vec3> restrict_to(int direction, double value) const;

 private:
  std::array<int, 2> bidegree_;
  std::vector<Vec3> coeffs_;
};

std::vector<double> uniform_params(int count);

struct LagrangeCurve {
  std::vector<Vec2> nodes;
  std::vector<double> params;  // strictly increasing, one per node

  /// Nodes at uniform parameters on [0, 1].
  static LagrangeCurve uniform(std::vector<Vec2> nodes);
};

struct LagrangeSurface {
  std::array<int, 2> bidegree{};
  std::vector<Vec3> nodes;  // i1 varies fastest, (q1+1)*(q2+1) entries
  std::array<std::vector<double>, 2> params;

  static LagrangeSurface uniform(std::array<int, 2> bidegree, std::vector<Vec3> nodes);
  const Vec3& node(int i1, int i2) const {
    return nodes.at(static_cast<std::size_t>(i1 + (bidegree[0] + 1) * i2));
  }
};

PowerCurve lagrange_to_power(const LagrangeCurve& curve);
PowerSurface lagrange_to_power(const LagrangeSurface& surface);

inline Vec2 eval_power_curve(const PowerCurve& c, double t) { return c.evaluate(t); }
inline Vec3 eval_power_surface(const PowerSurface& s, const Vec2& t) { return s.evaluate(t); }

/// Coefficient convolution; the result has degree deg(a) + deg(b).
std::vector<double> poly_multiply(std::span<const double> a, std::span<const double> b);

/// Horner evaluation of a scalar polynomial stored lowest degree first.
double poly_evaluate(std::span<const double> coeffs, double t);

/// Real roots of a scalar polynomial (lowest degree first) from the
/// eigenvalues of its companion matrix. Leading coefficients below
/// rel_tol * max|c| are dropped first. Imaginary parts up to
/// imag_tol * (1 + |re|) are treated as rounding noise.
std::vector<double> real_roots(std::span<const double> coeffs, double rel_tol = 1e-14,
                               double imag_tol = 1e-8);

}  // namespace linesect
