#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "linesect/polybasis.hpp"

namespace linesect {

enum class GeometryKind { curve, tensor_surface };

/// Monomial basis of the moving-line (moving-plane) coefficients.
///
/// Curves use 1, t, ..., t^d. Surfaces use t1^i1 t2^i2 for i1 <= d1,
/// i2 <= d2, vectorized with the t1 exponent varying fastest:
/// index(i1, i2) = i1 + (d1 + 1) * i2. Consecutive entries inside a run of
/// constant i2 therefore differ by a factor t1, entries a stride (d1 + 1)
/// apart by a factor t2.
struct AuxBasis {
  GeometryKind kind = GeometryKind::curve;
  std::array<int, 2> degree{0, 0};  // second entry unused for curves

  int param_dim() const noexcept { return kind == GeometryKind::curve ? 1 : 2; }
  Eigen::Index size() const noexcept {
    return kind == GeometryKind::curve ? degree[0] + 1 : (degree[0] + 1) * (degree[1] + 1);
  }
  Eigen::Index index(int i1, int i2 = 0) const noexcept { return i1 + (degree[0] + 1) * i2; }
  Eigen::Index stride(int direction) const noexcept { return direction == 0 ? 1 : degree[0] + 1; }
  int degree_in(int direction) const noexcept {
    return kind == GeometryKind::curve && direction == 1 ? 0 : degree[static_cast<std::size_t>(direction)];
  }

  /// Basis values at t (t[1] ignored for curves).
  Eigen::VectorXd evaluate(const Vec2& t) const;
};

/// The coefficient matrix C of the moving-line identity.
///
/// Columns follow h: all coefficients of g^1, then g^2, ... and finally the
/// block multiplying the homogeneous 1, each block in AuxBasis order. Rows
/// follow the product basis (same vectorization as AuxBasis, at degree
/// geometry + aux).
struct CMatrix {
  Eigen::MatrixXd entries;
  GeometryKind kind = GeometryKind::curve;
  std::array<int, 2> row_basis_degree{0, 0};
  AuxBasis aux;
  int space_dim = 2;
  int algebraic_degree = 0;

  int blocks() const noexcept { return space_dim + 1; }
};

/// Right null vectors of C: each vector describes one moving line (plane)
/// through every point of the geometry.
struct MovingFamily {
  GeometryKind kind = GeometryKind::curve;
  AuxBasis aux;
  int space_dim = 2;
  int algebraic_degree = 0;
  Eigen::Index c_rows = 0;
  Eigen::Index c_cols = 0;
  int rank = 0;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd vectors;  // one stacked h vector per column

  int nullity() const noexcept { return static_cast<int>(vectors.cols()); }

  /// Coefficients of g^(block+1) for family member i.
  Eigen::VectorXd block(Eigen::Index i, int block) const {
    return vectors.col(i).segment(block * aux.size(), aux.size());
  }

  /// l^(i)(t, x) = (x, 1) . g^(i)(t).
  double evaluate(Eigen::Index i, const Vec2& t, const Eigen::VectorXd& x) const;
};

int min_aux_degree_curve(int curve_degree);

/// Auxiliary bidegree that doubles the direction `elongated_direction`
/// (1 or 2): (2q1 - 1, q2 - 1) or (q1 - 1, 2q2 - 1).
std::array<int, 2> min_aux_bidegree_surface(std::array<int, 2> surface_degree,
                                            int elongated_direction);

/// Direction with the larger degree; ties go to direction 1.
int default_elongated_direction(std::array<int, 2> surface_degree);

/// Count condition for moving planes: nullity lower bound vs 2 q1 q2.
bool satisfies_surface_count(std::array<int, 2> surface_degree, std::array<int, 2> aux_degree);

int min_aux_degree_triangle(int triangle_degree);

CMatrix assemble_c(const PowerCurve& curve, int aux_degree);
CMatrix assemble_c(const PowerSurface& surface, std::array<int, 2> aux_degree);

struct FamilyOptions {
  std::optional<double> rank_tol;  // relative to sigma_max
  // Divide each row of C with max-abs entry above 1 by that entry before the
  // SVD. Off by default: it rotates the returned basis.
  bool row_scaling = false;
};

MovingFamily moving_family(const CMatrix& c, const FamilyOptions& options = {});

struct ImplicitizeOptions {
  std::optional<int> curve_aux_degree;
  std::optional<std::array<int, 2>> surface_aux_degree;
  int elongated_direction = 0;  // 0 = automatic
  FamilyOptions family;
};

MovingFamily implicitize(const PowerCurve& curve, const ImplicitizeOptions& options = {});
MovingFamily implicitize(const PowerSurface& surface, const ImplicitizeOptions& options = {});

}  // namespace linesect
