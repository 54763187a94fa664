#include "linesect/implicitize.hpp"

#include <cmath>
#include <string>

#include "linesect/error.hpp"
#include "linesect/numeric_backend.hpp"

namespace linesect {

Eigen::VectorXd AuxBasis::evaluate(const Vec2& t) const {
  Eigen::VectorXd v(size());
  const int d2 = kind == GeometryKind::curve ? 0 : degree[1];
  double p2 = 1.0;
  for (int i2 = 0; i2 <= d2; ++i2) {
    double p1 = 1.0;
    for (int i1 = 0; i1 <= degree[0]; ++i1) {
      v(index(i1, i2)) = p1 * p2;
      p1 *= t[0];
    }
    p2 *= t[1];
  }
  return v;
}

double MovingFamily::evaluate(Eigen::Index i, const Vec2& t, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd basis = aux.evaluate(t);
  double l = basis.dot(block(i, space_dim));
  for (int b = 0; b < space_dim; ++b) l += x(b) * basis.dot(block(i, b));
  return l;
}

int min_aux_degree_curve(int curve_degree) {
  if (curve_degree < 1) {
    throw Error(ErrorKind::degenerate_geometry, "curve degree must be at least 1");
  }
  return curve_degree - 1;
}

std::array<int, 2> min_aux_bidegree_surface(std::array<int, 2> q, int elongated_direction) {
  if (q[0] < 1 || q[1] < 1) {
    throw Error(ErrorKind::degenerate_geometry, "surface bidegree must be at least (1, 1)");
  }
  if (elongated_direction == 1) return {2 * q[0] - 1, q[1] - 1};
  if (elongated_direction == 2) return {q[0] - 1, 2 * q[1] - 1};
  throw Error(ErrorKind::invalid_input, "elongated direction must be 1 or 2");
}

int default_elongated_direction(std::array<int, 2> q) { return q[1] > q[0] ? 2 : 1; }

bool satisfies_surface_count(std::array<int, 2> q, std::array<int, 2> g) {
  if (g[0] < 0 || g[1] < 0) return false;
  const long cols = 4L * (g[0] + 1) * (g[1] + 1);
  const long rows = long(q[0] + g[0] + 1) * (q[1] + g[1] + 1);
  return cols - rows >= 2L * q[0] * q[1];
}

int min_aux_degree_triangle(int triangle_degree) {
  if (triangle_degree < 1) {
    throw Error(ErrorKind::degenerate_geometry, "triangle degree must be at least 1");
  }
  return 2 * (triangle_degree - 1);
}

CMatrix assemble_c(const PowerCurve& curve, int aux_degree) {
  const int qx = curve.degree();
  if (aux_degree < min_aux_degree_curve(qx)) {
    throw Error(ErrorKind::insufficient_family,
                "auxiliary degree " + std::to_string(aux_degree) + " below minimum " +
                    std::to_string(qx - 1) + " for a degree-" + std::to_string(qx) + " curve");
  }
  CMatrix c;
  c.kind = GeometryKind::curve;
  c.space_dim = 2;
  c.algebraic_degree = qx;
  c.aux = AuxBasis{GeometryKind::curve, {aux_degree, 0}};
  c.row_basis_degree = {qx + aux_degree, 0};

  const Eigen::Index n = c.aux.size();
  c.entries = Eigen::MatrixXd::Zero(qx + aux_degree + 1, 3 * n);
  for (int l = 0; l <= aux_degree; ++l) {
    for (int j = 0; j <= qx; ++j) {
      const Vec2& alpha = curve.coeff(j);
      c.entries(j + l, l) += alpha[0];
      c.entries(j + l, n + l) += alpha[1];
    }
    c.entries(l, 2 * n + l) += 1.0;
  }
  return c;
}

CMatrix assemble_c(const PowerSurface& surface, std::array<int, 2> g) {
  const auto q = surface.bidegree();
  if (q[0] < 1 || q[1] < 1) {
    throw Error(ErrorKind::degenerate_geometry, "surface bidegree must be at least (1, 1)");
  }
  if (!satisfies_surface_count(q, g)) {
    throw Error(ErrorKind::insufficient_family,
                "auxiliary bidegree (" + std::to_string(g[0]) + ", " + std::to_string(g[1]) +
                    ") cannot produce 2*q1*q2 moving planes");
  }
  CMatrix c;
  c.kind = GeometryKind::tensor_surface;
  c.space_dim = 3;
  c.algebraic_degree = 2 * q[0] * q[1];
  c.aux = AuxBasis{GeometryKind::tensor_surface, g};
  c.row_basis_degree = {q[0] + g[0], q[1] + g[1]};

  const AuxBasis rows{GeometryKind::tensor_surface, c.row_basis_degree};
  const Eigen::Index n = c.aux.size();
  c.entries = Eigen::MatrixXd::Zero(rows.size(), 4 * n);
  for (int l2 = 0; l2 <= g[1]; ++l2) {
    for (int l1 = 0; l1 <= g[0]; ++l1) {
      const Eigen::Index col = c.aux.index(l1, l2);
      for (int j2 = 0; j2 <= q[1]; ++j2) {
        for (int j1 = 0; j1 <= q[0]; ++j1) {
          const Eigen::Index row = rows.index(j1 + l1, j2 + l2);
          const Vec3& alpha = surface.coeff(j1, j2);
          for (int b = 0; b < 3; ++b) c.entries(row, b * n + col) += alpha[b];
        }
      }
      c.entries(rows.index(l1, l2), 3 * n + col) += 1.0;
    }
  }
  return c;
}

MovingFamily moving_family(const CMatrix& c, const FamilyOptions& options) {
  Eigen::MatrixXd m = c.entries;
  if (options.row_scaling) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double s = m.row(r).cwiseAbs().maxCoeff();
      if (s > 1.0) m.row(r) /= s;
    }
  }
  auto ns = backend::null_space(m, options.rank_tol);

  MovingFamily f;
  f.kind = c.kind;
  f.aux = c.aux;
  f.space_dim = c.space_dim;
  f.algebraic_degree = c.algebraic_degree;
  f.c_rows = c.entries.rows();
  f.c_cols = c.entries.cols();
  f.rank = ns.rank;
  f.singular_values = std::move(ns.singular_values);
  f.vectors = std::move(ns.basis);
  if (f.nullity() < f.algebraic_degree) {
    throw Error(ErrorKind::insufficient_family,
                "nullity " + std::to_string(f.nullity()) + " below algebraic degree " +
                    std::to_string(f.algebraic_degree) + " (check rank_tol)");
  }
  return f;
}

MovingFamily implicitize(const PowerCurve& curve, const ImplicitizeOptions& options) {
  const int qg = options.curve_aux_degree.value_or(min_aux_degree_curve(curve.degree()));
  return moving_family(assemble_c(curve, qg), options.family);
}

MovingFamily implicitize(const PowerSurface& surface, const ImplicitizeOptions& options) {
  std::array<int, 2> g{};
  if (options.surface_aux_degree) {
    g = *options.surface_aux_degree;
  } else {
    const int dir = options.elongated_direction == 0
                        ? default_elongated_direction(surface.bidegree())
                        : options.elongated_direction;
    g = min_aux_bidegree_surface(surface.bidegree(), dir);
  }
  return moving_family(assemble_c(surface, g), options.family);
}

}  // namespace linesect
