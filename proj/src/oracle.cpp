#include "linesect/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "linesect/error.hpp"

namespace linesect::oracle {

namespace {

template <int Dim>
double project_xi(const QueryLine<Dim>& line, const Eigen::Matrix<double, Dim, 1>& x) {
  return (x - line.origin).dot(line.direction) / line.direction.squaredNorm();
}

double newton_polish(std::span<const double> f, double t) {
  std::vector<double> df(f.size() > 1 ? f.size() - 1 : 1, 0.0);
  for (std::size_t j = 1; j < f.size(); ++j) df[j - 1] = double(j) * f[j];
  for (int it = 0; it < 8; ++it) {
    const double d = poly_evaluate(df, t);
    if (d == 0.0) break;
    const double step = poly_evaluate(f, t) / d;
    const double next = t - step;
    if (!std::isfinite(next)) break;
    if (std::abs(poly_evaluate(f, next)) > std::abs(poly_evaluate(f, t))) break;
    t = next;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(t))) break;
  }
  return t;
}

}  // namespace

CurveOracleResult oracle_curve(const PowerCurve& curve, const Line2& line, double far_limit) {
  const Vec2 normal(-line.direction[1], line.direction[0]);
  const Vec2 n = normal / normal.norm();
  const double d = -n.dot(line.origin);

  std::vector<double> f(curve.coeffs().size());
  double coeff_scale = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    f[j] = n.dot(curve.coeffs()[j]);
    coeff_scale = std::max(coeff_scale, curve.coeffs()[j].norm());
  }
  f[0] += d;
  double f_scale = 0.0;
  for (double c : f) f_scale = std::max(f_scale, std::abs(c));
  if (f_scale <= 1e-14 * std::max(1.0, coeff_scale + std::abs(d))) {
    throw Error(ErrorKind::infinite_intersections, "curve lies in the query line");
  }

  CurveOracleResult out;
  out.method = Method::companion;
  for (double t : real_roots(f)) {
    t = newton_polish(f, t);
    OracleRoot<1, 2> r;
    r.theta[0] = t;
    r.point = curve.evaluate(t);
    r.xi = project_xi(line, r.point);
    if (beyond_far_limit(r.xi, line, far_limit)) {
      out.far_roots.push_back(r);
    } else {
      out.intersections.push_back(r);
    }
  }
  std::sort(out.intersections.begin(), out.intersections.end(),
            [](const auto& a, const auto& b) { return a.xi < b.xi; });
  out.certified_count = static_cast<int>(out.intersections.size());
  return out;
}

SurfaceOracleResult oracle_surface(const PowerSurface& surface, const Line3& line,
                                   const SurfaceOracleOptions& options) {
  // The line as the intersection of two orthonormal planes.
  const Vec3 dir = line.direction.normalized();
  Vec3 helper = std::abs(dir[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 n1 = dir.cross(helper).normalized();
  const Vec3 n2 = dir.cross(n1).normalized();
  Eigen::Matrix<double, 2, 3> normals;
  normals.row(0) = n1.transpose();
  normals.row(1) = n2.transpose();
  const Eigen::Vector2d offsets(-n1.dot(line.origin), -n2.dot(line.origin));

  auto residual = [&](const Vec2& t) -> Eigen::Vector2d {
    return normals * surface.evaluate(t) + offsets;
  };

  double scale = 1.0 + line.origin.norm();
  for (const auto& c : surface.coeffs()) scale = std::max(scale, c.norm());

  const int g = std::max(options.grid, 2);
  const double h = (options.box_hi - options.box_lo) / (g - 1);
  auto grid_t = [&](int i) { return options.box_lo + h * i; };
  std::vector<Eigen::Vector2d> f(static_cast<std::size_t>(g * g));
  std::vector<double> f2(f.size());
  auto at = [g](int i, int j) { return static_cast<std::size_t>(i + g * j); };
  for (int j = 0; j < g; ++j) {
    for (int i = 0; i < g; ++i) {
      f[at(i, j)] = residual(Vec2(grid_t(i), grid_t(j)));
      f2[at(i, j)] = f[at(i, j)].squaredNorm();
    }
  }

  // Seeds: local minima of |f|^2 and centres of cells where both plane
  // residuals change sign.
  std::vector<Vec2> seeds;
  std::vector<std::pair<int, int>> sign_cells;
  for (int j = 0; j < g; ++j) {
    for (int i = 0; i < g; ++i) {
      bool minimum = true;
      for (int dj = -1; dj <= 1 && minimum; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= g || jj >= g) continue;
          if (f2[at(ii, jj)] < f2[at(i, j)]) {
            minimum = false;
            break;
          }
        }
      }
      if (minimum) seeds.emplace_back(grid_t(i), grid_t(j));
      if (i + 1 < g && j + 1 < g) {
        bool change[2] = {false, false};
        for (int c = 0; c < 2; ++c) {
          const double v[4] = {f[at(i, j)][c], f[at(i + 1, j)][c], f[at(i, j + 1)][c],
                               f[at(i + 1, j + 1)][c]};
          const double lo = *std::min_element(v, v + 4);
          const double hi = *std::max_element(v, v + 4);
          change[c] = lo <= 0.0 && hi >= 0.0;
        }
        if (change[0] && change[1]) {
          sign_cells.emplace_back(i, j);
          seeds.emplace_back(grid_t(i) + 0.5 * h, grid_t(j) + 0.5 * h);
        }
      }
    }
  }

  SurfaceOracleResult out;
  out.method = Method::sampled_refined;
  const double accept = 1e-11 * scale;
  for (const Vec2& seed : seeds) {
    Vec2 t = seed;
    Eigen::Vector2d r = residual(t);
    bool converged = r.norm() <= accept;
    for (int it = 0; it < 60 && !converged; ++it) {
      const Eigen::Matrix2d jac = normals * surface.jacobian(t);
      Eigen::FullPivLU<Eigen::Matrix2d> lu(jac);
      if (!lu.isInvertible()) break;
      const Vec2 step = lu.solve(r);
      double damping = 1.0;
      Vec2 next = t - step;
      Eigen::Vector2d rn = residual(next);
      while (rn.norm() > r.norm() && damping > 1e-4) {
        damping *= 0.5;
        next = t - damping * step;
        rn = residual(next);
      }
      if (!next.allFinite() || (next - t).norm() > 10.0 * (options.box_hi - options.box_lo)) break;
      t = next;
      r = rn;
      converged = r.norm() <= accept;
    }
    if (!converged) continue;
    // Near-tangential roots are ill conditioned in theta, so seeds stop at
    // scattered points inside the acceptance ball. Pull them together before
    // deduplicating.
    for (int it = 0; it < 4; ++it) {
      Eigen::FullPivLU<Eigen::Matrix2d> lu(normals * surface.jacobian(t));
      if (!lu.isInvertible()) break;
      const Vec2 next = t - lu.solve(r);
      const Eigen::Vector2d rn = residual(next);
      if (!next.allFinite() || rn.norm() >= r.norm()) break;
      t = next;
      r = rn;
    }
    const auto same_root = [&](const auto& root) {
      return (root.theta - t).norm() <= options.dedupe_tol * std::max(1.0, t.norm());
    };
    if (std::any_of(out.intersections.begin(), out.intersections.end(), same_root) ||
        std::any_of(out.far_roots.begin(), out.far_roots.end(), same_root)) {
      continue;
    }
    OracleRoot<2, 3> root;
    root.theta = t;
    root.point = surface.evaluate(t);
    root.xi = project_xi(line, root.point);
    if (beyond_far_limit(root.xi, line, options.far_limit)) {
      out.far_roots.push_back(root);
    } else {
      out.intersections.push_back(root);
    }
  }

  for (const auto& [i, j] : sign_cells) {
    const Vec2 lo(grid_t(i) - h, grid_t(j) - h);
    const Vec2 hi(grid_t(i + 1) + h, grid_t(j + 1) + h);
    const bool explained = std::any_of(out.intersections.begin(), out.intersections.end(),
                                       [&](const auto& root) {
                                         return (root.theta.array() >= lo.array()).all() &&
                                                (root.theta.array() <= hi.array()).all();
                                       });
    // A sign change of both residuals over a cell is necessary, not
    // sufficient, for a root; only report cells where |f| also gets small.
    double cell_min = f2[at(i, j)];
    cell_min = std::min({cell_min, f2[at(i + 1, j)], f2[at(i, j + 1)], f2[at(i + 1, j + 1)]});
    if (!explained && std::sqrt(cell_min) <= 4.0 * h * scale) {
      out.warnings.push_back("possibly missed root near (" + std::to_string(grid_t(i)) + ", " +
                             std::to_string(grid_t(j)) + ")");
    }
  }

  std::sort(out.intersections.begin(), out.intersections.end(),
            [](const auto& a, const auto& b) { return a.xi < b.xi; });
  out.certified_count = static_cast<int>(out.intersections.size());
  return out;
}

}  // namespace linesect::oracle

namespace linesect::oracle {

namespace {

template <class Record, class Root, class Close>
Agreement greedy_match(const std::vector<Record>& confirmed, const std::vector<Root>& roots,
                       Close close) {
  Agreement a;
  std::vector<bool> used(roots.size(), false);
  for (const auto& rec : confirmed) {
    bool found = false;
    for (std::size_t k = 0; k < roots.size(); ++k) {
      if (!used[k] && close(rec, roots[k])) {
        used[k] = true;
        found = true;
        ++a.matched;
        break;
      }
    }
    if (!found) ++a.spurious;
  }
  a.missed = static_cast<int>(std::count(used.begin(), used.end(), false));
  a.agree = a.missed == 0 && a.spurious == 0;
  return a;
}

bool xi_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

}  // namespace

Agreement compare(const CurveResult& result, const CurveOracleResult& reference, double xi_tol) {
  return greedy_match(result.confirmed(), reference.intersections,
                      [&](const CurveRecord& r, const OracleRoot<1, 2>& o) {
                        return xi_close(r.xi, o.xi, xi_tol);
                      });
}

Agreement compare(const SurfaceResult& result, const SurfaceOracleResult& reference, double xi_tol,
                  const SurfaceOracleOptions& options) {
  std::vector<SurfaceRecord> confirmed = result.confirmed();
  // Records just outside the search box may still be found by a Newton run
  // that wandered out, so keep those the oracle actually reported.
  std::vector<SurfaceRecord> in_scope;
  for (const auto& r : confirmed) {
    const bool inside = (r.theta.array() >= options.box_lo).all() &&
                        (r.theta.array() <= options.box_hi).all();
    const bool reported = std::any_of(
        reference.intersections.begin(), reference.intersections.end(),
        [&](const auto& o) { return xi_close(r.xi, o.xi, xi_tol); });
    if (inside || reported) in_scope.push_back(r);
  }
  Agreement a = greedy_match(in_scope, reference.intersections,
                             [&](const SurfaceRecord& r, const OracleRoot<2, 3>& o) {
                               return xi_close(r.xi, o.xi, xi_tol) &&
                                      (r.theta - o.theta).norm() <=
                                          xi_tol * std::max(1.0, o.theta.norm());
                             });
  // Sampling can miss roots; it cannot invent them.
  if (a.missed == 0 && a.spurious > 0 && reference.possibly_missed_root()) a.agree = true;
  return a;
}

}  // namespace linesect::oracle
