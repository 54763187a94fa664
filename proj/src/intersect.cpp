#include "linesect/intersect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <type_traits>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "linesect/error.hpp"
#include "linesect/numeric_backend.hpp"

namespace linesect {

template <int Dim>
QueryLine<Dim>::QueryLine(const Point& origin_, const Point& direction_)
    : origin(origin_), direction(direction_) {
  if (!origin.allFinite() || !direction.allFinite()) {
    throw Error(ErrorKind::invalid_input, "query line has non-finite components");
  }
  if (direction.norm() == 0.0) {
    throw Error(ErrorKind::invalid_input, "query line direction must be nonzero");
  }
}

template struct QueryLine<2>;
template struct QueryLine<3>;

const char* to_string(SelectionStrategy s) noexcept {
  switch (s) {
    case SelectionStrategy::conditioning: return "cond";
    case SelectionStrategy::first: return "first";
    case SelectionStrategy::last: return "last";
  }
  return "?";
}

const char* to_string(RecordStatus s) noexcept {
  switch (s) {
    case RecordStatus::confirmed: return "confirmed";
    case RecordStatus::fictitious: return "fictitious";
    case RecordStatus::complex_discarded: return "complex-discarded";
    case RecordStatus::infinite_discarded: return "infinite-discarded";
  }
  return "?";
}

namespace {

template <int Dim>
Pencil assemble_pencil_impl(const MovingFamily& family, const QueryLine<Dim>& line) {
  if (family.space_dim != Dim) {
    throw Error(ErrorKind::shape_mismatch, "family lives in dimension " +
                                               std::to_string(family.space_dim) +
                                               ", line in dimension " + std::to_string(Dim));
  }
  const Eigen::Index n = family.aux.size();
  Pencil p;
  p.aux = family.aux;
  p.a = Eigen::MatrixXd::Zero(n, family.nullity());
  p.b = Eigen::MatrixXd::Zero(n, family.nullity());
  for (Eigen::Index i = 0; i < family.nullity(); ++i) {
    const auto h = family.vectors.col(i);
    p.a.col(i) = h.segment(Dim * n, n);
    for (int d = 0; d < Dim; ++d) {
      p.a.col(i) += line.origin[d] * h.segment(d * n, n);
      p.b.col(i) -= line.direction[d] * h.segment(d * n, n);
    }
  }
  return p;
}

// Exponent of `direction` at vectorized auxiliary index k.
int exponent(const AuxBasis& aux, Eigen::Index k, int direction) {
  const auto run = static_cast<Eigen::Index>(aux.degree[0] + 1);
  return static_cast<int>(direction == 0 ? k % run : k / run);
}

// Auxiliary indices admissible as the lower end of a shift in `direction`
// (and in `also` when it is >= 0), ordered with `direction` varying fastest.
std::vector<Eigen::Index> shift_sources(const AuxBasis& aux, int direction, int also) {
  std::vector<Eigen::Index> out;
  const int d1 = aux.degree_in(0);
  const int d2 = aux.degree_in(1);
  auto admit = [&](int i1, int i2) {
    const std::array<int, 2> e{i1, i2};
    if (e[static_cast<std::size_t>(direction)] >= aux.degree_in(direction)) return;
    if (also >= 0 && e[static_cast<std::size_t>(also)] >= aux.degree_in(also)) return;
    out.push_back(aux.index(i1, i2));
  };
  if (direction == 0) {
    for (int i2 = 0; i2 <= d2; ++i2)
      for (int i1 = 0; i1 <= d1; ++i1) admit(i1, i2);
  } else {
    for (int i1 = 0; i1 <= d1; ++i1)
      for (int i2 = 0; i2 <= d2; ++i2) admit(i1, i2);
  }
  return out;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& m, std::span<const Eigen::Index> cols,
                               Eigen::Index shift) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j] + shift);
  }
  return out;
}

// Parameter minimizing |p(t) - target| for a univariate vector polynomial:
// a real root of d/dt |p(t) - target|^2.
template <int Dim>
double closest_parameter(std::span<const Eigen::Matrix<double, Dim, 1>> coeffs,
                         const Eigen::Matrix<double, Dim, 1>& target) {
  const std::size_t n = coeffs.size();
  if (n <= 1) return 0.0;
  std::vector<double> gradient(2 * n - 2, 0.0);
  for (int d = 0; d < Dim; ++d) {
    std::vector<double> value(n), slope(n - 1);
    for (std::size_t j = 0; j < n; ++j) value[j] = coeffs[j][d];
    value[0] -= target[d];
    for (std::size_t j = 1; j < n; ++j) slope[j - 1] = double(j) * coeffs[j][d];
    const auto prod = poly_multiply(value, slope);
    for (std::size_t j = 0; j < prod.size(); ++j) gradient[j] += prod[j];
  }
  const auto roots = real_roots(gradient);
  double best = 0.0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (double t : roots) {
    Eigen::Matrix<double, Dim, 1> x = Eigen::Matrix<double, Dim, 1>::Zero();
    for (std::size_t j = n; j-- > 0;) x = x * t + coeffs[j];
    const double dist = (x - target).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = t;
    }
  }
  return best;
}

bool complete_theta(ThetaEstimate& theta, const PowerCurve& curve, const Vec2& target) {
  if (theta.resolved[0]) return true;
  theta.value[0] = closest_parameter<2>(curve.coeffs(), target);
  theta.resolved[0] = true;
  return true;
}

bool complete_theta(ThetaEstimate& theta, const PowerSurface& surface, const Vec3& target) {
  if (theta.resolved[0] && theta.resolved[1]) return true;
  if (!theta.resolved[0] && !theta.resolved[1]) return false;
  const int known = theta.resolved[0] ? 0 : 1;
  const int missing = 1 - known;
  const auto restricted = surface.restrict_to(known, theta.value[known]);
  theta.value[missing] = closest_parameter<3>(restricted, target);
  theta.resolved[static_cast<std::size_t>(missing)] = true;
  return true;
}

double param_value(const ThetaEstimate& t, const PowerCurve&) { return t.value[0]; }
Vec2 param_value(const ThetaEstimate& t, const PowerSurface&) { return t.value; }

double record_param(const CurveRecord& r) { return r.theta[0]; }
Vec2 record_param(const SurfaceRecord& r) { return r.theta; }

constexpr double kPolishWindow = 1e-3;

template <class Geometry>
constexpr int geometry_param_dim = std::is_same_v<Geometry, PowerCurve> ? 1 : 2;

bool in_unit_box(double t) { return t >= -1e-9 && t <= 1.0 + 1e-9; }

Eigen::Matrix<double, 2, 1> param_jacobian(const PowerCurve& c, double t) { return c.derivative(t); }
Eigen::Matrix<double, 3, 2> param_jacobian(const PowerSurface& s, const Vec2& t) { return s.jacobian(t); }

// Orthonormal basis of the complement of the line direction: the line is
// the zero set of normals^T (x - origin).
template <int Dim>
Eigen::Matrix<double, Dim - 1, Dim> line_normals(const QueryLine<Dim>& line) {
  const Eigen::Matrix<double, Dim, 1> d = line.direction.normalized();
  Eigen::Matrix<double, Dim, Dim> q =
      Eigen::HouseholderQR<Eigen::Matrix<double, Dim, 1>>(d).householderQ() *
      Eigen::Matrix<double, Dim, Dim>::Identity();
  return q.template rightCols<Dim - 1>().transpose();
}

struct Polished {
  double step = 0.0;  // largest parameter change, relative
};

// Newton refinement of an intersection. xi is eliminated: the parameter
// solves normals^T (x(theta) - origin) = 0, and xi is the projection of
// x(theta) onto the line. Near infinity the curve tangent and the line are
// almost parallel, which makes a joint (theta, xi) Newton step useless,
// while this reduced system stays well conditioned. Steps are kept only while
// they lower the residual.
template <class Record, class Geometry, int Dim>
Polished polish(Record& r, const Geometry& geometry, const QueryLine<Dim>& line) {
  constexpr int P = Dim - 1;
  using Param = Eigen::Matrix<double, P, 1>;
  using Square = Eigen::Matrix<double, P, P>;
  auto arg = [](const Param& t) {
    if constexpr (P == 1) {
      return t[0];
    } else {
      return Vec2(t[0], t[1]);
    }
  };
  const auto normals = line_normals(line);
  auto offset = [&](const Param& t) -> Param { return normals * (geometry.evaluate(arg(t)) - line.origin); };

  const Param start = r.theta;
  Param t = start;
  Param g = offset(t);
  Polished out;
  for (int iter = 0; iter < 12 && g.norm() > 0.0; ++iter) {
    const Square j = normals * param_jacobian(geometry, arg(t));
    Eigen::JacobiSVD<Square> svd(j);
    if (svd.singularValues()[P - 1] <= 1e-12 * std::max(1.0, svd.singularValues()[0])) break;
    const Param next = t - Eigen::FullPivLU<Square>(j).solve(g);
    const Param gn = offset(next);
    if (!next.allFinite() || !(gn.norm() < g.norm())) break;
    t = next;
    g = gn;
  }
  out.step = (t - start).cwiseAbs().maxCoeff() / std::max(1.0, start.cwiseAbs().maxCoeff());
  const auto x = geometry.evaluate(arg(t));
  r.theta = t;
  r.xi = line.direction.dot(x - line.origin) / line.direction.squaredNorm();
  r.point = line.point_at(r.xi);
  r.residual = (x - r.point).norm();
  return out;
}

template <class Record, class Geometry, int Dim>
std::vector<Record> classify_impl(std::span<const Candidate> candidates, const Geometry& geometry,
                                  const QueryLine<Dim>& line, const IntersectConfig& config) {
  std::vector<Record> out;
  out.reserve(candidates.size());
  // Promoted records remember what they were before refinement.
  std::vector<std::optional<Record>> before;
  for (const Candidate& c : candidates) {
    Record r;
    r.xi = c.xi.real();
    r.xi_imag = c.xi.imag();
    r.multiplicity = c.multiplicity;
    r.multiplicity_unresolved = c.multiplicity_unresolved;
    if (!c.infinite && !backend::is_real(c.xi, config.complex_tol)) {
      r.status = RecordStatus::complex_discarded;
      out.push_back(r);
      before.emplace_back();
      continue;
    }
    ThetaEstimate theta = c.theta;
    if (c.infinite) {
      // An eigenvalue flagged infinite may still be a finite intersection far
      // along the line. Its eigenvector names the parameter; the point is
      // then judged by its distance to the line.
      r.status = RecordStatus::infinite_discarded;
      r.xi = std::numeric_limits<double>::infinity();
      r.xi_imag = 0.0;
      if (!config.polish || !theta.complete(geometry_param_dim<Geometry>)) {
        out.push_back(r);
        before.emplace_back();
        continue;
      }
    } else {
      r.point = line.point_at(r.xi);
      if (!complete_theta(theta, geometry, r.point)) {
        r.status = RecordStatus::fictitious;
        out.push_back(r);
        before.emplace_back();
        continue;
      }
    }
    const auto t = param_value(theta, geometry);
    if constexpr (Dim == 2) {
      r.theta[0] = t;
    } else {
      r.theta = t;
    }
    const auto x = geometry.evaluate(t);
    // Far out along the line the eigenvalue loses relative accuracy before
    // the parameter does. A candidate whose x(theta) lies almost on the line
    // is refined before it is judged; fictitious points miss the line by
    // O(1). If refinement lands on a point confirmed by another candidate,
    // the copy is dropped below.
    const double xi_proj = line.direction.dot(x - line.origin) / line.direction.squaredNorm();
    const double off_line = (x - line.point_at(xi_proj)).norm() / (1.0 + x.norm());
    Record seed = r;
    seed.xi = xi_proj;
    seed.point = line.point_at(xi_proj);
    bool near = off_line <= kPolishWindow;
    if (c.infinite) {
      near = near && beyond_far_limit(xi_proj, line, 1.0 / kPolishWindow);
    } else {
      r.residual = (x - r.point).norm();
      r.status = r.residual <= config.confirm_tol * (1.0 + x.norm()) ? RecordStatus::confirmed
                                                                       : RecordStatus::fictitious;
    }
    std::optional<Record> unrefined;
    if (config.polish && r.multiplicity == 1 && near) {
      Record refined = seed;
      const Polished p = polish(refined, geometry, line);
      const auto xr = geometry.evaluate(record_param(refined));
      const bool ok = refined.residual <= config.confirm_tol * (1.0 + xr.norm());
      if (r.status == RecordStatus::confirmed) {
        if (ok) {
          r = refined;
          r.status = RecordStatus::confirmed;
        }
      } else if (ok && p.step <= kPolishWindow) {
        refined.status = RecordStatus::confirmed;
        unrefined = r;
        r = refined;
      }
    }
    if (r.status == RecordStatus::confirmed && beyond_far_limit(r.xi, line, config.far_limit)) {
      r.status = RecordStatus::infinite_discarded;
      unrefined.reset();
    }
    if (config.domain == DomainFilter::unit) {
      r.in_domain = std::all_of(r.theta.data(), r.theta.data() + r.theta.size(), in_unit_box);
    }
    out.push_back(r);
    before.push_back(unrefined);
  }

  // A promoted record that lands on an intersection already confirmed is a
  // second copy of it, not a new point.
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!before[i]) continue;
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (j == i || out[j].status != RecordStatus::confirmed || (before[j] && j > i)) continue;
      const double scale = std::max(1.0, out[j].theta.cwiseAbs().maxCoeff());
      if ((out[i].theta - out[j].theta).cwiseAbs().maxCoeff() <= 1e-6 * scale) {
        out[i] = *before[i];
        before[i].reset();
        break;
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Record& a, const Record& b) {
    if (a.status != b.status) return a.status < b.status;
    return a.xi < b.xi;
  });
  return out;
}

std::vector<Candidate> solve_impl(const Pencil& pencil, const SquarePencil& square,
                                  const IntersectConfig& config, bool* singular);

template <class Record, class Geometry, int Dim>
LineResult<Record> intersect_impl(const Geometry& geometry, const MovingFamily& family,
                                  const QueryLine<Dim>& line, const IntersectConfig& config) {
  const Pencil pencil = assemble_pencil(family, line);

  // A selection whose sub-pencil is singular (det(A - xi B) == 0 for all xi)
  // says nothing about the line; move on to the next strategy.
  std::vector<SelectionStrategy> order{config.strategy};
  for (auto s : {SelectionStrategy::conditioning, SelectionStrategy::first, SelectionStrategy::last}) {
    if (s != config.strategy) order.push_back(s);
  }
  LineResult<Record> result;
  std::vector<Candidate> candidates;
  bool have = false;
  for (auto strategy : order) {
    SquarePencil square = select_square(pencil, strategy);
    bool singular = false;
    auto cands = solve_impl(pencil, square, config, &singular);
    if (!have || !singular) {
      candidates = std::move(cands);
      result.selected_columns = square.columns;
      result.strategy_used = strategy;
      have = true;
    }
    if (!singular) break;
  }
  result.records = classify_impl<Record>(candidates, geometry, line, config);
  return result;
}

}  // namespace

Pencil assemble_pencil(const MovingFamily& family, const Line2& line) {
  return assemble_pencil_impl(family, line);
}

Pencil assemble_pencil(const MovingFamily& family, const Line3& line) {
  return assemble_pencil_impl(family, line);
}

SquarePencil select_square(const Pencil& pencil, SelectionStrategy strategy) {
  const Eigen::Index rows = pencil.a.rows();
  const Eigen::Index cols = pencil.a.cols();
  if (cols < rows) {
    throw Error(ErrorKind::insufficient_family, "pencil has " + std::to_string(cols) +
                                                    " columns but needs at least " +
                                                    std::to_string(rows));
  }
  SquarePencil out;
  out.columns.resize(static_cast<std::size_t>(rows));
  if (cols == rows || strategy == SelectionStrategy::first) {
    std::iota(out.columns.begin(), out.columns.end(), Eigen::Index{0});
  } else if (strategy == SelectionStrategy::last) {
    std::iota(out.columns.begin(), out.columns.end(), cols - rows);
  } else {
    Eigen::MatrixXd stacked(2 * rows, cols);
    stacked << pencil.a, pencil.b;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = 0; k < rows; ++k) out.columns[static_cast<std::size_t>(k)] = perm(k);
    std::sort(out.columns.begin(), out.columns.end());
  }
  out.a = gather_columns(pencil.a, out.columns, 0);
  out.b = gather_columns(pencil.b, out.columns, 0);
  return out;
}

ThetaEstimate recover_theta_simple(const Eigen::VectorXd& phi, const AuxBasis& aux) {
  if (phi.size() != aux.size()) {
    throw Error(ErrorKind::shape_mismatch, "eigenvector length does not match auxiliary basis");
  }
  const double scale = phi.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !phi.allFinite()) {
    throw Error(ErrorKind::ambiguous_preimage, "zero or non-finite eigenvector");
  }
  ThetaEstimate out;
  for (int d = 0; d < aux.param_dim(); ++d) {
    if (aux.degree_in(d) == 0) continue;
    const Eigen::Index stride = aux.stride(d);
    Eigen::Index best = -1;
    for (Eigen::Index k = 0; k < phi.size(); ++k) {
      if (exponent(aux, k, d) >= aux.degree_in(d)) continue;
      if (best < 0 || std::abs(phi(k)) > std::abs(phi(best))) best = k;
    }
    if (best < 0 || std::abs(phi(best)) <= 1e-12 * scale) {
      throw Error(ErrorKind::ambiguous_preimage, "all ratio denominators are negligible");
    }
    out.value[d] = phi(best + stride) / phi(best);
    out.resolved[static_cast<std::size_t>(d)] = true;
  }
  return out;
}

std::vector<ThetaEstimate> recover_theta_multiple(const Eigen::MatrixXd& k, const AuxBasis& aux) {
  const Eigen::Index p = k.rows();
  if (p == 0 || k.cols() != aux.size()) {
    throw Error(ErrorKind::shape_mismatch, "K must have one column per auxiliary basis function");
  }

  struct Choice {
    int direction = -1;
    int other = -1;
    std::vector<Eigen::Index> cols;
    double rcond = 0.0;
  };
  Choice best;
  for (int d = 0; d < aux.param_dim(); ++d) {
    if (aux.degree_in(d) == 0) continue;
    int other = aux.param_dim() == 2 ? 1 - d : -1;
    if (other >= 0 && aux.degree_in(other) == 0) other = -1;
    const auto sources = shift_sources(aux, d, other);
    for (std::size_t off = 0; off + static_cast<std::size_t>(p) <= sources.size(); ++off) {
      std::vector<Eigen::Index> cols(sources.begin() + static_cast<std::ptrdiff_t>(off),
                                     sources.begin() + static_cast<std::ptrdiff_t>(off) + p);
      const double rc = backend::reciprocal_condition(gather_columns(k, cols, 0));
      if (rc > best.rcond) best = Choice{d, other, std::move(cols), rc};
    }
  }
  if (best.direction < 0 || best.rcond < 1e-10) {
    throw Error(ErrorKind::unresolved_multiplicity, "every Delta block of K is singular");
  }

  const Eigen::MatrixXd lower = gather_columns(k, best.cols, 0);
  const Eigen::MatrixXd upper = gather_columns(k, best.cols, aux.stride(best.direction));
  // Right eigenvectors of (upper, lower) are the left ones of the transposes.
  const auto eig = backend::generalized_eig(upper.transpose(), lower.transpose());

  std::vector<ThetaEstimate> out;
  for (std::size_t j = 0; j < eig.pairs.size(); ++j) {
    const auto& pair = eig.pairs[j];
    if (backend::is_infinite(pair, lower.norm(), p) || !backend::is_real(pair.value())) {
      throw Error(ErrorKind::unresolved_multiplicity, "preimage eigenproblem is degenerate");
    }
    ThetaEstimate t;
    t.value[best.direction] = pair.value().real();
    t.resolved[static_cast<std::size_t>(best.direction)] = true;
    if (best.other >= 0) {
      const Eigen::VectorXd psi = eig.left_vectors.col(static_cast<Eigen::Index>(j)).real();
      const Eigen::VectorXd base = lower * psi;
      const Eigen::VectorXd shifted = gather_columns(k, best.cols, aux.stride(best.other)) * psi;
      const double denom = base.squaredNorm();
      if (denom > 0.0 && psi.allFinite()) {
        t.value[best.other] = base.dot(shifted) / denom;
        t.resolved[static_cast<std::size_t>(best.other)] = true;
      }
    }
    out.push_back(t);
  }
  return out;
}

namespace {

std::vector<Candidate> solve_impl(const Pencil& pencil, const SquarePencil& square,
                                  const IntersectConfig& config, bool* singular) {
  Eigen::MatrixXd sa = square.a;
  Eigen::MatrixXd sb = square.b;
  if (config.column_scaling) {
    for (Eigen::Index j = 0; j < sa.cols(); ++j) {
      const double s = std::sqrt(sa.col(j).squaredNorm() + sb.col(j).squaredNorm());
      if (s > 0.0) {
        sa.col(j) /= s;
        sb.col(j) /= s;
      }
    }
  }
  const auto eig = backend::generalized_eig(sa, sb);
  const double a_norm = sa.norm();
  const double b_norm = sb.norm();
  const Eigen::Index n = sa.rows();
  if (singular != nullptr) {
    *singular = std::any_of(eig.pairs.begin(), eig.pairs.end(), [&](const auto& pair) {
      return backend::is_indeterminate(pair, a_norm, b_norm, n);
    });
  }

  std::vector<Candidate> out;
  struct RealEig {
    double xi;
    std::size_t index;
  };
  std::vector<RealEig> reals;
  for (std::size_t j = 0; j < eig.pairs.size(); ++j) {
    const auto& pair = eig.pairs[j];
    if (backend::is_infinite(pair, b_norm, n)) {
      Candidate c;
      c.infinite = true;
      c.xi = std::numeric_limits<double>::infinity();
      // A large finite intersection leaves the full rectangular B nearly
      // rank deficient with P(theta) as its left null vector; fictitious
      // infinite eigenvalues of the square restriction do not.
      try {
        c.theta = recover_theta_simple(backend::smallest_left_singular_vectors(pencil.b, 1).col(0), pencil.aux);
      } catch (const Error&) {
      }
      out.push_back(c);
      continue;
    }
    const auto xi = pair.value();
    if (!backend::is_real(xi, config.complex_tol)) {
      Candidate c;
      c.xi = xi;
      out.push_back(c);
      continue;
    }
    reals.push_back({xi.real(), j});
  }
  std::sort(reals.begin(), reals.end(), [](const RealEig& a, const RealEig& b) { return a.xi < b.xi; });

  auto left_vector = [&](std::size_t j, double xi) -> Eigen::VectorXd {
    Eigen::VectorXd phi = eig.left_vectors.col(static_cast<Eigen::Index>(j)).real();
    if (phi.allFinite() && phi.norm() > 0.0) return phi;
    return backend::smallest_left_singular_vectors(sa - xi * sb, 1).col(0);
  };
  auto simple = [&](const Eigen::VectorXd& phi, Candidate& c) {
    try {
      c.theta = recover_theta_simple(phi, pencil.aux);
    } catch (const Error&) {
      c.theta = ThetaEstimate{};
    }
  };

  std::size_t begin = 0;
  while (begin < reals.size()) {
    std::size_t end = begin + 1;
    while (end < reals.size() &&
           std::abs(reals[end].xi - reals[end - 1].xi) <=
               config.cluster_tol * std::max(1.0, std::abs(reals[end].xi))) {
      ++end;
    }
    const auto p = static_cast<int>(end - begin);
    if (p == 1) {
      Candidate c;
      c.xi = reals[begin].xi;
      simple(left_vector(reals[begin].index, reals[begin].xi), c);
      out.push_back(c);
      begin = end;
      continue;
    }

    double mean = 0.0;
    for (std::size_t i = begin; i < end; ++i) mean += reals[i].xi;
    mean /= p;
    // Distinct preimages of one point show up as a left null space of the
    // full pencil with one dimension per preimage; a tangency gives only one.
    const Eigen::MatrixXd full = pencil.a - mean * pencil.b;
    const Eigen::VectorXd sv = backend::singular_values(full);
    const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
    Eigen::Index null_dim = full.rows() - sv.size();
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) <= 1e-6 * sigma_max) ++null_dim;
    }
    null_dim = std::clamp<Eigen::Index>(null_dim, 1, p);

    if (null_dim == 1) {
      Candidate c;
      c.xi = mean;
      c.multiplicity = p;
      simple(backend::smallest_left_singular_vectors(full, 1).col(0), c);
      out.push_back(c);
      begin = end;
      continue;
    }

    const Eigen::MatrixXd k = backend::smallest_left_singular_vectors(full, null_dim).transpose();
    std::vector<Candidate> group;
    try {
      for (const auto& t : recover_theta_multiple(k, pencil.aux)) {
        Candidate c;
        c.xi = mean;
        c.theta = t;
        c.multiplicity = std::max(1, p / static_cast<int>(null_dim));
        // Coincident preimages collapse into one record.
        auto same = std::find_if(group.begin(), group.end(), [&](const Candidate& g) {
          return g.theta.resolved == t.resolved && (g.theta.value - t.value).norm() <= 1e-6;
        });
        if (same != group.end()) {
          same->multiplicity += c.multiplicity;
        } else {
          group.push_back(c);
        }
      }
    } catch (const Error&) {
      group.clear();
      for (std::size_t i = begin; i < end; ++i) {
        Candidate c;
        c.xi = reals[i].xi;
        c.multiplicity_unresolved = true;
        simple(left_vector(reals[i].index, reals[i].xi), c);
        group.push_back(c);
      }
    }
    out.insert(out.end(), group.begin(), group.end());
    begin = end;
  }
  return out;
}

}  // namespace

std::vector<Candidate> solve_candidates(const Pencil& pencil, const SquarePencil& square,
                                        const IntersectConfig& config) {
  return solve_impl(pencil, square, config, nullptr);
}

std::vector<CurveRecord> classify_and_filter(std::span<const Candidate> candidates,
                                             const PowerCurve& curve, const Line2& line,
                                             const IntersectConfig& config) {
  return classify_impl<CurveRecord>(candidates, curve, line, config);
}

std::vector<SurfaceRecord> classify_and_filter(std::span<const Candidate> candidates,
                                               const PowerSurface& surface, const Line3& line,
                                               const IntersectConfig& config) {
  return classify_impl<SurfaceRecord>(candidates, surface, line, config);
}

CurveResult intersect_line(const PowerCurve& curve, const MovingFamily& family, const Line2& line,
                           const IntersectConfig& config) {
  if (family.kind != GeometryKind::curve) {
    throw Error(ErrorKind::shape_mismatch, "surface family used with a curve");
  }
  return intersect_impl<CurveRecord>(curve, family, line, config);
}

SurfaceResult intersect_line(const PowerSurface& surface, const MovingFamily& family,
                             const Line3& line, const IntersectConfig& config) {
  if (family.kind != GeometryKind::tensor_surface) {
    throw Error(ErrorKind::shape_mismatch, "curve family used with a surface");
  }
  return intersect_impl<SurfaceRecord>(surface, family, line, config);
}

CurveResult intersect_line(const PowerCurve& curve, const Line2& line, const IntersectConfig& config,
                           const ImplicitizeOptions& implicitize_options) {
  return intersect_line(curve, implicitize(curve, implicitize_options), line, config);
}

SurfaceResult intersect_line(const PowerSurface& surface, const Line3& line,
                             const IntersectConfig& config,
                             const ImplicitizeOptions& implicitize_options) {
  return intersect_line(surface, implicitize(surface, implicitize_options), line, config);
}

}  // namespace linesect
