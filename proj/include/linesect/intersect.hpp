#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "linesect/implicitize.hpp"
#include "linesect/polybasis.hpp"

namespace linesect {

/// r(xi) = origin + xi * direction.
template <int Dim>
struct QueryLine {
  using Point = Eigen::Matrix<double, Dim, 1>;

  Point origin;
  Point direction;

  QueryLine(const Point& origin_, const Point& direction_);

  Point point_at(double xi) const { return origin + xi * direction; }
};

using Line2 = QueryLine<2>;
using Line3 = QueryLine<3>;

extern template struct QueryLine<2>;
extern template struct QueryLine<3>;

/// Rectangular pencil A - xi B: one row per auxiliary basis function, one
/// column per moving line (plane). Column i is the restriction of family
/// member i to the query line.
struct Pencil {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  AuxBasis aux;
};

Pencil assemble_pencil(const MovingFamily& family, const Line2& line);
Pencil assemble_pencil(const MovingFamily& family, const Line3& line);

enum class SelectionStrategy {
  conditioning,  // column-pivoted QR on the stacked [A; B]
  first,
  last,
};

const char* to_string(SelectionStrategy s) noexcept;

struct SquarePencil {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  std::vector<Eigen::Index> columns;  // ascending
};

SquarePencil select_square(const Pencil& pencil, SelectionStrategy strategy);

/// Parameter estimate recovered from an eigenvector. A direction whose
/// auxiliary degree is zero carries no parameter information and is left
/// unresolved for the caller to complete from the geometry.
struct ThetaEstimate {
  Vec2 value = Vec2::Zero();
  std::array<bool, 2> resolved{false, false};

  bool complete(int param_dim) const { return resolved[0] && (param_dim == 1 || resolved[1]); }
};

/// phi is proportional to the auxiliary basis at the preimage. Each
/// direction takes the ratio phi[k + stride] / phi[k] over the admissible
/// pair with the largest |phi[k]|. Throws ambiguous_preimage when every
/// admissible denominator is negligible.
ThetaEstimate recover_theta_simple(const Eigen::VectorXd& phi, const AuxBasis& aux);

/// Preimages of one intersection point from the p x n matrix K whose rows
/// span the left null space of the pencil at that point. Builds p x p
/// column blocks Delta_i, Delta_{i+1} of K (shifted by one power of the
/// parameter) and solves (Delta_{i+1} - t Delta_i) psi = 0, using the best
/// conditioned Delta_i. Throws unresolved_multiplicity when no block is
/// usable or the recovered parameters are not real.
std::vector<ThetaEstimate> recover_theta_multiple(const Eigen::MatrixXd& k, const AuxBasis& aux);

enum class RecordStatus { confirmed, fictitious, complex_discarded, infinite_discarded };

const char* to_string(RecordStatus s) noexcept;

enum class DomainFilter { all, unit };

inline constexpr double kDefaultFarLimit = 1e12;

template <int ParamDim, int SpaceDim>
struct IntersectionRecord {
  using Param = Eigen::Matrix<double, ParamDim, 1>;
  using Point = Eigen::Matrix<double, SpaceDim, 1>;

  double xi = 0.0;
  double xi_imag = 0.0;
  Param theta = Param::Constant(std::numeric_limits<double>::quiet_NaN());
  Point point = Point::Constant(std::numeric_limits<double>::quiet_NaN());
  double residual = std::numeric_limits<double>::infinity();
  RecordStatus status = RecordStatus::fictitious;
  int multiplicity = 1;
  bool in_domain = true;
  bool multiplicity_unresolved = false;
};

using CurveRecord = IntersectionRecord<1, 2>;
using SurfaceRecord = IntersectionRecord<2, 3>;

/// An eigenvalue of the square pencil together with whatever parameter
/// information its eigenvector carried.
struct Candidate {
  std::complex<double> xi;
  bool infinite = false;
  ThetaEstimate theta;
  int multiplicity = 1;
  bool multiplicity_unresolved = false;
};

struct IntersectConfig {
  SelectionStrategy strategy = SelectionStrategy::conditioning;
  double confirm_tol = 1e-6;   // residual relative to 1 + |x(theta)|
  double complex_tol = 1e-8;   // |Im xi| relative to 1 + |Re xi|
  double cluster_tol = 1e-7;   // relative eigenvalue grouping
  bool column_scaling = false;
  bool polish = true;          // Newton refinement of confirmed records
  // Intersections beyond far_limit (see beyond_far_limit) are reported as
  // infinite: the pencil cannot separate them from infinity in double
  // precision.
  double far_limit = kDefaultFarLimit;
  DomainFilter domain = DomainFilter::all;
};

std::vector<CurveRecord> classify_and_filter(std::span<const Candidate> candidates,
                                             const PowerCurve& curve, const Line2& line,
                                             const IntersectConfig& config = {});
std::vector<SurfaceRecord> classify_and_filter(std::span<const Candidate> candidates,
                                               const PowerSurface& surface, const Line3& line,
                                               const IntersectConfig& config = {});

/// Candidates from one square sub-pencil: eigenvalues classified by
/// finiteness and realness, real ones grouped into clusters, parameters
/// recovered per cluster.
std::vector<Candidate> solve_candidates(const Pencil& pencil, const SquarePencil& square,
                                        const IntersectConfig& config = {});

/// True when r(xi) lies beyond the resolvable range of the line: further
/// from the coordinate origin than far_limit times (1 + the line's own
/// distance from it). Depends only on the point, not on how the line is
/// parametrized.
template <int Dim>
bool beyond_far_limit(double xi, const QueryLine<Dim>& line, double far_limit) {
  const auto foot = line.point_at(-line.direction.dot(line.origin) / line.direction.squaredNorm());
  return line.point_at(xi).norm() > far_limit * (1.0 + foot.norm());
}

template <class Record>
struct LineResult {
  std::vector<Record> records;  // confirmed first, each status group by xi
  std::vector<Eigen::Index> selected_columns;
  SelectionStrategy strategy_used = SelectionStrategy::conditioning;

  std::vector<Record> confirmed() const {
    std::vector<Record> out;
    for (const auto& r : records) {
      if (r.status == RecordStatus::confirmed) out.push_back(r);
    }
    return out;
  }
};

using CurveResult = LineResult<CurveRecord>;
using SurfaceResult = LineResult<SurfaceRecord>;

/// Intersections of a line with a geometry whose moving family is already
/// known. The family depends only on the geometry and can be shared by any
/// number of lines.
CurveResult intersect_line(const PowerCurve& curve, const MovingFamily& family, const Line2& line,
                           const IntersectConfig& config = {});
SurfaceResult intersect_line(const PowerSurface& surface, const MovingFamily& family,
                             const Line3& line, const IntersectConfig& config = {});

CurveResult intersect_line(const PowerCurve& curve, const Line2& line,
                           const IntersectConfig& config = {},
                           const ImplicitizeOptions& implicitize_options = {});
SurfaceResult intersect_line(const PowerSurface& surface, const Line3& line,
                             const IntersectConfig& config = {},
                             const ImplicitizeOptions& implicitize_options = {});

}  // namespace linesect
