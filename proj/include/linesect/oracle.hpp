#pragma once

#include <string>
#include <vector>

#include "linesect/intersect.hpp"
#include "linesect/polybasis.hpp"

// Brute-force reference intersections for verification. Deliberately built
// from different algorithms than the moving-line pipeline: substitution
// into the line's implicit equation with companion-matrix roots for curves,
// dense sampling plus Newton refinement for surfaces.
namespace linesect::oracle {

template <int ParamDim, int SpaceDim>
struct OracleRoot {
  Eigen::Matrix<double, ParamDim, 1> theta;
  double xi = 0.0;
  Eigen::Matrix<double, SpaceDim, 1> point;
};

enum class Method { companion, sampled_refined };

template <int ParamDim, int SpaceDim>
struct OracleResult {
  std::vector<OracleRoot<ParamDim, SpaceDim>> intersections;  // sorted by xi
  Method method = Method::companion;
  int certified_count = 0;
  std::vector<std::string> warnings;  // possibly-missed roots
  // Roots beyond the line's resolvable range (see beyond_far_limit); like
  // roots at infinity they take no part in comparisons.
  std::vector<OracleRoot<ParamDim, SpaceDim>> far_roots;

  bool possibly_missed_root() const { return !warnings.empty(); }
};

using CurveOracleResult = OracleResult<1, 2>;
using SurfaceOracleResult = OracleResult<2, 3>;

/// Real roots of n . x(t) + d = 0 for the line's implicit equation, polished
/// by Newton. Throws infinite_intersections when the curve lies in the line.
CurveOracleResult oracle_curve(const PowerCurve& curve, const Line2& line,
                               double far_limit = kDefaultFarLimit);

struct SurfaceOracleOptions {
  int grid = 200;
  double box_lo = -0.5;
  double box_hi = 1.5;
  double dedupe_tol = 1e-6;  // relative to |theta|
  double far_limit = kDefaultFarLimit;
};

SurfaceOracleResult oracle_surface(const PowerSurface& surface, const Line3& line,
                                   const SurfaceOracleOptions& options = {});

}  // namespace linesect::oracle

namespace linesect::oracle {

struct Agreement {
  bool agree = true;
  int matched = 0;
  int missed = 0;    // oracle roots with no confirmed counterpart
  int spurious = 0;  // confirmed records with no oracle counterpart
};

/// Pairs confirmed records with oracle roots by xi, within
/// xi_tol * max(1, |xi|).
Agreement compare(const CurveResult& result, const CurveOracleResult& reference, double xi_tol);

/// Surface variant: also requires |theta difference| <= xi_tol * max(1, |theta|).
/// Confirmed records outside the oracle's search box are not counted as
/// spurious. Confirmed records the oracle lacks are excused only when the
/// oracle flagged a possibly missed root.
Agreement compare(const SurfaceResult& result, const SurfaceOracleResult& reference, double xi_tol,
                  const SurfaceOracleOptions& options = {});

}  // namespace linesect::oracle
