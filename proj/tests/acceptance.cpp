// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "linesect/error.hpp"
#include "linesect/implicitize.hpp"
#include "linesect/intersect.hpp"
#include "linesect/numeric_backend.hpp"
#include "linesect/oracle.hpp"
#include "linesect/polybasis.hpp"
#include "test_support.hpp"

using namespace linesect;
using namespace linesect::testing;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  if (!pass) ++failures;
}

void report(const char* id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] %s %s: %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Agreement with a value printed to `digits` significant digits: within one
// unit of the last printed digit. The worked example prints the same root as
// 0.8113 and 0.8112 in different tables, so half a unit is too strict.
bool sig_equal(double got, double want, int digits) {
  const double unit = std::pow(10.0, std::floor(std::log10(std::abs(want))) - (digits - 1));
  return std::abs(got - want) <= unit * (1.0 + 1e-9);
}

const Line2 kPaperLine{Vec2(0, 1), Vec2(4, -2)};

// Running tallies for the count-bound criterion.
int bound_checks = 0;
int bound_violations = 0;

void note_bound(std::size_t confirmed, int bound) {
  ++bound_checks;
  if (confirmed > static_cast<std::size_t>(bound)) ++bound_violations;
}

Line2 random_line_near(const PowerCurve& c) {
  const Vec2 through = c.evaluate(uniform(0, 1)) + random_vec2(-1, 1);
  const double angle = uniform(0, 3.14159265);
  const double scale = uniform(0.5, 4.0);
  const Vec2 dir(std::cos(angle) * scale, std::sin(angle) * scale);
  return Line2(through - uniform(-1, 1) * dir, dir);
}

Line3 random_line_near(const PowerSurface& s) {
  const Vec3 target = s.evaluate(random_vec2(0, 1)) + random_vec3(-0.05, 0.05);
  Vec3 dir = random_vec3(-1, 1);
  dir[2] = uniform(0.5, 1.5) * (uniform(0, 1) < 0.5 ? -1 : 1);
  return Line3(target - uniform(-1, 1) * dir, dir);
}

// ---------------------------------------------------------------------------

void implicitization_golden() {
  const PowerCurve c = paper_cubic();
  const CMatrix cm = assemble_c(c, 3);
  const MovingFamily f = moving_family(cm);
  std::vector<double> times;
  for (int i = 0; i < 50; ++i) {
    const auto t0 = Clock::now();
    const MovingFamily g = moving_family(assemble_c(c, 3));
    times.push_back(seconds_since(t0));
    if (g.nullity() != f.nullity()) times.back() = 1.0;
  }
  std::sort(times.begin(), times.end());
  const double median_ms = times[times.size() / 2] * 1e3;
  const bool pass = cm.entries.rows() == 7 && cm.entries.cols() == 12 && f.rank == 7 && f.nullity() == 5 &&
                    median_ms < 1.0;
  report(1, "implicitization golden",
         pass, fmt("C %lldx%lld rank %d nullity %d, median %.4f ms", (long long)cm.entries.rows(),
                   (long long)cm.entries.cols(), f.rank, f.nullity(), median_ms));
}

void eigenvalue_golden() {
  ImplicitizeOptions opts;
  opts.curve_aux_degree = 3;
  const Pencil p = assemble_pencil(implicitize(paper_cubic(), opts), kPaperLine);
  auto finite = [](const SquarePencil& sq) {
    const auto r = backend::generalized_eig(sq.a, sq.b);
    std::vector<double> out;
    for (const auto& pr : r.pairs) {
      if (!backend::is_infinite(pr, sq.b.norm(), sq.a.rows())) out.push_back(pr.value().real());
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto first = finite(select_square(p, SelectionStrategy::first));
  const auto last = finite(select_square(p, SelectionStrategy::last));
  const std::vector<double> want_first{0.05326, 0.08875, 0.3594, 0.8113};
  const std::vector<double> want_last{0.08875, 0.3594, 0.8112, 28.05};
  bool pass = first.size() == 4 && last.size() == 4;
  for (std::size_t i = 0; pass && i < 4; ++i) {
    pass = sig_equal(first[i], want_first[i], 4) && sig_equal(last[i], want_last[i], 4);
  }
  std::string detail = "first:";
  for (double v : first) detail += fmt(" %.4g", v);
  detail += "  last:";
  for (double v : last) detail += fmt(" %.4g", v);
  report(2, "eigenvalue golden", pass, detail);
}

void end_to_end_golden() {
  const auto res = intersect_line(paper_cubic(), kPaperLine);
  const auto conf = res.confirmed();
  const double thetas[] = {0.09861, 0.5, 0.9014};
  const Vec2 points[] = {{0.3550, 0.8225}, {1.438, 0.2813}, {3.245, -0.6225}};
  bool pass = conf.size() == 3;
  for (std::size_t i = 0; pass && i < 3; ++i) {
    pass = sig_equal(conf[i].theta[0], thetas[i], 4) && sig_equal(conf[i].point[0], points[i][0], 4) &&
           sig_equal(conf[i].point[1], points[i][1], 4);
  }

  // The fictitious fourth candidate of the first-four restriction.
  ImplicitizeOptions opts;
  opts.curve_aux_degree = 3;
  IntersectConfig cfg;
  cfg.strategy = SelectionStrategy::first;
  const auto demo = intersect_line(paper_cubic(), kPaperLine, cfg, opts);
  bool fict = false;
  double ft = 0, fx = 0, fy = 0;
  for (const auto& r : demo.records) {
    if (r.status != RecordStatus::fictitious) continue;
    ft = r.theta[0];
    const Vec2 x = paper_cubic().evaluate(ft);
    fx = x[0];
    fy = x[1];
    fict = sig_equal(ft, 0.03932, 4) && sig_equal(fx, 0.1506, 4) && sig_equal(fy, 0.3949, 4);
  }
  pass = pass && fict && demo.confirmed().size() == 3;
  report(3, "end-to-end golden", pass,
         fmt("%zu confirmed; fictitious theta %.4g with x(theta)=(%.4g, %.4g)", conf.size(), ft, fx, fy));
}

void declared_degree_footnote() {
  const PowerCurve c({{0, 0}, {4, 11.25}, {-4.5, -31.5}, {0, 0}});
  ImplicitizeOptions opts;
  opts.curve_aux_degree = 3;
  const MovingFamily f = implicitize(c, opts);
  // Highest one-based index with a nonzero coefficient.
  const int n = c.effective_degree() + 1;
  const int formula = 2 * 3 - n + 3;
  report(4, "declared-degree nullity", f.nullity() == 7,
         fmt("nullity %d (expected 7); 2*q_g - n + 3 with n=%d gives %d", f.nullity(), n, formula));
}

void oracle_curves() {
  const auto t0 = Clock::now();
  int cases = 0, mismatched = 0, missed = 0, spurious = 0, errors = 0, far = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int degree = 1 + trial % 5;
    const PowerCurve c = random_power_curve(degree, 5.0);
    const Line2 line = random_line_near(c);
    ++cases;
    try {
      const auto res = intersect_line(c, line);
      note_bound(res.confirmed().size(), degree);
      const auto ref = oracle::oracle_curve(c, line);
      far += static_cast<int>(ref.far_roots.size());
      const auto ag = oracle::compare(res, ref, 1e-7);
      if (!ag.agree) {
        ++mismatched;
        if (std::getenv("LINESECT_ACCEPTANCE_VERBOSE")) {
          std::printf("   mismatch: degree %d\n     pipeline:", degree);
          for (const auto& r : res.records)
            std::printf(" [%s xi=%.10g th=%.6g res=%.2g]", to_string(r.status), r.xi, r.theta[0], r.residual);
          std::printf("\n     oracle:  ");
          for (const auto& r : ref.intersections) std::printf(" [xi=%.10g th=%.6g]", r.xi, r.theta[0]);
          std::printf("\n");
        }
      }
      missed += ag.missed;
      spurious += ag.spurious;
    } catch (const Error&) {
      ++errors;
    }
  }
  const double secs = seconds_since(t0);
  report(5, "oracle equivalence, curves", mismatched == 0 && errors == 0 && secs < 10.0,
         fmt("%d cases, %d mismatched, %d missed, %d spurious, %d errors, %.2f s; %d oracle roots beyond the "
             "far limit",
             cases, mismatched, missed, spurious, errors, secs, far));
}

void oracle_surfaces() {
  const auto t0 = Clock::now();
  int cases = 0, mismatched = 0, missed = 0, spurious = 0, warned = 0, excused = 0, errors = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::array<int, 2> q = trial < 100 ? std::array<int, 2>{2, 2} : std::array<int, 2>{3, 3};
    const PowerSurface s = random_patch(q);
    const Line3 line = random_line_near(s);
    ++cases;
    try {
      const auto res = intersect_line(s, line);
      note_bound(res.confirmed().size(), 2 * q[0] * q[1]);
      const auto ref = oracle::oracle_surface(s, line);
      const auto ag = oracle::compare(res, ref, 1e-6);
      if (!ag.agree) {
        ++mismatched;
        if (std::getenv("LINESECT_ACCEPTANCE_VERBOSE")) {
          std::printf("   mismatch: q (%d, %d), %zu oracle warnings\n     pipeline:", q[0], q[1],
                      ref.warnings.size());
          for (const auto& r : res.records)
            std::printf(" [%s xi=%.10g th=(%.6g, %.6g) res=%.2g]", to_string(r.status), r.xi, r.theta[0],
                        r.theta[1], r.residual);
          std::printf("\n     oracle:  ");
          for (const auto& r : ref.intersections)
            std::printf(" [xi=%.10g th=(%.6g, %.6g)]", r.xi, r.theta[0], r.theta[1]);
          std::printf("\n");
        }
      }
      if (ref.possibly_missed_root()) ++warned;
      // Confirmed records the sampling oracle lacks, accepted only because it
      // flagged a possibly missed root.
      if (ag.agree && ag.spurious > 0) excused += ag.spurious;
      missed += ag.missed;
      spurious += ag.spurious;
    } catch (const Error&) {
      ++errors;
    }
  }
  const double secs = seconds_since(t0);
  report(6, "oracle equivalence, surfaces", mismatched == 0 && errors == 0 && secs < 120.0,
         fmt("%d cases, %d mismatched, %d missed, %d spurious (%d excused by oracle warnings), %d cases with "
             "warnings, %d errors, %.1f s",
             cases, mismatched, missed, spurious, excused, warned, errors, secs));
}

void count_bounds() {
  report(7, "count bounds", bound_checks > 0 && bound_violations == 0,
         fmt("%d runs, %d violations", bound_checks, bound_violations));
}

void selection_consistency() {
  int cases = 0, inconsistent = 0, errors = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int degree = 2 + trial % 4;
    const PowerCurve c = random_power_curve(degree, 5.0);
    const Line2 line = random_line_near(c);
    ImplicitizeOptions opts;
    opts.curve_aux_degree = degree;  // one above the minimum: nullity > rows
    try {
      const MovingFamily f = implicitize(c, opts);
      if (f.nullity() <= f.aux.size()) continue;
      ++cases;
      std::vector<std::vector<double>> sets;
      for (auto s : {SelectionStrategy::conditioning, SelectionStrategy::first, SelectionStrategy::last}) {
        IntersectConfig cfg;
        cfg.strategy = s;
        std::vector<double> xs;
        for (const auto& r : intersect_line(c, f, line, cfg).confirmed()) xs.push_back(r.xi);
        sets.push_back(xs);
      }
      bool same = true;
      for (std::size_t k = 1; k < sets.size(); ++k) {
        if (sets[k].size() != sets[0].size()) {
          same = false;
          break;
        }
        for (std::size_t i = 0; i < sets[0].size(); ++i) {
          if (std::abs(sets[k][i] - sets[0][i]) > 1e-7 * std::max(1.0, std::abs(sets[0][i]))) same = false;
        }
      }
      if (!same) {
        ++inconsistent;
        if (std::getenv("LINESECT_ACCEPTANCE_VERBOSE")) {
          std::printf("   inconsistent: degree %d line (%.17g, %.17g) + xi (%.17g, %.17g)\n", degree, line.origin[0],
                      line.origin[1], line.direction[0], line.direction[1]);
          std::printf("     coeffs:");
          for (const auto& a : c.coeffs()) std::printf(" {%.17g, %.17g}", a[0], a[1]);
          std::printf("\n");
          for (const auto& set : sets) {
            std::printf("    ");
            for (double v : set) std::printf(" %.12g", v);
            std::printf("\n");
          }
        }
      }
    } catch (const Error&) {
      ++errors;
    }
  }
  report(8, "selection consistency", cases == 100 && inconsistent == 0 && errors == 0,
         fmt("%d cases with nullity > rows, %d inconsistent, %d errors", cases, inconsistent, errors));
}

void line_reparametrization() {
  int cases = 0, broken = 0;
  double worst_xi = 0, worst_theta = 0, worst_point = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int degree = 1 + trial % 5;
    const PowerCurve c = random_power_curve(degree, 5.0);
    const Line2 line = random_line_near(c);
    const double shift = uniform(-2, 2);
    const double scale = uniform(0.25, 4.0) * (trial % 2 ? -1.0 : 1.0);
    const Line2 moved(line.origin + shift * line.direction, scale * line.direction);
    const MovingFamily f = implicitize(c);
    auto a = intersect_line(c, f, line).confirmed();
    auto b = intersect_line(c, f, moved).confirmed();
    ++cases;
    if (a.size() != b.size()) {
      ++broken;
      if (std::getenv("LINESECT_ACCEPTANCE_VERBOSE")) {
        std::printf("   reparametrized count %zu vs %zu (shift %.6g, scale %.6g):", a.size(), b.size(), shift, scale);
        for (const auto& r : a) std::printf(" %.10g", r.xi);
        std::printf(" |");
        for (const auto& r : b) std::printf(" %.10g", r.xi);
        std::printf("\n");
      }
      continue;
    }
    auto by_theta = [](const CurveRecord& x, const CurveRecord& y) { return x.theta[0] < y.theta[0]; };
    std::sort(a.begin(), a.end(), by_theta);
    std::sort(b.begin(), b.end(), by_theta);
    bool ok = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double dxi = std::abs(b[i].xi - (a[i].xi - shift) / scale) / std::max(1.0, std::abs(b[i].xi));
      const double dth = std::abs(a[i].theta[0] - b[i].theta[0]);
      const double dpt = (a[i].point - b[i].point).norm() / std::max(1.0, a[i].point.norm());
      worst_xi = std::max(worst_xi, dxi);
      worst_theta = std::max(worst_theta, dth);
      worst_point = std::max(worst_point, dpt);
      ok = ok && dxi <= 1e-8 && dth <= 1e-8 && dpt <= 1e-8;
    }
    if (!ok) ++broken;
  }
  report(9, "line reparametrization", broken == 0,
         fmt("%d cases, %d broken; worst xi %.1e, theta %.1e, point %.1e", cases, broken, worst_xi, worst_theta,
             worst_point));
}

void nodal_double_point() {
  // x(s) = (t^2 - 1, t^3 - t), t = 2s - 1: the branches cross at the origin
  // for s = 0 and s = 1.
  const PowerCurve c({{0, 0}, {-4, 4}, {4, -12}, {0, 8}});
  const Line2 line(Vec2(-1, -0.3), Vec2(1, 0.3));
  const auto conf = intersect_line(c, line).confirmed();
  std::vector<CurveRecord> at_node;
  for (const auto& r : conf) {
    if (std::abs(r.xi - 1.0) < 1e-6) at_node.push_back(r);
  }
  bool pass = at_node.size() == 2;
  double gap = -1, sep = -1;
  if (pass) {
    sep = std::abs(at_node[0].theta[0] - at_node[1].theta[0]);
    gap = (c.evaluate(at_node[0].theta[0]) - c.evaluate(at_node[1].theta[0])).norm();
    pass = sep > 0.5 && gap < 1e-7 && !at_node[0].multiplicity_unresolved && !at_node[1].multiplicity_unresolved;
  }
  report(10, "nodal double point", pass,
         fmt("%zu preimages at the node, theta separation %.6f, point gap %.1e", at_node.size(), sep, gap));
}

void matrix_sizes() {
  bool pass = true;
  std::string detail;
  for (int q = 1; q <= 5; ++q) {
    const CMatrix cc = assemble_c(random_power_curve(q), min_aux_degree_curve(q));
    const CMatrix cs = assemble_c(random_patch({q, q}), min_aux_bidegree_surface({q, q}, 1));
    const bool ok = cc.entries.rows() == 2 * q && cc.entries.cols() == 3 * q && cs.entries.rows() == 6 * q * q &&
                    cs.entries.cols() == 8 * q * q;
    pass = pass && ok;
    detail += fmt("%sq=%d %lldx%lld/%lldx%lld", q == 1 ? "" : ", ", q, (long long)cc.entries.rows(),
                  (long long)cc.entries.cols(), (long long)cs.entries.rows(), (long long)cs.entries.cols());
  }
  report("--", "matrix sizes", pass, detail);
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{
      implicitization_golden, eigenvalue_golden, end_to_end_golden, declared_degree_footnote,
      oracle_curves,          oracle_surfaces,   count_bounds,      selection_consistency,
      line_reparametrization, nodal_double_point, matrix_sizes};
  for (const auto& run : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      std::printf("[FAIL] unexpected exception: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
