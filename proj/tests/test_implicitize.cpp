#include <doctest.h>

#include <Eigen/Dense>

#include "linesect/error.hpp"
#include "linesect/implicitize.hpp"
#include "linesect/numeric_backend.hpp"
#include "test_support.hpp"

using namespace linesect;
using namespace linesect::testing;

namespace {

Eigen::VectorXd homog(const Vec2& x) { return Eigen::Vector3d(x[0], x[1], 1.0); }
Eigen::VectorXd homog(const Vec3& x) { return Eigen::Vector4d(x[0], x[1], x[2], 1.0); }

void check_curve_identity(const PowerCurve& c, const MovingFamily& f, int samples) {
  for (Eigen::Index i = 0; i < f.nullity(); ++i) {
    const double gnorm = f.vectors.col(i).norm();
    for (int k = 0; k < samples; ++k) {
      const double t = uniform(-0.5, 1.5);
      const Vec2 x = c.evaluate(t);
      CHECK(std::abs(f.evaluate(i, Vec2(t, 0), homog(x))) <= 1e-9 * (1.0 + x.norm()) * gnorm);
    }
  }
}

void check_surface_identity(const PowerSurface& s, const MovingFamily& f, int samples) {
  for (Eigen::Index i = 0; i < f.nullity(); ++i) {
    const double gnorm = f.vectors.col(i).norm();
    for (int k = 0; k < samples; ++k) {
      const Vec2 t = random_vec2(-0.25, 1.25);
      const Vec3 x = s.evaluate(t);
      CHECK(std::abs(f.evaluate(i, t, homog(x))) <= 1e-9 * (1.0 + x.norm()) * gnorm);
    }
  }
}

}  // namespace

TEST_SUITE("implicitize") {

TEST_CASE("minimal auxiliary degrees") {
  CHECK(min_aux_degree_curve(3) == 2);
  CHECK(min_aux_degree_curve(1) == 0);
  CHECK(min_aux_degree_curve(2) == 1);
  try {
    (void)min_aux_degree_curve(0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_geometry);
  }

  CHECK(min_aux_bidegree_surface({2, 2}, 1) == std::array<int, 2>{3, 1});
  CHECK(min_aux_bidegree_surface({1, 1}, 1) == std::array<int, 2>{1, 0});
  CHECK(min_aux_bidegree_surface({3, 3}, 2) == std::array<int, 2>{2, 5});
  CHECK_THROWS_AS(min_aux_bidegree_surface({0, 2}, 1), Error);

  for (int a = 1; a <= 5; ++a) {
    for (int b = 1; b <= 5; ++b) {
      for (int dir = 1; dir <= 2; ++dir) {
        CHECK(satisfies_surface_count({a, b}, min_aux_bidegree_surface({a, b}, dir)));
      }
    }
  }
  CHECK(default_elongated_direction({2, 3}) == 2);
  CHECK(default_elongated_direction({3, 3}) == 1);

  CHECK(min_aux_degree_triangle(2) == 2);
  CHECK(min_aux_degree_triangle(3) == 4);
  CHECK(min_aux_degree_triangle(1) == 0);
}

TEST_CASE("cubic example C matrix") {
  const CMatrix c = assemble_c(paper_cubic(), 3);
  REQUIRE(c.entries.rows() == 7);
  REQUIRE(c.entries.cols() == 12);
  Eigen::MatrixXd expected(7, 12);
  expected << 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0,
      4, 0, 0, 0, 11.25, 0, 0, 0, 0, 1, 0, 0,
      -4.5, 4, 0, 0, -31.5, 11.25, 0, 0, 0, 0, 1, 0,
      4.5, -4.5, 4, 0, 20.25, -31.5, 11.25, 0, 0, 0, 0, 1,
      0, 4.5, -4.5, 4, 0, 20.25, -31.5, 11.25, 0, 0, 0, 0,
      0, 0, 4.5, -4.5, 0, 0, 20.25, -31.5, 0, 0, 0, 0,
      0, 0, 0, 4.5, 0, 0, 0, 20.25, 0, 0, 0, 0;
  CHECK((c.entries - expected).norm() < 1e-12);

  const MovingFamily f = moving_family(c);
  CHECK(f.rank == 7);
  CHECK(f.nullity() == 5);
}

TEST_CASE("straight segment") {
  const PowerCurve seg({{0, 0}, {1, 0}});
  const CMatrix c = assemble_c(seg, 0);
  Eigen::MatrixXd expected(2, 3);
  expected << 0, 0, 1, 1, 0, 0;
  CHECK((c.entries - expected).norm() == 0.0);
  const MovingFamily f = moving_family(c);
  REQUIRE(f.nullity() == 1);
  CHECK(std::abs(std::abs(f.vectors(1, 0)) - 1.0) < 1e-14);
  CHECK(std::abs(f.vectors(0, 0)) < 1e-14);
  CHECK(std::abs(f.vectors(2, 0)) < 1e-14);
}

TEST_CASE("aux degree below the minimum is rejected") {
  CHECK_THROWS_AS(assemble_c(paper_cubic(), 1), Error);
  CHECK_THROWS_AS(assemble_c(random_patch({2, 2}), {1, 1}), Error);
}

TEST_CASE("curve moving-line identity") {
  for (int degree = 1; degree <= 6; ++degree) {
    for (int trial = 0; trial < 5; ++trial) {
      const PowerCurve c = random_power_curve(degree);
      for (int extra = 0; extra <= 1; ++extra) {
        ImplicitizeOptions opts;
        opts.curve_aux_degree = min_aux_degree_curve(degree) + extra;
        const MovingFamily f = implicitize(c, opts);
        CHECK(f.nullity() >= degree);
        CHECK(f.nullity() >= 2 * *opts.curve_aux_degree - degree + 2);
        check_curve_identity(c, f, 50);
      }
    }
  }
}

TEST_CASE("a cubic declared with a vanishing top coefficient has a larger family") {
  // n = highest one-based index with a nonzero coefficient; the family size
  // is exactly 2 q_g - n + 3.
  PowerCurve c({{0, 0}, {4, 11.25}, {-4.5, -31.5}, {0, 0}});
  const int n = 3;
  for (int qg = 2; qg <= 6; ++qg) {
    ImplicitizeOptions opts;
    opts.curve_aux_degree = qg;
    const MovingFamily f = implicitize(c, opts);
    CHECK(f.nullity() == 2 * qg - n + 3);
    check_curve_identity(c, f, 20);
  }
  // Generic cubic: n = 4.
  CHECK(implicitize(paper_cubic(), ImplicitizeOptions{3, {}, 0, {}}).nullity() == 2 * 3 - 4 + 3);
}

TEST_CASE("raising the auxiliary degree adds two moving lines") {
  for (int trial = 0; trial < 20; ++trial) {
    const int degree = 1 + trial % 5;
    const PowerCurve c = random_power_curve(degree);
    const int q0 = min_aux_degree_curve(degree);
    ImplicitizeOptions lo, hi;
    lo.curve_aux_degree = q0 + 1;
    hi.curve_aux_degree = q0 + 2;
    CHECK(implicitize(c, hi).nullity() - implicitize(c, lo).nullity() == 2);
  }
}

TEST_CASE("rank of C is invariant under rigid motions and translations") {
  for (int trial = 0; trial < 20; ++trial) {
    const int degree = 2 + trial % 4;
    const PowerCurve c = random_power_curve(degree);
    const double angle = uniform(0, 6.28);
    Eigen::Matrix2d rot;
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    const Vec2 shift = random_vec2(-10, 10);
    std::vector<Vec2> moved;
    for (int j = 0; j <= degree; ++j) moved.push_back(rot * c.coeff(j) + (j == 0 ? shift : Vec2::Zero()));
    const int q = min_aux_degree_curve(degree) + 1;
    const auto f0 = moving_family(assemble_c(c, q));
    const auto f1 = moving_family(assemble_c(PowerCurve(moved), q));
    CHECK(f0.rank == f1.rank);
    CHECK(f0.nullity() == f1.nullity());
  }
}

TEST_CASE("insufficient family is reported") {
  // A rank tolerance so coarse that almost everything counts as null still
  // passes; a negative nullity cannot happen, so force failure through a
  // family built against a C whose algebraic degree is overstated.
  CMatrix c = assemble_c(paper_cubic(), 2);
  c.algebraic_degree = 10;
  try {
    (void)moving_family(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_family);
  }
}

TEST_CASE("row scaling keeps a valid family") {
  PowerCurve c = random_power_curve(4, 500.0);
  ImplicitizeOptions opts;
  opts.family.row_scaling = true;
  const MovingFamily f = implicitize(c, opts);
  CHECK(f.nullity() >= 4);
  check_curve_identity(c, f, 20);
}

TEST_CASE("surface families") {
  SUBCASE("bilinear patch") {
    const PowerSurface s = bilinear_unit_patch();
    ImplicitizeOptions opts;
    opts.surface_aux_degree = std::array<int, 2>{1, 0};
    const MovingFamily f = implicitize(s, opts);
    const CMatrix c = assemble_c(s, {1, 0});
    CHECK(c.entries.rows() == 6);
    CHECK(c.entries.cols() == 8);
    CHECK(f.nullity() >= 2);
    for (Eigen::Index i = 0; i < f.nullity(); ++i) {
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const Vec2 t(a / 3.0, b / 3.0);
          CHECK(std::abs(f.evaluate(i, t, homog(s.evaluate(t)))) < 1e-10);
        }
      }
    }
  }
  SUBCASE("constant patch") {
    const Vec3 p(0.5, -1, 2);
    const PowerSurface s({1, 1}, {p, Vec3::Zero(), Vec3::Zero(), Vec3::Zero()});
    const CMatrix c = assemble_c(s, {1, 0});
    const auto ns = backend::null_space(c.entries);
    CHECK(ns.basis.cols() == c.entries.cols() - ns.rank);
    // Only the constant row block carries constraints: 2 aux functions, each
    // giving one equation.
    CHECK(ns.rank == 2);
  }
  SUBCASE("random biquadratic") {
    for (int trial = 0; trial < 5; ++trial) {
      const PowerSurface s = random_patch({2, 2});
      ImplicitizeOptions opts;
      opts.surface_aux_degree = std::array<int, 2>{3, 1};
      const MovingFamily f = implicitize(s, opts);
      CHECK(f.nullity() >= 8);
      check_surface_identity(s, f, 50);
    }
  }
  SUBCASE("default degrees for mixed bidegree") {
    const PowerSurface s = random_patch({1, 3});
    const MovingFamily f = implicitize(s);
    CHECK(f.aux.degree == std::array<int, 2>{0, 5});
    CHECK(f.algebraic_degree == 6);
    check_surface_identity(s, f, 30);
  }
}

TEST_CASE("matrix sizes at minimal degree") {
  for (int q = 1; q <= 5; ++q) {
    const CMatrix cc = assemble_c(random_power_curve(q), min_aux_degree_curve(q));
    CHECK(cc.entries.rows() == 2 * q);
    CHECK(cc.entries.cols() == 3 * q);
    const CMatrix cs = assemble_c(random_patch({q, q}), min_aux_bidegree_surface({q, q}, 1));
    CHECK(cs.entries.rows() == 6 * q * q);
    CHECK(cs.entries.cols() == 8 * q * q);
  }
}

}  // TEST_SUITE
