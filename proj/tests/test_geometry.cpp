#include <doctest.h>

#include "oracles.hpp"
#include "smtpcps/errors.hpp"
#include "smtpcps/geometry.hpp"

#include <sstream>

using namespace smtpcps;
using oracle::v1;
using oracle::v2;

namespace {

Polytope unit_box() { return Polytope::symmetric_box(v2(1, 1)); }

Polytope triangle() { return Polytope::from_vertices({v2(0, 0), v2(1, 0), v2(0, 1)}); }

const Matrix& reference_a() {
  static const Matrix a = [] {
    Matrix m(2, 2);
    m << 1.0, 0.0975, 0.0, 0.9512;
    return m;
  }();
  return a;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("contains: interior, exterior and closed boundary") {
    CHECK(contains(unit_box(), v2(0.5, -0.5)));
    CHECK_FALSE(contains(unit_box(), v2(1.2, 0.0)));
    CHECK(contains(unit_box(), v2(1.0, 1.0)));
    CHECK_FALSE(contains(Polytope::empty(2), v2(0, 0)));
    CHECK_THROWS_AS(contains(unit_box(), v1(0.0)), ContractViolation);
  }

  TEST_CASE("box construction normalizes and caches vertices") {
    const auto p = unit_box();
    CHECK(p.num_halfspaces() == 4);
    CHECK(p.vertices().size() == 4);
    CHECK(p.measure() == doctest::Approx(4.0));
    CHECK(p.is_axis_box());
    for (Eigen::Index i = 0; i < p.normals().rows(); ++i) CHECK(p.normals().row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("redundant and unnormalized rows are dropped") {
    Matrix n(6, 2);
    n << 2, 0, 0, 3, -1, 0, 0, -1, 1, 1, 1, 0;
    Vector b(6);
    b << 2, 3, 1, 1, 5, 4;  // x<=1, y<=1, x>=-1, y>=-1, x+y<=5 (redundant), x<=4 (redundant)
    const auto p = Polytope::from_halfspaces(n, b);
    CHECK(p.num_halfspaces() == 4);
    CHECK(oracle::same_vertex_set(p.vertices(), unit_box().vertices(), 1e-12));
  }

  TEST_CASE("support") {
    CHECK(support(unit_box(), v2(0.6, 0.8)) == doctest::Approx(1.4));
    CHECK(support(unit_box(), v2(1, 0)) == doctest::Approx(1.0));
    // max of (1,1).v over (0,0), (1,0), (0,1)
    CHECK(support(triangle(), v2(1, 1)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(support(Polytope::empty(2), v2(1, 0)), EmptySetError);
  }

  TEST_CASE("minkowski_sum") {
    const auto s = minkowski_sum(unit_box(), Polytope::symmetric_box(v2(0.5, 0.5)));
    CHECK(oracle::same_vertex_set(s.vertices(), Polytope::symmetric_box(v2(1.5, 1.5)).vertices(), 1e-12));

    const auto t = minkowski_sum(triangle(), Polytope::singleton(v2(0.3, -2.0)));
    CHECK(oracle::same_vertex_set(t.vertices(), {v2(0.3, -2), v2(1.3, -2), v2(0.3, -1)}, 1e-12));

    // Oracle: extreme points of all pairwise vertex sums.
    const auto seg = Polytope::from_vertices({v2(-1, 0), v2(1, 0)});
    CHECK(seg.vertices().size() == 2);
    const auto tri = triangle();
    std::vector<Vector> sums;
    for (const auto& a : tri.vertices()) {
      for (const auto& b : seg.vertices()) sums.push_back(a + b);
    }
    const auto expected = oracle::extreme_points(sums);
    CHECK(oracle::same_vertex_set(expected, {v2(-1, 0), v2(2, 0), v2(1, 1), v2(-1, 1)}, 1e-12));
    CHECK(oracle::same_vertex_set(minkowski_sum(triangle(), seg).vertices(), expected, 1e-12));

    CHECK(minkowski_sum(unit_box(), Polytope::empty(2)).is_empty());
  }

  TEST_CASE("pontryagin_diff") {
    const auto e = pontryagin_diff(unit_box(), Polytope::symmetric_box(v2(0.12, 0.12)));
    CHECK(oracle::same_vertex_set(e.vertices(), Polytope::symmetric_box(v2(0.88, 0.88)).vertices(), 1e-12));

    const auto same = pontryagin_diff(triangle(), Polytope::singleton(v2(0, 0)));
    CHECK(oracle::same_vertex_set(same.vertices(), triangle().vertices(), 1e-12));

    CHECK(pontryagin_diff(Polytope::symmetric_box(v2(0.1, 0.1)), Polytope::symmetric_box(v2(0.2, 0.2))).is_empty());
  }

  TEST_CASE("pontryagin_diff down to a point or a segment keeps the degenerate set") {
    const auto pt = pontryagin_diff(unit_box(), unit_box());
    REQUIRE_FALSE(pt.is_empty());
    CHECK(pt.vertices().size() == 1);
    CHECK(pt.vertices()[0].norm() < 1e-12);
    CHECK(pt.measure() == 0.0);

    const auto seg = pontryagin_diff(Polytope::symmetric_box(v2(2, 1)), unit_box());
    REQUIRE_FALSE(seg.is_empty());
    CHECK(oracle::same_vertex_set(seg.vertices(), {v2(-1, 0), v2(1, 0)}, 1e-12));
  }

  TEST_CASE("linear_preimage") {
    const auto half = linear_preimage(unit_box(), 2.0 * Matrix::Identity(2, 2));
    CHECK(oracle::same_vertex_set(half.vertices(), Polytope::symmetric_box(v2(0.5, 0.5)).vertices(), 1e-12));

    const auto id = linear_preimage(triangle(), Matrix::Identity(2, 2));
    CHECK(oracle::same_vertex_set(id.vertices(), triangle().vertices(), 1e-12));

    Matrix singular(2, 2);
    singular << 1, 0, 0, 0;
    CHECK_THROWS_AS(linear_preimage(unit_box(), singular), UnboundedSetError);
  }

  TEST_CASE("linear_preimage under the reference A agrees with a sampling oracle") {
    const auto pre = linear_preimage(unit_box(), reference_a());
    Rng rng(11);
    int agree = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const Vector x = v2(rng.uniform(-2, 2), rng.uniform(-2, 2));
      agree += contains(pre, x) == contains(unit_box(), reference_a() * x);
    }
    CHECK(agree == n);
  }

  TEST_CASE("scale") {
    const auto dc = Polytope::symmetric_box(v2(0.12, 0.12));
    CHECK(oracle::same_vertex_set(scale(dc, 2).vertices(), Polytope::symmetric_box(v2(0.24, 0.24)).vertices(), 1e-15));
    CHECK(oracle::same_vertex_set(scale(dc, 8).vertices(), Polytope::symmetric_box(v2(0.96, 0.96)).vertices(), 1e-15));
    CHECK(oracle::same_vertex_set(scale(triangle(), 1).vertices(), triangle().vertices(), 0.0));
    CHECK(contains(scale(dc, 2), v2(0.24, -0.24)));
    CHECK_THROWS_AS(scale(dc, 0.0), ContractViolation);
    CHECK_THROWS_AS(scale(dc, -1.0), ContractViolation);
  }

  TEST_CASE("is_subset") {
    const auto dc = Polytope::symmetric_box(v2(0.12, 0.12));
    const auto de = Polytope::symmetric_box(v2(0.24, 0.24));
    CHECK(is_subset(dc, de));
    CHECK(is_subset(triangle(), triangle()));
    CHECK_FALSE(is_subset(de, dc));
    CHECK(is_subset(Polytope::empty(2), dc));
    CHECK_FALSE(is_subset(dc, Polytope::empty(2)));
  }

  TEST_CASE("one-dimensional intervals") {
    const auto i = Polytope::interval(-1, 2);
    CHECK(i.vertices().size() == 2);
    CHECK(support(i, v1(1)) == doctest::Approx(2));
    CHECK(support(i, v1(-1)) == doctest::Approx(1));
    const auto s = minkowski_sum(i, Polytope::interval(-0.5, 0.5));
    CHECK(support(s, v1(1)) == doctest::Approx(2.5));
    CHECK(pontryagin_diff(i, Polytope::interval(-2, 2)).is_empty());
    CHECK(contains(linear_image(i, Matrix::Constant(1, 1, 0.5)), v1(1.0)));
  }

  TEST_CASE("halfspace vertex enumeration matches the pairwise-intersection oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
      const int m = 3 + static_cast<int>(rng.next() % 30);
      Matrix n(m + 3, 2);
      Vector b(m + 3);
      for (int i = 0; i < m; ++i) {
        const double th = rng.uniform(0, 2 * M_PI);
        n.row(i) << std::cos(th), std::sin(th);
        b(i) = rng.uniform(0.2, 2.0);
      }
      // three directions 120 degrees apart keep the set bounded
      for (int k = 0; k < 3; ++k) {
        const double th = rng.uniform(0, 0.1) + 2 * M_PI * k / 3;
        n.row(m + k) << std::cos(th), std::sin(th);
        b(m + k) = 3.0;
      }
      const auto p = Polytope::from_halfspaces(n, b);
      Matrix nn = n;
      for (Eigen::Index i = 0; i < nn.rows(); ++i) nn.row(i).normalize();
      const auto expected = oracle::bruteforce_vertices(nn, b);
      REQUIRE(oracle::same_vertex_set(p.vertices(), expected, 1e-8));
      // reduced: every remaining row is tight at two vertices
      for (Eigen::Index i = 0; i < p.normals().rows(); ++i) {
        int tight = 0;
        for (const auto& v : p.vertices()) tight += std::abs(p.normals().row(i).dot(v) - p.offsets()(i)) < 1e-9;
        CHECK(tight >= 2);
      }
    }
  }

  TEST_CASE("property: Minkowski sum membership agrees with a witness-search oracle") {
    Rng rng(2024);
    const Tolerance tol;
    int checked = 0;
    int agree = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto p = oracle::random_polygon(rng, 1.0);
      const auto q = oracle::random_polygon(rng, 0.5);
      const auto s = minkowski_sum(p, q);
      const Vector x = v2(rng.uniform(-1.6, 1.6), rng.uniform(-1.6, 1.6));
      if (std::abs(oracle::boundary_margin(s, x)) <= 10 * tol.geom_eps) continue;
      ++checked;
      agree += contains(s, x, tol) == oracle::minkowski_member_by_search(p, q, x);
    }
    CHECK(checked > 900);
    CHECK(static_cast<double>(agree) / checked >= 0.999);
  }

  TEST_CASE("property: erosion then dilation stays inside") {
    Rng rng(99);
    int nonempty = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const auto p = oracle::random_polygon(rng, 1.0);
      const auto q = oracle::random_polygon(rng, 0.2);
      const auto e = pontryagin_diff(p, q);
      nonempty += !e.is_empty();
      CHECK(is_subset(minkowski_sum(e, q), p));
    }
    CHECK(nonempty > 100);
  }

  TEST_CASE("property: support is additive over Minkowski sums") {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
      const auto p = oracle::random_polygon(rng, 1.0);
      const auto q = oracle::random_polygon(rng, 0.7);
      const double th = rng.uniform(0, 2 * M_PI);
      const Vector a = v2(std::cos(th), std::sin(th));
      CHECK(std::abs(support(minkowski_sum(p, q), a) - support(p, a) - support(q, a)) <= 1e-9);
    }
  }

  TEST_CASE("property: reduce is idempotent") {
    Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
      const auto p = reduce(oracle::random_polygon(rng, 1.0));
      const auto r = reduce(p);
      REQUIRE(r.vertices().size() == p.vertices().size());
      for (std::size_t i = 0; i < r.vertices().size(); ++i) CHECK((r.vertices()[i] - p.vertices()[i]).norm() < 1e-12);
    }
  }

  TEST_CASE("property: scaling is monotone") {
    Rng rng(23);
    for (int trial = 0; trial < 300; ++trial) {
      // random polygon around the origin
      auto p = oracle::random_polygon(rng, 1.0);
      if (!contains(p, v2(0, 0))) continue;
      const double a1 = rng.uniform(0.1, 3.0);
      const double a2 = a1 + rng.uniform(1e-3, 3.0);
      CHECK(is_subset(scale(p, a1), scale(p, a2)));
    }
  }

  TEST_CASE("serialization round trip is bit exact") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
      const auto p = reduce(oracle::random_polygon(rng, 5.0));
      std::ostringstream os;
      write_polytope(os, p);
      std::istringstream is(os.str());
      std::string header;
      std::getline(is, header);
      CHECK(header == "polytope v1");
      std::vector<std::vector<double>> rows;
      double a, b, c;
      while (is >> a >> b >> c) rows.push_back({a, b, c});
      const auto back = parse_polytope_rows(rows, 2);
      CHECK(back.normals() == p.normals());
      CHECK(back.offsets() == p.offsets());
      REQUIRE(back.vertices().size() == p.vertices().size());
      for (std::size_t i = 0; i < p.vertices().size(); ++i) CHECK(back.vertices()[i] == p.vertices()[i]);
    }
  }
}
