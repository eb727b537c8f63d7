#pragma once

// Independent reference computations used only by the tests. Nothing in here
// calls into the library's set algorithms beyond plain membership.

#include "smtpcps/geometry.hpp"
#include "smtpcps/random.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using smtpcps::Matrix;
using smtpcps::Polytope;
using smtpcps::Rng;
using smtpcps::Vector;

inline Vector v2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

inline Vector v1(double x) {
  Vector v(1);
  v << x;
  return v;
}

/// Random convex polygon: hull of 3..8 points drawn in a box of the given half width, centred at c.
inline Polytope random_polygon(Rng& rng, double half_width, const Vector& c = v2(0, 0)) {
  for (;;) {
    const int n = 3 + static_cast<int>(rng.next() % 6);
    std::vector<Vector> pts;
    for (int i = 0; i < n; ++i) {
      pts.push_back(c + v2(rng.uniform(-half_width, half_width), rng.uniform(-half_width, half_width)));
    }
    auto p = Polytope::from_vertices(pts);
    if (p.measure() > 0.05 * half_width * half_width) return p;
  }
}

/// Signed distance to the boundary for points inside (negative) and a lower bound outside.
inline double boundary_margin(const Polytope& p, const Vector& x) {
  return ((p.normals() * x) - p.offsets()).maxCoeff();
}

/// Vertex enumeration by checking every pairwise intersection against every row.
inline std::vector<Vector> bruteforce_vertices(const Matrix& n, const Vector& b, double tol = 1e-9) {
  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < n.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < n.rows(); ++j) {
      Eigen::Matrix2d m;
      m << n(i, 0), n(i, 1), n(j, 0), n(j, 1);
      if (std::abs(m.determinant()) < 1e-12) continue;
      Eigen::Vector2d rhs(b(i), b(j));
      Eigen::Vector2d p = m.partialPivLu().solve(rhs);
      Vector pv = v2(p.x(), p.y());
      if (((n * pv) - b).maxCoeff() > tol) continue;
      bool dup = false;
      for (const auto& q : out) dup = dup || (q - pv).norm() < 1e-9;
      if (!dup) out.push_back(pv);
    }
  }
  return out;
}

/// Extreme points of a finite point set by the definition: not a convex combination of two others
/// along any direction. Implemented as support-attainment over many directions.
inline std::vector<Vector> extreme_points(const std::vector<Vector>& pts, double tol = 1e-9) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool extreme = false;
    for (int k = 0; k < 3600 && !extreme; ++k) {
      const double th = 2.0 * M_PI * k / 3600.0;
      Vector a = v2(std::cos(th), std::sin(th));
      double best = -1e300;
      for (const auto& q : pts) best = std::max(best, a.dot(q));
      if (a.dot(pts[i]) >= best - 1e-15) {
        // unique maximiser in this direction?
        int count = 0;
        for (const auto& q : pts) count += (a.dot(q) >= best - 1e-15) && (q - pts[i]).norm() > tol;
        extreme = count == 0;
      }
    }
    bool dup = false;
    for (const auto& q : out) dup = dup || (q - pts[i]).norm() < tol;
    if (extreme && !dup) out.push_back(pts[i]);
  }
  return out;
}

/// Same vertex set up to ordering, within tol.
inline bool same_vertex_set(std::vector<Vector> a, std::vector<Vector> b, double tol) {
  if (a.size() != b.size()) return false;
  for (const auto& p : a) {
    auto it = std::find_if(b.begin(), b.end(), [&](const Vector& q) { return (p - q).norm() <= tol; });
    if (it == b.end()) return false;
    b.erase(it);
  }
  return true;
}

/// x in P (+) Q by search for a witness q in Q with x - q in P. Witnesses are drawn from a dense
/// sampling of Q's boundary plus the points x - p for vertices p of P; two convex polygons that
/// intersect share either a vertex of one inside the other or a boundary crossing.
inline bool minkowski_member_by_search(const Polytope& p, const Polytope& q, const Vector& x,
                                       int samples_per_edge = 4000) {
  const smtpcps::Tolerance tight{1e-12};
  for (const auto& pv : p.vertices()) {
    if (smtpcps::contains(q, x - pv, tight)) return true;
  }
  const auto& qv = q.vertices();
  for (std::size_t i = 0; i < qv.size(); ++i) {
    const Vector& a = qv[i];
    const Vector& b = qv[(i + 1) % qv.size()];
    for (int s = 0; s <= samples_per_edge; ++s) {
      const double t = static_cast<double>(s) / samples_per_edge;
      if (smtpcps::contains(p, x - ((1 - t) * a + t * b), tight)) return true;
    }
  }
  return false;
}

}  // namespace oracle
