#include "smtpcps/geometry.hpp"

#include "smtpcps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

namespace smtpcps {

namespace {

constexpr double kZeroRow = 1e-14;
constexpr double kParallel = 1e-12;

void require_same_dim(int a, int b, const char* op) {
  if (a != b) {
    throw ContractViolation(std::string(op) + ": dimension mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
  }
}

void require_supported_dim(int dim) {
  if (dim != 1 && dim != 2) {
    throw UnsupportedError("polytope operations are implemented for dimensions 1 and 2 only, got " +
                           std::to_string(dim));
  }
}

double magnitude(const Vector& b) {
  return std::max(1.0, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
}

double magnitude(const std::vector<Vector>& pts) {
  double m = 1.0;
  for (const auto& p : pts) m = std::max(m, p.cwiseAbs().maxCoeff());
  return m;
}

// Oriented 2-D line n.x <= b with unit n.
struct Line {
  Eigen::Vector2d n;
  double b;
  double angle;

  bool excludes(const Eigen::Vector2d& p, double tol) const { return n.dot(p) > b + tol; }
};

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

Eigen::Vector2d intersect(const Line& l1, const Line& l2) {
  const double det = cross(l1.n, l2.n);
  return {(l1.b * l2.n.y() - l2.b * l1.n.y()) / det, (l1.n.x() * l2.b - l2.n.x() * l1.b) / det};
}

double shoelace(const std::vector<Vector>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    a += p(0) * q(1) - q(0) * p(1);
  }
  return 0.5 * a;
}

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

Vector vec1(double x) {
  Vector v(1);
  v << x;
  return v;
}

// Rows pointing along every angular half-plane; a gap of pi or more leaves a recession direction.
bool bounded_2d(std::vector<double> angles) {
  if (angles.size() < 3) return false;
  std::sort(angles.begin(), angles.end());
  double gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) gap = std::max(gap, angles[i] - angles[i - 1]);
  return gap < std::numbers::pi - kParallel;
}

Polytope interval_from_bounds(double lo, double hi) {
  Matrix n(2, 1);
  n << -1.0, 1.0;
  Vector b(2);
  b << -lo, hi;
  return Polytope::from_halfspaces(n, b);
}

}  // namespace

Polytope::Polytope(int dim, Matrix normals, Vector offsets, std::vector<Vector> vertices)
    : dim_(dim),
      empty_(vertices.empty()),
      normals_(std::move(normals)),
      offsets_(std::move(offsets)),
      vertices_(std::move(vertices)) {}

Polytope Polytope::empty(int dim) {
  Polytope p;
  p.dim_ = dim;
  p.empty_ = true;
  p.normals_ = Matrix(0, dim);
  p.offsets_ = Vector(0);
  return p;
}

Polytope Polytope::from_halfspaces(const Matrix& normals, const Vector& offsets) {
  if (normals.rows() != offsets.size()) {
    throw ContractViolation("from_halfspaces: row count of normals and offsets differ");
  }
  const int dim = static_cast<int>(normals.cols());
  require_supported_dim(dim);
  if (!normals.allFinite() || !offsets.allFinite()) {
    throw ContractViolation("from_halfspaces: non-finite halfspace data");
  }

  Matrix n(normals.rows(), dim);
  Vector b(offsets.size());
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    const double len = normals.row(i).norm();
    if (len < kZeroRow) {
      if (offsets(i) < -kZeroRow) return empty(dim);
      continue;  // 0 <= b: no constraint
    }
    // rows already unit to within a few ulps are kept bit-for-bit so that reduce is idempotent
    const bool unit = std::abs(len - 1.0) <= 4 * std::numeric_limits<double>::epsilon();
    n.row(kept) = unit ? Eigen::RowVectorXd(normals.row(i)) : Eigen::RowVectorXd(normals.row(i) / len);
    b(kept) = unit ? offsets(i) : offsets(i) / len;
    ++kept;
  }
  n.conservativeResize(kept, dim);
  b.conservativeResize(kept);

  if (dim == 1) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < kept; ++i) {
      if (n(i, 0) > 0) {
        hi = std::min(hi, b(i));
      } else {
        lo = std::max(lo, -b(i));
      }
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw UnboundedSetError("interval is unbounded");
    const double tol = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (lo > hi + tol) return empty(1);
    if (lo > hi) lo = hi = 0.5 * (lo + hi);
    Matrix rn(2, 1);
    rn << -1.0, 1.0;
    Vector rb(2);
    rb << -lo, hi;
    std::vector<Vector> verts{vec1(lo)};
    if (hi > lo) verts.push_back(vec1(hi));
    return Polytope(1, std::move(rn), std::move(rb), std::move(verts));
  }
  return halfspaces_2d(n, b);
}

Polytope Polytope::halfspaces_2d(const Matrix& normals, const Vector& offsets) {
  std::vector<Line> lines;
  lines.reserve(static_cast<std::size_t>(normals.rows()));
  std::vector<double> angles;
  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    // +0.0 folds negative zeros so that atan2 does not split one direction across -pi / pi.
    Eigen::Vector2d n(normals(i, 0) + 0.0, normals(i, 1) + 0.0);
    const double a = std::atan2(n.y(), n.x());
    lines.push_back({n, offsets(i), a});
    angles.push_back(a);
  }
  if (!bounded_2d(angles)) throw UnboundedSetError("halfspace intersection is unbounded");

  std::sort(lines.begin(), lines.end(), [](const Line& l, const Line& r) {
    return l.angle < r.angle || (l.angle == r.angle && l.b < r.b);
  });
  // Keep the tightest of each direction, including the wrap-around pair at -pi / pi.
  std::vector<Line> unique;
  for (const auto& l : lines) {
    if (!unique.empty() && std::abs(cross(unique.back().n, l.n)) < kParallel &&
        unique.back().n.dot(l.n) > 0) {
      continue;
    }
    unique.push_back(l);
  }
  if (unique.size() > 1 && std::abs(cross(unique.back().n, unique.front().n)) < kParallel &&
      unique.back().n.dot(unique.front().n) > 0) {
    if (unique.back().b < unique.front().b) unique.front() = unique.back();
    unique.pop_back();
  }

  const double mag = magnitude(offsets);
  const double out_tol = 1e-12 * mag;

  std::deque<Line> dq;
  bool degenerate = false;
  for (const auto& h : unique) {
    while (dq.size() > 1 && h.excludes(intersect(dq[dq.size() - 1], dq[dq.size() - 2]), out_tol)) {
      dq.pop_back();
    }
    while (dq.size() > 1 && h.excludes(intersect(dq[0], dq[1]), out_tol)) dq.pop_front();
    if (!dq.empty() && std::abs(cross(h.n, dq.back().n)) < kParallel) {
      if (h.n.dot(dq.back().n) < 0) {
        degenerate = true;  // opposite neighbours: empty, or a sliver with no interior
        break;
      }
      if (h.b < dq.back().b) {
        dq.pop_back();
      } else {
        continue;
      }
    }
    dq.push_back(h);
  }
  if (!degenerate) {
    while (dq.size() > 2 && dq[0].excludes(intersect(dq[dq.size() - 1], dq[dq.size() - 2]), out_tol)) {
      dq.pop_back();
    }
    while (dq.size() > 2 && dq[dq.size() - 1].excludes(intersect(dq[0], dq[1]), out_tol)) {
      dq.pop_front();
    }
    degenerate = dq.size() < 3;
  }
  if (degenerate) return halfspaces_2d_bruteforce(normals, offsets);

  // vertex i sits between line i and line i + 1; drop lines whose edge collapsed to a point
  std::vector<Line> ring(dq.begin(), dq.end());
  const double merge_tol = 1e-10 * mag;
  bool changed = true;
  std::vector<Eigen::Vector2d> pts;
  while (changed && ring.size() >= 3) {
    changed = false;
    pts.clear();
    for (std::size_t i = 0; i < ring.size(); ++i) pts.push_back(intersect(ring[i], ring[(i + 1) % ring.size()]));
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const std::size_t j = (i + 1) % ring.size();
      if ((pts[i] - pts[j]).norm() < merge_tol) {
        ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
        break;
      }
    }
  }
  if (ring.size() < 3) return halfspaces_2d_bruteforce(normals, offsets);

  std::vector<Vector> verts;
  verts.reserve(ring.size());
  for (const auto& p : pts) verts.push_back(vec2(p.x(), p.y()));
  if (!(shoelace(verts) > 1e-14 * mag * mag)) return halfspaces_2d_bruteforce(normals, offsets);

  Matrix n(static_cast<Eigen::Index>(ring.size()), 2);
  Vector b(static_cast<Eigen::Index>(ring.size()));
  for (std::size_t i = 0; i < ring.size(); ++i) {
    n(static_cast<Eigen::Index>(i), 0) = ring[i].n.x();
    n(static_cast<Eigen::Index>(i), 1) = ring[i].n.y();
    b(static_cast<Eigen::Index>(i)) = ring[i].b;
  }
  return Polytope(2, std::move(n), std::move(b), std::move(verts));
}

// O(m^3) fallback for sets without interior: every feasible pairwise line intersection, then a hull.
Polytope Polytope::halfspaces_2d_bruteforce(const Matrix& normals, const Vector& offsets) {
  const double tol = 1e-10 * magnitude(offsets);
  std::vector<Vector> candidates;
  const Eigen::Index m = normals.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      Line a{{normals(i, 0), normals(i, 1)}, offsets(i), 0.0};
      Line c{{normals(j, 0), normals(j, 1)}, offsets(j), 0.0};
      if (std::abs(cross(a.n, c.n)) < kParallel) continue;
      const Eigen::Vector2d p = intersect(a, c);
      const Vector pv = vec2(p.x(), p.y());
      if (((normals * pv) - offsets).maxCoeff() <= tol) candidates.push_back(pv);
    }
  }
  if (candidates.empty()) return empty(2);
  return hull_2d(candidates);
}

Polytope Polytope::hull_2d(const std::vector<Vector>& points) {
  const double mag = magnitude(points);
  const double same_tol = 1e-12 * mag;
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.emplace_back(p(0), p(1));
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [&](const auto& a, const auto& b) { return (a - b).norm() <= same_tol; }),
            pts.end());

  // Andrew's monotone chain; near-collinear points are dropped.
  const double turn_tol = 1e-14 * mag * mag;
  auto turn = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return cross(a - o, b - o);
  };
  std::vector<Eigen::Vector2d> hull;
  if (pts.size() >= 3) {
    hull.resize(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
      while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= turn_tol) --k;
      hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && turn(hull[k - 2], hull[k - 1], pts[i]) <= turn_tol) --k;
      hull[k++] = pts[i];
    }
    hull.resize(k - 1);
  } else {
    hull = pts;
  }
  if (hull.size() == 2 && (hull[0] - hull[1]).norm() <= same_tol) hull.pop_back();

  if (hull.empty()) return empty(2);
  if (hull.size() == 1) {
    const auto& p = hull[0];
    Matrix n(4, 2);
    n << 0, -1, 1, 0, 0, 1, -1, 0;
    Vector b(4);
    b << -p.y(), p.x(), p.y(), -p.x();
    return Polytope(2, std::move(n), std::move(b), {vec2(p.x(), p.y())});
  }
  if (hull.size() == 2) {
    const Eigen::Vector2d a = hull[0];
    const Eigen::Vector2d c = hull[1];
    const Eigen::Vector2d d = (c - a).normalized();
    const Eigen::Vector2d perp(d.y(), -d.x());
    Matrix n(4, 2);
    n << perp.x(), perp.y(), d.x(), d.y(), -perp.x(), -perp.y(), -d.x(), -d.y();
    Vector b(4);
    b << perp.dot(a), d.dot(c), -perp.dot(a), -d.dot(a);
    return Polytope(2, std::move(n), std::move(b), {vec2(a.x(), a.y()), vec2(c.x(), c.y())});
  }

  const auto count = static_cast<Eigen::Index>(hull.size());
  Matrix n(count, 2);
  Vector b(count);
  std::vector<Vector> verts;
  verts.reserve(hull.size());
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& p = hull[i];
    const auto& q = hull[(i + 1) % hull.size()];
    const Eigen::Vector2d e = q - p;
    const Eigen::Vector2d out = Eigen::Vector2d(e.y(), -e.x()).normalized();
    n(static_cast<Eigen::Index>(i), 0) = out.x();
    n(static_cast<Eigen::Index>(i), 1) = out.y();
    b(static_cast<Eigen::Index>(i)) = std::max(out.dot(p), out.dot(q));
    verts.push_back(vec2(p.x(), p.y()));
  }
  return Polytope(2, std::move(n), std::move(b), std::move(verts));
}

Polytope Polytope::from_vertices(const std::vector<Vector>& points) {
  if (points.empty()) throw ContractViolation("from_vertices: no points (use Polytope::empty)");
  const int dim = static_cast<int>(points.front().size());
  require_supported_dim(dim);
  for (const auto& p : points) {
    require_same_dim(static_cast<int>(p.size()), dim, "from_vertices");
    if (!p.allFinite()) throw ContractViolation("from_vertices: non-finite point");
  }
  if (dim == 1) {
    double lo = points.front()(0);
    double hi = lo;
    for (const auto& p : points) {
      lo = std::min(lo, p(0));
      hi = std::max(hi, p(0));
    }
    return interval_from_bounds(lo, hi);
  }
  return hull_2d(points);
}

Polytope Polytope::box(const Vector& lo, const Vector& hi) {
  require_same_dim(static_cast<int>(lo.size()), static_cast<int>(hi.size()), "box");
  const auto dim = lo.size();
  if ((hi - lo).minCoeff() < 0) throw ContractViolation("box: upper bound below lower bound");
  Matrix n = Matrix::Zero(2 * dim, dim);
  Vector b(2 * dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    n(2 * k, k) = 1.0;
    b(2 * k) = hi(k);
    n(2 * k + 1, k) = -1.0;
    b(2 * k + 1) = -lo(k);
  }
  return from_halfspaces(n, b);
}

Polytope Polytope::symmetric_box(const Vector& half_widths) { return box(-half_widths, half_widths); }

Polytope Polytope::interval(double lo, double hi) { return box(vec1(lo), vec1(hi)); }

Polytope Polytope::singleton(const Vector& p) { return from_vertices({p}); }

double Polytope::measure() const {
  if (empty_) return 0.0;
  if (dim_ == 1) return vertices_.size() == 2 ? std::abs(vertices_[1](0) - vertices_[0](0)) : 0.0;
  return vertices_.size() >= 3 ? std::abs(shoelace(vertices_)) : 0.0;
}

bool Polytope::is_axis_box() const {
  for (Eigen::Index i = 0; i < normals_.rows(); ++i) {
    int axis_hits = 0;
    for (Eigen::Index k = 0; k < normals_.cols(); ++k) {
      const double a = std::abs(normals_(i, k));
      if (std::abs(a - 1.0) < 1e-12) {
        ++axis_hits;
      } else if (a > 1e-12) {
        return false;
      }
    }
    if (axis_hits != 1) return false;
  }
  return true;
}

Vector Polytope::lower_bounds() const {
  if (empty_) throw EmptySetError("lower_bounds of the empty set");
  Vector lo = vertices_.front();
  for (const auto& v : vertices_) lo = lo.cwiseMin(v);
  return lo;
}

Vector Polytope::upper_bounds() const {
  if (empty_) throw EmptySetError("upper_bounds of the empty set");
  Vector hi = vertices_.front();
  for (const auto& v : vertices_) hi = hi.cwiseMax(v);
  return hi;
}

bool contains(const Polytope& p, const Vector& x, const Tolerance& tol) {
  require_same_dim(static_cast<int>(x.size()), p.dim(), "contains");
  if (p.is_empty()) return false;
  return ((p.normals() * x) - p.offsets()).maxCoeff() <= tol.geom_eps;
}

double support(const Polytope& p, const Vector& a) {
  require_same_dim(static_cast<int>(a.size()), p.dim(), "support");
  if (p.is_empty()) throw EmptySetError("support of the empty set");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : p.vertices()) best = std::max(best, a.dot(v));
  return best;
}

Polytope minkowski_sum(const Polytope& p, const Polytope& q) {
  require_same_dim(p.dim(), q.dim(), "minkowski_sum");
  if (p.is_empty() || q.is_empty()) return Polytope::empty(p.dim());
  std::vector<Vector> sums;
  sums.reserve(p.vertices().size() * q.vertices().size());
  for (const auto& a : p.vertices()) {
    for (const auto& b : q.vertices()) sums.push_back(a + b);
  }
  return Polytope::from_vertices(sums);
}

Polytope pontryagin_diff(const Polytope& p, const Polytope& q) {
  require_same_dim(p.dim(), q.dim(), "pontryagin_diff");
  if (q.is_empty()) throw ContractViolation("pontryagin_diff: subtrahend is empty");
  if (p.is_empty()) return p;
  Vector b = p.offsets();
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) -= support(q, p.normals().row(i).transpose());
  return Polytope::from_halfspaces(p.normals(), b);
}

Polytope linear_preimage(const Polytope& p, const Matrix& m) {
  require_same_dim(static_cast<int>(m.rows()), p.dim(), "linear_preimage");
  if (p.is_empty()) return Polytope::empty(static_cast<int>(m.cols()));
  return Polytope::from_halfspaces(p.normals() * m, p.offsets());
}

Polytope linear_image(const Polytope& p, const Matrix& m) {
  require_same_dim(static_cast<int>(m.cols()), p.dim(), "linear_image");
  if (p.is_empty()) return Polytope::empty(static_cast<int>(m.rows()));
  std::vector<Vector> mapped;
  mapped.reserve(p.vertices().size());
  for (const auto& v : p.vertices()) mapped.push_back(m * v);
  return Polytope::from_vertices(mapped);
}

Polytope translate(const Polytope& p, const Vector& v) {
  require_same_dim(static_cast<int>(v.size()), p.dim(), "translate");
  if (p.is_empty()) return p;
  std::vector<Vector> verts;
  verts.reserve(p.vertices_.size());
  for (const auto& x : p.vertices_) verts.push_back(x + v);
  return Polytope(p.dim_, p.normals_, p.offsets_ + p.normals_ * v, std::move(verts));
}

Polytope scale(const Polytope& p, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ContractViolation("scale: factor must be positive and finite, got " + std::to_string(alpha));
  }
  if (p.is_empty()) return p;
  std::vector<Vector> verts;
  verts.reserve(p.vertices_.size());
  for (const auto& x : p.vertices_) verts.push_back(alpha * x);
  return Polytope(p.dim_, p.normals_, alpha * p.offsets_, std::move(verts));
}

bool is_subset(const Polytope& p, const Polytope& q, const Tolerance& tol) {
  require_same_dim(p.dim(), q.dim(), "is_subset");
  if (p.is_empty()) return true;
  if (q.is_empty()) return false;
  return std::all_of(p.vertices().begin(), p.vertices().end(),
                     [&](const Vector& v) { return contains(q, v, tol); });
}

Polytope reduce(const Polytope& p) {
  if (p.is_empty()) return p;
  return Polytope::from_halfspaces(p.normals(), p.offsets());
}

void write_polytope(std::ostream& os, const Polytope& p) {
  os << "polytope v1\n";
  char buf[64];
  for (Eigen::Index i = 0; i < p.normals().rows(); ++i) {
    for (Eigen::Index k = 0; k < p.normals().cols(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g ", p.normals()(i, k));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", p.offsets()(i));
    os << buf;
  }
}

Polytope parse_polytope_rows(const std::vector<std::vector<double>>& rows, int dim) {
  if (rows.empty()) return Polytope::empty(dim);
  Matrix n(static_cast<Eigen::Index>(rows.size()), dim);
  Vector b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(dim + 1)) {
      throw FormatError("polytope row " + std::to_string(i + 1) + ": expected " + std::to_string(dim + 1) +
                        " numbers, got " + std::to_string(rows[i].size()));
    }
    for (int k = 0; k < dim; ++k) n(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    b(static_cast<Eigen::Index>(i)) = rows[i].back();
  }
  return Polytope::from_halfspaces(n, b);
}

}  // namespace smtpcps
