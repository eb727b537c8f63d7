#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace smtpcps {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Tolerance {
  /// Slack added to membership and subset tests (state units).
  double geom_eps = 1e-9;
};

/**
 * Bounded convex polytope in dual form.
 *
 * The halfspace form {x : normals * x <= offsets} has unit-length rows and is
 * authoritative for membership, erosion and preimages; the vertex list is
 * authoritative for support, subset and Minkowski sums. Every constructor
 * reduces: no redundant rows, and (in 2-D, full-dimensional case) each row is
 * active on exactly one edge of the counterclockwise vertex cycle.
 *
 * Vertex enumeration and hulls are implemented for dimensions 1 and 2.
 * Lower-dimensional sets (points, segments) are representable; the empty set
 * is a flagged value, not an error.
 */
class Polytope {
 public:
  /// The empty set of the given dimension.
  static Polytope empty(int dim);

  /// {x : normals * x <= offsets}. Rows are renormalized; zero rows are dropped
  /// (or make the set empty when their offset is negative). Throws
  /// UnboundedSetError when the intersection is not bounded.
  static Polytope from_halfspaces(const Matrix& normals, const Vector& offsets);

  /// Convex hull of a finite point set.
  static Polytope from_vertices(const std::vector<Vector>& points);

  static Polytope box(const Vector& lo, const Vector& hi);
  static Polytope symmetric_box(const Vector& half_widths);
  static Polytope interval(double lo, double hi);
  static Polytope singleton(const Vector& p);

  int dim() const { return dim_; }
  bool is_empty() const { return empty_; }
  std::size_t num_halfspaces() const { return static_cast<std::size_t>(offsets_.size()); }

  const Matrix& normals() const { return normals_; }
  const Vector& offsets() const { return offsets_; }
  const std::vector<Vector>& vertices() const { return vertices_; }

  /// Lebesgue measure in the set's ambient dimension (length in 1-D, area in 2-D).
  double measure() const;

  /// True when every row is an (unsigned) coordinate axis direction.
  bool is_axis_box() const;

  /// Component-wise bounds of the vertex set.
  Vector lower_bounds() const;
  Vector upper_bounds() const;

 private:
  Polytope() = default;
  Polytope(int dim, Matrix normals, Vector offsets, std::vector<Vector> vertices);

  static Polytope halfspaces_2d(const Matrix& normals, const Vector& offsets);
  static Polytope halfspaces_2d_bruteforce(const Matrix& normals, const Vector& offsets);
  static Polytope hull_2d(const std::vector<Vector>& points);

  int dim_ = 0;
  bool empty_ = true;
  Matrix normals_;
  Vector offsets_;
  std::vector<Vector> vertices_;

  friend Polytope scale(const Polytope& p, double alpha);
  friend Polytope translate(const Polytope& p, const Vector& v);
};

/// Closed-set membership with geom_eps slack; always false for the empty set.
bool contains(const Polytope& p, const Vector& x, const Tolerance& tol = {});

/// max over x in P of a.x. Throws EmptySetError on the empty set.
double support(const Polytope& p, const Vector& a);

Polytope minkowski_sum(const Polytope& p, const Polytope& q);

/// Erosion P - Q = {x : x + Q subset P}; may come back empty.
Polytope pontryagin_diff(const Polytope& p, const Polytope& q);

/// {x : m * x in P}. Throws UnboundedSetError if the preimage is unbounded.
Polytope linear_preimage(const Polytope& p, const Matrix& m);

/// {m * x : x in P}, via the hull of mapped vertices.
Polytope linear_image(const Polytope& p, const Matrix& m);

Polytope translate(const Polytope& p, const Vector& v);

/// Dilation about the origin. alpha must be positive.
Polytope scale(const Polytope& p, double alpha);

/// Every vertex of P satisfies Q's rows within geom_eps. The empty set is a subset of anything.
bool is_subset(const Polytope& p, const Polytope& q, const Tolerance& tol = {});

/// Rebuilds the dual form from the halfspace rows alone.
Polytope reduce(const Polytope& p);

/// `polytope v1` block: one line per halfspace, normal components then offset, 17 significant digits.
void write_polytope(std::ostream& os, const Polytope& p);

/// Parses the rows that follow a `polytope v1` header line. Each row must carry dim + 1 numbers.
Polytope parse_polytope_rows(const std::vector<std::vector<double>>& rows, int dim);

}  // namespace smtpcps
