#pragma once

#include "smtpcps/geometry.hpp"
#include "smtpcps/random.hpp"

#include <cstdint>
#include <optional>

namespace smtpcps {

/// x(k+1) = A x(k) + B u(k), scalar input, sampling period Ts seconds.
struct LinearModel {
  Matrix A;
  Vector B;
  double Ts = 0.1;

  int state_dim() const { return static_cast<int>(A.rows()); }
  void validate() const;
};

/// A nominal model plus the additive disturbance set it assumes (controller or eavesdropper view).
struct UncertainModel {
  LinearModel model;
  Polytope disturbance;

  /// Checks the model and that the disturbance set contains the origin.
  void validate(const Tolerance& tol = {}) const;
};

/// A x + B u.
Vector nominal_next(const UncertainModel& m, const Vector& x, double u);

/// One-step reachable set: nominal_next(m, x, u) translated disturbance set.
Polytope reach(const UncertainModel& m, const Vector& x, double u);

/// contains(reach(m, x, u), x_next) without building the translated set.
bool reach_contains(const UncertainModel& m, const Vector& x, double u, const Vector& x_next,
                    const Tolerance& tol = {});

/// Membership of x_next in the set difference of the two-input reach-set intersections,
/// evaluated with four membership tests: in both eavesdropper sets and not in both
/// controller sets.
bool in_diff(const Vector& x_next, const Vector& x, double u0, double u1, const UncertainModel& mc,
             const UncertainModel& me, const Tolerance& tol = {});

/// 0 or 1 when x_next lies in exactly one of the two controller reach sets, otherwise nullopt.
std::optional<std::uint8_t> exclusive_reach(const Vector& x_next, const Vector& x, double u0, double u1,
                                            const UncertainModel& mc, const Tolerance& tol = {});

/// The simulated plant: true dynamics with a uniformly distributed box disturbance.
class TrueSystem {
 public:
  struct Step {
    Vector x_next;
    Vector d;
  };

  /// Throws UnsupportedError when the disturbance set is not an axis-aligned box.
  TrueSystem(LinearModel model, Polytope disturbance, std::uint64_t seed);

  const LinearModel& model() const { return model_; }
  const Polytope& disturbance() const { return disturbance_; }

  /// Independent uniform draw per component.
  Vector sample_disturbance();

  Step step(const Vector& x, double u);

 private:
  LinearModel model_;
  Polytope disturbance_;
  Vector lo_;
  Vector hi_;
  Rng rng_;
};

}  // namespace smtpcps
