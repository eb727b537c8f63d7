#include "smtpcps/dynamics.hpp"

#include "smtpcps/errors.hpp"

#include <cmath>
#include <string>

namespace smtpcps {

void LinearModel::validate() const {
  if (A.rows() != A.cols() || A.rows() == 0) throw ContractViolation("model: A must be square and non-empty");
  if (B.size() != A.rows()) throw ContractViolation("model: B must have one entry per state");
  if (!A.allFinite() || !B.allFinite()) throw ContractViolation("model: A and B must be finite");
  if (!(Ts > 0.0) || !std::isfinite(Ts)) throw ContractViolation("model: sampling period must be positive");
}

void UncertainModel::validate(const Tolerance& tol) const {
  model.validate();
  if (disturbance.dim() != model.state_dim()) {
    throw ContractViolation("model: disturbance dimension differs from the state dimension");
  }
  if (!contains(disturbance, Vector::Zero(model.state_dim()), tol)) {
    throw ContractViolation("model: disturbance set must contain the origin");
  }
}

Vector nominal_next(const UncertainModel& m, const Vector& x, double u) {
  if (x.size() != m.model.state_dim()) throw ContractViolation("nominal_next: state dimension mismatch");
  return m.model.A * x + m.model.B * u;
}

Polytope reach(const UncertainModel& m, const Vector& x, double u) {
  return translate(m.disturbance, nominal_next(m, x, u));
}

bool reach_contains(const UncertainModel& m, const Vector& x, double u, const Vector& x_next,
                    const Tolerance& tol) {
  return contains(m.disturbance, x_next - nominal_next(m, x, u), tol);
}

bool in_diff(const Vector& x_next, const Vector& x, double u0, double u1, const UncertainModel& mc,
             const UncertainModel& me, const Tolerance& tol) {
  const bool in_both_e = reach_contains(me, x, u0, x_next, tol) && reach_contains(me, x, u1, x_next, tol);
  if (!in_both_e) return false;
  return !(reach_contains(mc, x, u0, x_next, tol) && reach_contains(mc, x, u1, x_next, tol));
}

std::optional<std::uint8_t> exclusive_reach(const Vector& x_next, const Vector& x, double u0, double u1,
                                            const UncertainModel& mc, const Tolerance& tol) {
  const bool in0 = reach_contains(mc, x, u0, x_next, tol);
  const bool in1 = reach_contains(mc, x, u1, x_next, tol);
  if (in0 == in1) return std::nullopt;
  return static_cast<std::uint8_t>(in0 ? 0 : 1);
}

TrueSystem::TrueSystem(LinearModel model, Polytope disturbance, std::uint64_t seed)
    : model_(std::move(model)), disturbance_(std::move(disturbance)), rng_(seed) {
  model_.validate();
  if (disturbance_.is_empty() || !disturbance_.is_axis_box()) {
    throw UnsupportedError("true disturbance sampling supports axis-aligned boxes only");
  }
  if (disturbance_.dim() != model_.state_dim()) {
    throw ContractViolation("true disturbance dimension differs from the state dimension");
  }
  lo_ = disturbance_.lower_bounds();
  hi_ = disturbance_.upper_bounds();
}

Vector TrueSystem::sample_disturbance() {
  Vector d(lo_.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = rng_.uniform(lo_(i), hi_(i));
  return d;
}

TrueSystem::Step TrueSystem::step(const Vector& x, double u) {
  if (x.size() != model_.state_dim()) throw ContractViolation("step: state dimension mismatch");
  Vector d = sample_disturbance();
  Vector next = model_.A * x + model_.B * u + d;
  return {std::move(next), std::move(d)};
}

}  // namespace smtpcps
