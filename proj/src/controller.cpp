#include "smtpcps/controller.hpp"

#include "smtpcps/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace smtpcps {

namespace {

Matrix closed_loop(const LinearModel& m, const TerminalGain& g) { return m.A + m.B * g.K; }

Matrix column(const Vector& v) {
  Matrix c(v.size(), 1);
  c.col(0) = v;
  return c;
}

// Vertices of the outer sets sit at |x| ~ 1e5, where rounding alone exceeds an absolute geom_eps.
Tolerance relative_to(const Polytope& p, const Tolerance& tol) {
  double mag = 1.0;
  for (const auto& v : p.vertices()) mag = std::max(mag, v.lpNorm<Eigen::Infinity>());
  return {tol.geom_eps * mag};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(CostId c) { return c == CostId::MinDistance ? "MinDistance" : "MinEffort"; }

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw ContractViolation("spectral_radius: matrix is not square");
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

MrpiResult mrpi_details(const Matrix& a_k, const Polytope& disturbance, double alpha_max, int max_iter,
                        const Tolerance& tol) {
  const int n = disturbance.dim();
  if (a_k.rows() != n || a_k.cols() != n) throw ContractViolation("mrpi: A_K does not match the disturbance dimension");
  if (!(alpha_max > 0.0 && alpha_max < 1.0)) throw ContractViolation("mrpi: alpha_max must lie in (0, 1)");
  if (disturbance.is_empty()) throw ContractViolation("mrpi: empty disturbance set");
  if (disturbance.offsets().minCoeff() <= 0.0) {
    throw ContractViolation("mrpi: the origin must be interior to the disturbance set");
  }
  if (spectral_radius(a_k) >= 1.0) throw ContractViolation("mrpi: A_K is not Schur stable");

  const auto& f = disturbance.normals();
  const auto& g = disturbance.offsets();
  Matrix power = a_k;
  int s = 1;
  double alpha = 0.0;
  for (;; ++s) {
    if (s > max_iter) {
      throw NonContractiveError("mrpi: contraction alpha_max=" + fmt(alpha_max) + " not reached within " +
                                std::to_string(max_iter) + " iterations");
    }
    alpha = 0.0;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      alpha = std::max(alpha, support(disturbance, power.transpose() * f.row(i).transpose()) / g(i));
    }
    if (alpha <= alpha_max) break;
    power = a_k * power;
  }

  Polytope sum = Polytope::singleton(Vector::Zero(n));
  Matrix term = Matrix::Identity(n, n);
  for (int i = 0; i < s; ++i) {
    sum = minkowski_sum(sum, linear_image(disturbance, term));
    term = a_k * term;
  }
  Polytope result = alpha > 0.0 ? scale(sum, 1.0 / (1.0 - alpha)) : sum;

  if (!is_subset(minkowski_sum(linear_image(result, a_k), disturbance), result, tol)) {
    throw InvariantFailure("mrpi: invariance certificate failed; request a smaller alpha_max (currently " +
                           fmt(alpha_max) + ")");
  }
  return {std::move(result), s, alpha};
}

ControllableStep one_step_controllable(const Polytope& target, const UncertainModel& mc, const Polytope& inputs) {
  if (target.is_empty()) throw ContractViolation("one_step_controllable: empty target set");
  if (inputs.dim() != 1) throw ContractViolation("one_step_controllable: input set must be a 1-D interval");
  Polytope eroded = pontryagin_diff(target, mc.disturbance);
  if (eroded.is_empty() || eroded.measure() <= 0.0) {
    throw ErosionEmptyError("one_step_controllable: target eroded by D_c has no interior");
  }
  const Polytope pushed = minkowski_sum(eroded, linear_image(inputs, column(-mc.model.B)));
  return {linear_preimage(pushed, mc.model.A), std::move(eroded)};
}

ControllableFamily build_family(const UncertainModel& mc, const TerminalGain& gain, double u_max, int horizon,
                                double alpha_max, const Tolerance& tol) {
  const auto started = std::chrono::steady_clock::now();
  mc.validate(tol);
  if (horizon < 1) throw ContractViolation("build_family: N must be at least 1");
  if (!(u_max > 0.0)) throw ContractViolation("build_family: u_max must be positive");
  if (gain.K.size() != mc.model.state_dim()) throw ContractViolation("build_family: K has the wrong length");

  ControllableFamily fam;
  fam.model = mc.model;
  fam.disturbance = mc.disturbance;
  fam.gain = gain;
  fam.u_max = u_max;
  fam.alpha_max = alpha_max;

  const Matrix a_k = closed_loop(mc.model, gain);
  if (spectral_radius(a_k) >= 1.0) throw InvariantFailure("build_family: A + B K is not Schur stable");

  // reduce() makes the vertex cache a function of the stored rows, so a cache reload is bit exact
  fam.sets.push_back(reduce(mrpi(a_k, mc.disturbance, alpha_max, 200, tol)));
  const Polytope inputs = Polytope::interval(-u_max, u_max);
  for (int i = 1; i <= horizon; ++i) {
    auto step = one_step_controllable(fam.sets.back(), mc, inputs);
    fam.eroded.push_back(std::move(step.eroded));
    fam.sets.push_back(std::move(step.set));
  }

  for (const auto& check : verify_family(fam, tol)) {
    if (!check.passed) throw InvariantFailure("build_family: " + check.name + " failed: " + check.detail);
  }
  fam.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return fam;
}

std::vector<CheckResult> verify_family(const ControllableFamily& fam, const Tolerance& tol) {
  std::vector<CheckResult> out;
  if (fam.sets.empty() || fam.eroded.size() + 1 != fam.sets.size()) {
    out.push_back({"structure", false, "expected N+1 sets and N eroded sets"});
    return out;
  }
  const Matrix a_k = closed_loop(fam.model, fam.gain);
  const double rho = spectral_radius(a_k);
  out.push_back({"gain is Schur", rho < 1.0, "spectral radius " + fmt(rho)});

  const Polytope& t0 = fam.sets.front();
  const bool invariant = is_subset(minkowski_sum(linear_image(t0, a_k), fam.disturbance), t0, tol);
  out.push_back({"terminal invariance", invariant, "(A+BK) T_0 + D_c subset T_0"});

  double worst_u = 0.0;
  for (const auto& v : t0.vertices()) worst_u = std::max(worst_u, std::abs(fam.gain.apply(v)));
  out.push_back({"input admissibility", worst_u <= fam.u_max + tol.geom_eps,
                 "max |K v| on T_0 = " + fmt(worst_u) + ", u_max = " + fmt(fam.u_max)});

  std::size_t bad_nest = 0;
  for (std::size_t i = 1; i < fam.sets.size(); ++i) {
    if (!is_subset(fam.sets[i - 1], fam.sets[i], relative_to(fam.sets[i], tol))) {
      if (bad_nest == 0) bad_nest = i;
    }
  }
  out.push_back({"nesting", bad_nest == 0,
                 bad_nest == 0 ? "T_{i-1} subset T_i for all i"
                               : "T_" + std::to_string(bad_nest - 1) + " not inside T_" + std::to_string(bad_nest)});

  std::size_t bad_erosion = 0;
  bool erosion_ok = true;
  for (std::size_t i = 0; i < fam.eroded.size() && erosion_ok; ++i) {
    const Polytope expected = pontryagin_diff(fam.sets[i], fam.disturbance);
    const Tolerance rel = relative_to(fam.sets[i], tol);
    erosion_ok = is_subset(expected, fam.eroded[i], rel) && is_subset(fam.eroded[i], expected, rel);
    if (!erosion_ok) bad_erosion = i;
  }
  out.push_back({"eroded sets", erosion_ok,
                 erosion_ok ? "T~_i = T_i - D_c for all i" : "mismatch at T~_" + std::to_string(bad_erosion)});
  return out;
}

std::size_t set_index(const Vector& x, const ControllableFamily& fam, const Tolerance& tol) {
  if (fam.sets.empty()) throw ContractViolation("set_index: empty family");
  if (!contains(fam.sets.back(), x, tol)) throw InfeasibleError("set_index: state outside T_N");
  // nesting makes membership monotone in i
  std::size_t lo = 0;
  std::size_t hi = fam.sets.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (contains(fam.sets[mid], x, tol)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
#ifndef NDEBUG
  std::size_t scan = 0;
  while (!contains(fam.sets[scan], x, tol)) ++scan;
  if (scan != lo) throw InvariantFailure("set_index: binary search disagrees with a linear scan");
#endif
  return lo;
}

InputInterval feasible_inputs(const Vector& x, std::size_t index, const ControllableFamily& fam) {
  if (index == 0 || index > fam.eroded.size()) throw ContractViolation("feasible_inputs: index out of range");
  const Polytope& target = fam.eroded[index - 1];
  const Vector coeff = target.normals() * fam.model.B;
  const Vector rhs = target.offsets() - target.normals() * (fam.model.A * x);
  double lo = -fam.u_max;
  double hi = fam.u_max;
  for (Eigen::Index j = 0; j < coeff.size(); ++j) {
    const double c = coeff(j);
    if (std::abs(c) < 1e-14) {
      if (rhs(j) < -1e-9) return {1.0, -1.0};
      continue;
    }
    if (c > 0) {
      hi = std::min(hi, rhs(j) / c);
    } else {
      lo = std::max(lo, rhs(j) / c);
    }
  }
  return {lo, hi};
}

double cost_value(CostId cost, const LinearModel& model, const Vector& x, double u) {
  if (cost == CostId::MinEffort) return u * u;
  return (model.A * x + model.B * u).squaredNorm();
}

double solve_control(const Vector& x, const ControllableFamily& fam, CostId cost, const Tolerance& tol) {
  const std::size_t index = set_index(x, fam, tol);
  if (index == 0) return fam.gain.apply(x);

  auto [lo, hi] = feasible_inputs(x, index, fam);
  if (lo > hi) {
    // x may sit in T_i only by the membership slack; accept a hair-thin overlap
    if (lo - hi > 1e-7) {
      throw InvariantFailure("solve_control: empty feasible input interval at index " + std::to_string(index));
    }
    const double mid = 0.5 * (lo + hi);
    lo = hi = mid;
  }
  double unconstrained = 0.0;
  if (cost == CostId::MinDistance) {
    const Vector ax = fam.model.A * x;
    unconstrained = -fam.model.B.dot(ax) / fam.model.B.squaredNorm();
  }
  return std::clamp(unconstrained, lo, hi);
}

double phi(const Vector& x, std::uint8_t bit, const ControllableFamily& fam, const CostAssignment& costs,
           const Tolerance& tol) {
  return solve_control(x, fam, costs.for_bit(bit), tol);
}

}  // namespace smtpcps
