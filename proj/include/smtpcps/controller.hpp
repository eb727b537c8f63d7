#pragma once

#include "smtpcps/dynamics.hpp"
#include "smtpcps/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace smtpcps {

/// u = K x on the terminal set.
struct TerminalGain {
  Eigen::RowVectorXd K;

  double apply(const Vector& x) const { return K.dot(x); }
};

/// Cost minimised by the online control law. MinDistance is ||A x + B u||^2, MinEffort is ||u||^2.
enum class CostId { MinDistance, MinEffort };

const char* to_string(CostId c);

/// Which cost each switching bit selects.
struct CostAssignment {
  CostId bit0 = CostId::MinDistance;
  CostId bit1 = CostId::MinEffort;

  CostId for_bit(std::uint8_t bit) const { return bit ? bit1 : bit0; }
};

double spectral_radius(const Matrix& m);

struct MrpiResult {
  Polytope set;
  int steps = 0;       ///< number of Minkowski terms s
  double alpha = 0.0;  ///< contraction reached, A^s D subset alpha D
};

/// Outer approximation of the minimal robust positively invariant set of x+ = A_K x + d, d in D:
/// (1 - alpha)^-1 (D + A_K D + ... + A_K^(s-1) D) for the first s whose contraction is at most
/// alpha_max. The result is checked for invariance before it is returned.
MrpiResult mrpi_details(const Matrix& a_k, const Polytope& disturbance, double alpha_max, int max_iter = 200,
                        const Tolerance& tol = {});

inline Polytope mrpi(const Matrix& a_k, const Polytope& disturbance, double alpha_max, int max_iter = 200,
                     const Tolerance& tol = {}) {
  return mrpi_details(a_k, disturbance, alpha_max, max_iter, tol).set;
}

struct ControllableStep {
  Polytope set;     ///< states robustly steerable into the target in one step
  Polytope eroded;  ///< target eroded by the disturbance set
};

/// {x : exists u in U, A x + B u in target - D_c}, computed as the preimage under A of
/// (target - D_c) + (-B U). Throws ErosionEmptyError when the eroded target has no interior.
ControllableStep one_step_controllable(const Polytope& target, const UncertainModel& mc, const Polytope& inputs);

/// Nested family T_0 subset T_1 subset ... subset T_N with eroded companions and the terminal gain.
struct ControllableFamily {
  LinearModel model;
  Polytope disturbance = Polytope::empty(2);  ///< the controller's D_c
  TerminalGain gain;
  double u_max = 6.0;
  double alpha_max = 0.05;
  std::vector<Polytope> sets;    ///< T_0 .. T_N
  std::vector<Polytope> eroded;  ///< T_i - D_c for i = 0 .. N-1
  double build_seconds = 0.0;

  std::size_t horizon() const { return sets.empty() ? 0 : sets.size() - 1; }
};

ControllableFamily build_family(const UncertainModel& mc, const TerminalGain& gain, double u_max, int horizon,
                                double alpha_max, const Tolerance& tol = {});

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Schur gain, terminal invariance, input admissibility on T_0, nesting, and eroded-set consistency.
std::vector<CheckResult> verify_family(const ControllableFamily& fam, const Tolerance& tol = {});

/// Smallest i with x in T_i. Throws InfeasibleError outside T_N.
std::size_t set_index(const Vector& x, const ControllableFamily& fam, const Tolerance& tol = {});

/// Inputs u in U with A x + B u in the eroded target T_{index-1} - D_c.
struct InputInterval {
  double lo;
  double hi;
};

InputInterval feasible_inputs(const Vector& x, std::size_t index, const ControllableFamily& fam);

double cost_value(CostId cost, const LinearModel& model, const Vector& x, double u);

/// Set-theoretic MPC law: K x on T_0, otherwise the minimiser of the scalar quadratic over the
/// feasible interval (closed form, clamped).
double solve_control(const Vector& x, const ControllableFamily& fam, CostId cost, const Tolerance& tol = {});

/// Switching policy: bit 0 and bit 1 select the two cost indices.
double phi(const Vector& x, std::uint8_t bit, const ControllableFamily& fam, const CostAssignment& costs = {},
           const Tolerance& tol = {});

/// `ctrlfam v1` cache: header, K row, T_0, T~_0, T_1, ..., T~_{N-1}, T_N as polytope blocks, then a
/// checksum line over everything above it.
void write_family(std::ostream& os, const ControllableFamily& fam);

/// Parses a cache written by write_family. The model and D_c are not stored in the file and come
/// from the caller's configuration. Throws FormatError on malformed or tampered input.
ControllableFamily read_family(std::istream& is, const LinearModel& model, const Polytope& disturbance);

}  // namespace smtpcps
