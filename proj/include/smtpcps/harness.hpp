#pragma once

#include "smtpcps/adversary.hpp"
#include "smtpcps/config.hpp"
#include "smtpcps/protocol.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace smtpcps {

/// Guessed D_c = scale * D_e for the reachability attacker; one CSV column each.
inline const std::vector<double>& default_attack_scales() {
  static const std::vector<double> scales{0.25, 0.5, 0.75};
  return scales;
}

struct EpisodeConfig {
  LinearModel model;
  Polytope true_disturbance = Polytope::empty(2);
  UncertainModel controller{LinearModel{}, Polytope::empty(2)};
  UncertainModel eavesdropper{LinearModel{}, Polytope::empty(2)};
  CostAssignment costs;
  Tolerance tol;
  Vector x0;
  std::size_t steps = 50;
  MessageSpec message;
  std::uint64_t seed = 1;
  bool trace = false;
  std::vector<double> attack_scales = default_attack_scales();
};

/// Builds an episode from a run configuration and a disturbance ratio.
EpisodeConfig episode_config(const Config& cfg, double alpha, const Vector& x0, std::uint64_t seed);

/// Correct guesses over aligned message bits.
struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;

  double accuracy() const;  ///< NaN when total is 0
  Tally& operator+=(const Tally& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
};

struct EpisodeResult {
  std::size_t steps = 0;
  std::size_t key_events = 0;
  std::size_t decoded_bits = 0;  ///< bits of the message recovered, capped at its length
  std::size_t bit_errors = 0;
  std::size_t desyncs = 0;
  double rate_bps = 0.0;

  Tally acc_random;
  std::vector<Tally> acc_reach;  ///< one per attack scale
  Tally acc_true_dc;             ///< attacker handed the real D_c; must be perfect

  std::size_t events_exposed_by_de = 0;  ///< genuine events where D_e sets alone reveal the key
  std::size_t conservation_violations = 0;
  std::size_t descent_violations = 0;
  std::size_t wire_bits = 0;
  std::size_t wire_ones = 0;

  bool aborted = false;
  std::string error;
  std::vector<TraceRow> trace;
};

/// Per step: sender_step, receiver_act, plant step, receiver_observe. The attackers run on the
/// recorded wire afterwards. Equal configs give bit-identical results.
EpisodeResult run_episode(const EpisodeConfig& cfg, const ControllableFamily& fam);

/// Along direction d, the point halfway between the boundaries of T_{j-1} and T_j.
Vector shell_state(const ControllableFamily& fam, std::size_t j, const Vector& direction);

/// sim.x0 if given (each checked to lie in T_N), otherwise shell states for sim.x0_shells.
std::vector<Vector> initial_states(const Config& cfg, const ControllableFamily& fam);

struct SweepRow {
  double alpha = 0.0;
  std::size_t alpha_index = 0;
  std::size_t x0_id = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  EpisodeResult result;
};

std::uint64_t episode_seed(std::uint64_t base, std::size_t alpha_index, std::size_t x0_index, std::size_t rep);

/// Runs alphas x x0s x reps [rep_begin, rep_end) on up to `jobs` threads (0 = hardware).
/// Rows come back in (alpha, x0, rep) order whatever the completion order.
std::vector<SweepRow> run_sweep(const Config& cfg, const ControllableFamily& fam, const std::vector<Vector>& x0s,
                                unsigned jobs, std::size_t rep_begin, std::size_t rep_end);

inline std::vector<SweepRow> run_sweep(const Config& cfg, const ControllableFamily& fam,
                                       const std::vector<Vector>& x0s, unsigned jobs = 0) {
  return run_sweep(cfg, fam, x0s, jobs, 0, static_cast<std::size_t>(cfg.reps));
}

struct AlphaSummary {
  double alpha = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation, 0 for a single row
  std::size_t n = 0;
};

struct Summary {
  std::vector<AlphaSummary> per_alpha;
  double spearman = 0.0;
  bool spearman_degenerate = false;  ///< fewer than two levels or a constant series
};

/// Average ranks for ties. A constant series yields 0 and sets *degenerate.
double spearman(const std::vector<double>& a, const std::vector<double>& b, bool* degenerate = nullptr);

Summary summarize(const std::vector<SweepRow>& rows);

void write_results_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_summary_csv(std::ostream& os, const Summary& s);

/// Mean rate against alpha with one-standard-deviation error bars.
void write_rate_svg(std::ostream& os, const Summary& s, double rate_bound);

}  // namespace smtpcps
