#pragma once

#include "smtpcps/protocol.hpp"

#include <cstdint>
#include <vector>

namespace smtpcps {

/// What a passive wiretapper records: every measured state and every wire message, plus its own
/// disturbance model D_e. Nothing here exposes D_c, b_r, keys or party phases.
class EavesdropperView {
 public:
  struct Entry {
    std::size_t k;
    Vector x;
    WireMessage wire;
  };

  explicit EavesdropperView(UncertainModel model) : model_(std::move(model)) {}

  void record(std::size_t k, const Vector& x, const WireMessage& wire) { history_.push_back({k, x, wire}); }

  const std::vector<Entry>& history() const { return history_; }
  const UncertainModel& model() const { return model_; }

 private:
  UncertainModel model_;
  std::vector<Entry> history_;
};

/// Bits an attacker decoded, each tagged with the step whose b_c it unmasked.
struct AttackOutput {
  Bits bits;
  std::vector<std::size_t> decode_steps;
  std::vector<std::size_t> flagged_events;  ///< steps the attacker took for key events
};

struct AttackReport {
  Bits guesses;
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> flagged_events;
};

/// One fair coin per message bit.
Bits attack_random(std::size_t n, Rng& rng);

/// Replays the sender automaton with `surrogate_dc` standing in for the unknown D_c.
AttackOutput attack_with_surrogate(const EavesdropperView& view, const Polytope& surrogate_dc,
                                   const Tolerance& tol = {});

/// attack_with_surrogate with D_c guessed as scale(D_e, guessed_dc_scale), 0 < scale <= 1.
AttackOutput attack_reachability(const EavesdropperView& view, double guessed_dc_scale, const Tolerance& tol = {});

/// Aligns decoded attacker bits with the receiver's decode steps; positions the attacker did not
/// decode are filled from `rng`.
Bits align_guesses(const AttackOutput& attack, const std::vector<std::size_t>& truth_steps, Rng& rng);

/// Throws ContractViolation when the lengths differ. An empty comparison has accuracy 0.
AttackReport evaluate(const Bits& guesses, const Bits& truth);

/// Exclusive membership over the two eavesdropper reach sets, the only inference D_e alone allows.
std::optional<std::uint8_t> eavesdropper_exclusive(const Vector& x_next, const Transition& t,
                                                   const UncertainModel& me, const Tolerance& tol = {});

}  // namespace smtpcps
