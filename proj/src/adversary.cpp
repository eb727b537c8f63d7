#include "smtpcps/adversary.hpp"

#include "smtpcps/errors.hpp"

#include <unordered_map>

namespace smtpcps {

Bits attack_random(std::size_t n, Rng& rng) {
  Bits out(n);
  for (auto& b : out) b = rng.bit();
  return out;
}

AttackOutput attack_with_surrogate(const EavesdropperView& view, const Polytope& surrogate_dc, const Tolerance& tol) {
  const UncertainModel& me = view.model();
  const UncertainModel guess{me.model, surrogate_dc};
  AttackOutput out;
  const auto& h = view.history();
  int s = 1;
  for (std::size_t i = 1; i < h.size(); ++i) {
    const Transition prev{h[i - 1].x, h[i - 1].wire.u0, h[i - 1].wire.u1};
    if (s == 1 && is_key_event(h[i].x, prev, guess, me, tol)) {
      s = 2;
      const auto key = *exclusive_reach(h[i].x, prev.x, prev.u0, prev.u1, guess, tol);
      out.flagged_events.push_back(h[i].k);
      out.bits.push_back(static_cast<std::uint8_t>(key ^ h[i].wire.b_c));
      out.decode_steps.push_back(h[i].k);
    } else {
      s = 1;
    }
  }
  return out;
}

AttackOutput attack_reachability(const EavesdropperView& view, double guessed_dc_scale, const Tolerance& tol) {
  if (!(guessed_dc_scale > 0.0 && guessed_dc_scale <= 1.0)) {
    throw ContractViolation("attack_reachability: scale must lie in (0, 1]");
  }
  return attack_with_surrogate(view, scale(view.model().disturbance, guessed_dc_scale), tol);
}

Bits align_guesses(const AttackOutput& attack, const std::vector<std::size_t>& truth_steps, Rng& rng) {
  std::unordered_map<std::size_t, std::uint8_t> by_step;
  for (std::size_t i = 0; i < attack.bits.size(); ++i) by_step.emplace(attack.decode_steps[i], attack.bits[i]);
  Bits out;
  out.reserve(truth_steps.size());
  for (auto k : truth_steps) {
    const auto it = by_step.find(k);
    // draw even when unused so the fill stream does not depend on what the attacker decoded
    const std::uint8_t coin = rng.bit();
    out.push_back(it != by_step.end() ? it->second : coin);
  }
  return out;
}

AttackReport evaluate(const Bits& guesses, const Bits& truth) {
  if (guesses.size() != truth.size()) throw ContractViolation("evaluate: guesses and truth differ in length");
  AttackReport r;
  r.guesses = guesses;
  for (std::size_t i = 0; i < truth.size(); ++i) r.correct += guesses[i] == truth[i];
  r.accuracy = truth.empty() ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(truth.size());
  return r;
}

std::optional<std::uint8_t> eavesdropper_exclusive(const Vector& x_next, const Transition& t,
                                                   const UncertainModel& me, const Tolerance& tol) {
  return exclusive_reach(x_next, t.x, t.u0, t.u1, me, tol);
}

}  // namespace smtpcps
