#pragma once

#include "smtpcps/controller.hpp"
#include "smtpcps/dynamics.hpp"
#include "smtpcps/random.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace smtpcps {

using Bits = std::vector<std::uint8_t>;

/// What the controller sends to the plant each step.
struct WireMessage {
  double u0 = 0.0;
  double u1 = 0.0;
  std::uint8_t b_c = 0;
};

/// The state and the two candidate inputs of one step, as remembered by either party.
struct Transition {
  Vector x;
  double u0 = 0.0;
  double u1 = 0.0;
};

/// Everything the defending endpoints share: the family, both uncertainty models and the cost map.
struct ProtocolContext {
  const ControllableFamily* family = nullptr;
  UncertainModel controller;    ///< D_c
  UncertainModel eavesdropper;  ///< D_e
  CostAssignment costs;
  Tolerance tol;
};

/// True when x_next lands in the Diff set of the transition and in exactly one of the two
/// controller reach sets. Both endpoints and the reachability attacker use this rule.
bool is_key_event(const Vector& x_next, const Transition& t, const UncertainModel& mc, const UncertainModel& me,
                  const Tolerance& tol = {});

struct SenderState {
  int s = 1;
  std::optional<std::uint8_t> key;
  Bits message;
  std::size_t p = 0;  ///< next message bit (0-based)
  std::optional<Transition> prev;
};

struct SenderOutput {
  WireMessage wire;
  SenderState state;
  bool key_event = false;  ///< the sender entered phase 2 on this step
  bool encoded = false;    ///< b_c carries a message bit
};

/// Phase update on x_k, then emission of b_c and the two candidate inputs.
/// Once the message is exhausted, phase 2 emits random b_c.
SenderOutput sender_step(SenderState st, const Vector& x_k, const ProtocolContext& ctx, Rng& rng);

/// 0 or 1 by exclusive membership in the controller reach sets of the previous transition.
/// Throws ProtocolDesyncError when x_k is in both or neither.
std::uint8_t infer_key(const Vector& x_k, const Transition& prev, const UncertainModel& mc, const Tolerance& tol = {});

struct Pending {
  Transition transition;
  std::uint8_t b_r = 0;
  std::uint8_t b_c = 0;
};

struct ReceiverState {
  int s = 1;
  std::optional<std::uint8_t> key;
  Bits decoded;
  std::optional<Pending> pending;
};

struct ReceiverAction {
  double u = 0.0;
  std::uint8_t b_r = 0;
  ReceiverState state;
};

/// Draws b_r and applies the matching candidate input.
ReceiverAction receiver_act(ReceiverState st, const Vector& x_k, const WireMessage& msg, Rng& rng);

struct ReceiverObservation {
  ReceiverState state;
  bool key_event = false;
  std::optional<std::uint8_t> decoded_bit;
};

/// Phase update on the measured successor state. Phase 2 decodes key XOR b_c of the same step.
ReceiverObservation receiver_observe(ReceiverState st, const Vector& x_next, const ProtocolContext& ctx);

/// One row of the per-step debugging log.
struct TraceRow {
  std::size_t k = 0;
  Vector x;
  WireMessage wire;
  std::uint8_t b_r = 0;
  bool in_diff = false;
  int sender_s = 1;
  int receiver_s = 1;
  bool key_event = false;
  std::optional<std::uint8_t> decoded_bit;
};

void write_trace_header(std::ostream& os);
void write_trace_row(std::ostream& os, const TraceRow& row);

/// "0110..." to bits. Throws ContractViolation on any other character.
Bits parse_bits(const std::string& text);

}  // namespace smtpcps
