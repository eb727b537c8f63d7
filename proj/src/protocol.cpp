#include "smtpcps/protocol.hpp"

#include "smtpcps/errors.hpp"

#include <cstdio>
#include <ostream>

namespace smtpcps {

namespace {

const ControllableFamily& family_of(const ProtocolContext& ctx) {
  if (ctx.family == nullptr) throw ContractViolation("protocol: context has no controllable family");
  return *ctx.family;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool is_key_event(const Vector& x_next, const Transition& t, const UncertainModel& mc, const UncertainModel& me,
                  const Tolerance& tol) {
  return in_diff(x_next, t.x, t.u0, t.u1, mc, me, tol) &&
         exclusive_reach(x_next, t.x, t.u0, t.u1, mc, tol).has_value();
}

std::uint8_t infer_key(const Vector& x_k, const Transition& prev, const UncertainModel& mc, const Tolerance& tol) {
  const auto which = exclusive_reach(x_k, prev.x, prev.u0, prev.u1, mc, tol);
  if (!which) throw ProtocolDesyncError("infer_key: state lies in both or neither controller reach set");
  return *which;
}

SenderOutput sender_step(SenderState st, const Vector& x_k, const ProtocolContext& ctx, Rng& rng) {
  const auto& fam = family_of(ctx);
  SenderOutput out;
  if (st.s == 1 && st.prev && is_key_event(x_k, *st.prev, ctx.controller, ctx.eavesdropper, ctx.tol)) {
    st.s = 2;
    st.key = infer_key(x_k, *st.prev, ctx.controller, ctx.tol);
    out.key_event = true;
  } else {
    st.s = 1;
    st.key.reset();
  }

  if (st.s == 2 && st.p < st.message.size()) {
    out.wire.b_c = static_cast<std::uint8_t>(st.message[st.p] ^ *st.key);
    ++st.p;
    out.encoded = true;
  } else {
    out.wire.b_c = rng.bit();
  }

  out.wire.u0 = phi(x_k, 0, fam, ctx.costs, ctx.tol);
  out.wire.u1 = phi(x_k, 1, fam, ctx.costs, ctx.tol);
  st.prev = Transition{x_k, out.wire.u0, out.wire.u1};
  out.state = std::move(st);
  return out;
}

ReceiverAction receiver_act(ReceiverState st, const Vector& x_k, const WireMessage& msg, Rng& rng) {
  ReceiverAction out;
  out.b_r = rng.bit();
  out.u = out.b_r ? msg.u1 : msg.u0;
  st.pending = Pending{Transition{x_k, msg.u0, msg.u1}, out.b_r, msg.b_c};
  out.state = std::move(st);
  return out;
}

ReceiverObservation receiver_observe(ReceiverState st, const Vector& x_next, const ProtocolContext& ctx) {
  if (!st.pending) throw ContractViolation("receiver_observe: no pending action");
  const Pending pending = *st.pending;
  st.pending.reset();
  ReceiverObservation out;
  if (st.s == 1 && is_key_event(x_next, pending.transition, ctx.controller, ctx.eavesdropper, ctx.tol)) {
    st.key = pending.b_r;
    st.s = 2;
    out.key_event = true;
  } else if (st.s == 2) {
    const auto bit = static_cast<std::uint8_t>(*st.key ^ pending.b_c);
    st.decoded.push_back(bit);
    out.decoded_bit = bit;
    st.s = 1;
    st.key.reset();
  }
  out.state = std::move(st);
  return out;
}

void write_trace_header(std::ostream& os) {
  os << "k,x1,x2,u0,u1,b_r,b_c,in_diff,sender_s,receiver_s,key_event,decoded_bit\n";
}

void write_trace_row(std::ostream& os, const TraceRow& r) {
  os << r.k << ',' << num(r.x(0)) << ',' << num(r.x.size() > 1 ? r.x(1) : 0.0) << ',' << num(r.wire.u0) << ','
     << num(r.wire.u1) << ',' << int(r.b_r) << ',' << int(r.wire.b_c) << ',' << int(r.in_diff) << ','
     << r.sender_s << ',' << r.receiver_s << ',' << int(r.key_event) << ',';
  if (r.decoded_bit) os << int(*r.decoded_bit);
  os << '\n';
}

Bits parse_bits(const std::string& text) {
  Bits out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw ContractViolation(std::string("bit string contains '") + c + "'");
    out.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return out;
}

}  // namespace smtpcps
