#include <doctest.h>

#include "fixtures.hpp"
#include "smtpcps/errors.hpp"
#include "smtpcps/harness.hpp"
#include "smtpcps/protocol.hpp"

#include <sstream>

using namespace smtpcps;
using oracle::v2;

namespace {

ProtocolContext context(double alpha) {
  return {&fixture::reference_family(), fixture::controller_model(), fixture::eavesdropper_model(alpha), {}, {}};
}

// A transition outside T_0 (so the candidate inputs differ) and a successor that is a key event
// revealing `bit`, found by scanning the applied input's D_c box.
struct KeyEventCase {
  Transition prev;
  Vector x_k;
};

KeyEventCase key_event_case(const ProtocolContext& ctx, std::uint8_t bit) {
  const auto& fam = *ctx.family;
  for (std::size_t j = 1; j <= 40; ++j) {
    for (double angle = 0.0; angle < 6.28; angle += 0.5) {
      const Vector x = shell_state(fam, j, v2(std::cos(angle), std::sin(angle)));
      const Transition prev{x, phi(x, 0, fam), phi(x, 1, fam)};
      if (prev.u0 == prev.u1) continue;
      const Vector centre = nominal_next(ctx.controller, x, bit ? prev.u1 : prev.u0);
      for (int a = -10; a <= 10; ++a) {
        for (int b = -10; b <= 10; ++b) {
          const Vector probe = centre + v2(0.0119 * a, 0.0119 * b);
          if (is_key_event(probe, prev, ctx.controller, ctx.eavesdropper)) return {prev, probe};
        }
      }
    }
  }
  FAIL("no key event found near the applied input");
  return {};
}

}  // namespace

TEST_SUITE("protocol") {
  TEST_CASE("sender: first step keeps phase 1 and consumes no message bit") {
    const auto ctx = context(4.0);
    Rng rng(1);
    SenderState st;
    st.message = {1, 0, 1};
    const auto out = sender_step(st, v2(0.5, 0.0), ctx, rng);
    CHECK(out.state.s == 1);
    CHECK(out.state.p == 0);
    CHECK_FALSE(out.key_event);
    CHECK_FALSE(out.encoded);
    REQUIRE(out.state.prev.has_value());
    CHECK(out.wire.u0 == phi(v2(0.5, 0.0), 0, *ctx.family));
    CHECK(out.wire.u1 == phi(v2(0.5, 0.0), 1, *ctx.family));
  }

  TEST_CASE("sender: a key event enters phase 2 and encodes the next bit") {
    const auto ctx = context(4.0);
    for (std::uint8_t bit : {std::uint8_t{0}, std::uint8_t{1}}) {
      const auto c = key_event_case(ctx, bit);
      Rng rng(2);
      SenderState st;
      st.message = {1, 1, 0};
      st.p = 1;
      st.prev = c.prev;
      const auto out = sender_step(st, c.x_k, ctx, rng);
      CHECK(out.state.s == 2);
      CHECK(out.state.key == std::optional<std::uint8_t>(bit));
      CHECK(out.wire.b_c == (1 ^ bit));
      CHECK(out.state.p == 2);
      CHECK(out.key_event);

      // phase 2 on entry always falls back to phase 1
      const auto again = sender_step(out.state, c.x_k, ctx, rng);
      CHECK(again.state.s == 1);
      CHECK_FALSE(again.state.key.has_value());
      CHECK(again.state.p == 2);
    }
  }

  TEST_CASE("sender: exhausted message emits random bits in phase 2") {
    const auto ctx = context(4.0);
    const auto c = key_event_case(ctx, 0);
    SenderState st;
    st.prev = c.prev;
    int ones = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Rng rng(seed);
      const auto out = sender_step(st, c.x_k, ctx, rng);
      CHECK(out.state.s == 2);
      CHECK_FALSE(out.encoded);
      ones += out.wire.b_c;
    }
    CHECK(ones > 60);
    CHECK(ones < 140);
  }

  TEST_CASE("infer_key") {
    const auto ctx = context(4.0);
    const auto c0 = key_event_case(ctx, 0);
    const auto c1 = key_event_case(ctx, 1);
    CHECK(infer_key(c0.x_k, c0.prev, ctx.controller) == 0);
    CHECK(infer_key(c1.x_k, c1.prev, ctx.controller) == 1);
    CHECK_THROWS_AS(infer_key(v2(1e4, 1e4), c0.prev, ctx.controller), ProtocolDesyncError);
    const Transition same{v2(0, 0), 0.3, 0.3};
    CHECK_THROWS_AS(infer_key(nominal_next(ctx.controller, same.x, 0.3), same, ctx.controller), ProtocolDesyncError);
  }

  TEST_CASE("receiver_act applies the selected input") {
    Rng rng(10);
    const WireMessage msg{1.5, -2.5, 1};
    int ones = 0;
    bool saw[2] = {false, false};
    for (int i = 0; i < 10000; ++i) {
      const auto a = receiver_act(ReceiverState{}, v2(0, 0), msg, rng);
      CHECK(a.u == (a.b_r ? -2.5 : 1.5));
      REQUIRE(a.state.pending.has_value());
      CHECK(a.state.pending->b_c == 1);
      CHECK(a.state.pending->b_r == a.b_r);
      saw[a.b_r] = true;
      ones += a.b_r;
    }
    CHECK(saw[0]);
    CHECK(saw[1]);
    CHECK(ones / 10000.0 >= 0.47);
    CHECK(ones / 10000.0 <= 0.53);
  }

  TEST_CASE("receiver_observe") {
    const auto ctx = context(4.0);
    CHECK_THROWS_AS(receiver_observe(ReceiverState{}, v2(0, 0), ctx), ContractViolation);

    ReceiverState quiet;
    quiet.pending = Pending{Transition{v2(0, 0), 0.0, 0.0}, 1, 0};
    const auto q = receiver_observe(quiet, v2(0.01, 0.0), ctx);
    CHECK(q.state.s == 1);
    CHECK_FALSE(q.state.pending.has_value());
    CHECK_FALSE(q.key_event);
    CHECK(q.state.decoded.empty());

    ReceiverState decoding;
    decoding.s = 2;
    decoding.key = 1;
    decoding.pending = Pending{Transition{v2(0, 0), 0.0, 0.0}, 0, 1};
    const auto d = receiver_observe(decoding, v2(0, 0), ctx);
    CHECK(d.state.s == 1);
    CHECK(d.decoded_bit == std::optional<std::uint8_t>(0));
    CHECK(d.state.decoded == Bits{0});

    const auto c = key_event_case(ctx, 1);
    ReceiverState waiting;
    waiting.pending = Pending{c.prev, 1, 0};
    const auto w = receiver_observe(waiting, c.x_k, ctx);
    CHECK(w.key_event);
    CHECK(w.state.s == 2);
    CHECK(w.state.key == std::optional<std::uint8_t>(1));
  }

  TEST_CASE("end to end: decoded prefix equals the message and the automata stay in lockstep") {
    const auto& fam = fixture::reference_family();
    Config cfg;
    cfg.message = MessageSpec{false, 0, parse_bits("1100101000111011010010101101")};
    const auto x0s = initial_states(cfg, fam);
    std::size_t events = 0;
    for (double alpha : {2.0, 5.0, 8.0}) {
      for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto ec = episode_config(cfg, alpha, x0s[seed % 3], seed);
        ec.trace = true;
        const auto r = run_episode(ec, fam);
        CHECK_FALSE(r.aborted);
        CHECK(r.desyncs == 0);
        CHECK(r.bit_errors == 0);
        CHECK(r.conservation_violations == 0);
        CHECK(2 * r.decoded_bits <= r.steps);
        CHECK(r.rate_bps <= 0.5 / cfg.model.Ts);
        events += r.key_events;
        // after every step the receiver phase equals the sender phase of the following step
        for (std::size_t k = 0; k + 1 < r.trace.size(); ++k) CHECK(r.trace[k].receiver_s == r.trace[k + 1].sender_s);
      }
    }
    CHECK(events > 100);
  }

  TEST_CASE("wire bits look like fair coins") {
    const auto& fam = fixture::reference_family();
    Config cfg;
    const auto x0s = initial_states(cfg, fam);
    std::size_t n = 0;
    std::size_t ones = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto r = run_episode(episode_config(cfg, 4.0, x0s[seed % 3], seed), fam);
      n += r.wire_bits;
      ones += r.wire_ones;
    }
    const double p = static_cast<double>(ones) / static_cast<double>(n);
    CHECK(std::abs(p - 0.5) <= 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
  }

  TEST_CASE("trace format") {
    std::ostringstream os;
    write_trace_header(os);
    TraceRow row;
    row.k = 3;
    row.x = v2(0.5, -0.25);
    row.wire = {1.0, 2.0, 1};
    row.b_r = 1;
    row.in_diff = true;
    row.sender_s = 2;
    row.receiver_s = 1;
    row.decoded_bit = 0;
    write_trace_row(os, row);
    CHECK(os.str() == "k,x1,x2,u0,u1,b_r,b_c,in_diff,sender_s,receiver_s,key_event,decoded_bit\n"
                      "3,0.5,-0.25,1,2,1,1,1,2,1,0,0\n");
  }

  TEST_CASE("parse_bits") {
    CHECK(parse_bits("0110") == Bits{0, 1, 1, 0});
    CHECK(parse_bits("").empty());
    CHECK_THROWS_AS(parse_bits("01x"), ContractViolation);
  }
}
