#include "smtpcps/harness.hpp"

#include "smtpcps/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

namespace smtpcps {

double Tally::accuracy() const {
  return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(correct) / static_cast<double>(total);
}

EpisodeConfig episode_config(const Config& cfg, double alpha, const Vector& x0, std::uint64_t seed) {
  EpisodeConfig e;
  e.model = cfg.model;
  e.true_disturbance = true_disturbance(cfg);
  e.controller = controller_model(cfg);
  e.eavesdropper = eavesdropper_model(cfg, alpha);
  e.costs = cfg.costs;
  e.tol = cfg.tol;
  e.x0 = x0;
  e.steps = static_cast<std::size_t>(cfg.steps);
  e.message = cfg.message;
  e.seed = seed;
  return e;
}

namespace {

// Stream tags below keep every consumer of randomness on its own generator.
enum Stream : std::uint64_t { kPlant = 1, kSender, kReceiver, kMessage, kGuessRandom, kGuessFill, kGuessTrueDc };

Tally score(const Bits& guesses, const Bits& truth) {
  const auto r = evaluate(guesses, truth);
  return {r.correct, truth.size()};
}

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& cfg, const ControllableFamily& fam) {
  EpisodeResult res;
  res.steps = cfg.steps;
  res.acc_reach.resize(cfg.attack_scales.size());

  const ProtocolContext ctx{&fam, cfg.controller, cfg.eavesdropper, cfg.costs, cfg.tol};
  TrueSystem plant(cfg.model, cfg.true_disturbance, derive_seed({cfg.seed, kPlant}));
  Rng sender_rng(derive_seed({cfg.seed, kSender}));
  Rng receiver_rng(derive_seed({cfg.seed, kReceiver}));
  Rng message_rng(derive_seed({cfg.seed, kMessage}));

  const Bits message = cfg.message.materialize(cfg.steps, message_rng);
  SenderState sender;
  sender.message = message;
  ReceiverState receiver;
  EavesdropperView view(cfg.eavesdropper);
  std::vector<std::size_t> decode_steps;
  std::vector<std::size_t> event_steps;

  Vector x = cfg.x0;
  try {
    std::size_t index = set_index(x, fam, cfg.tol);
    for (std::size_t k = 0; k < cfg.steps; ++k) {
      auto sent = sender_step(std::move(sender), x, ctx, sender_rng);
      sender = std::move(sent.state);
      // the two automata must agree on the phase and, in phase 2, on the key
      if (k > 0 && (sender.s != receiver.s || (sender.s == 2 && sender.key != receiver.key))) {
        ++res.desyncs;
        throw ProtocolDesyncError("sender and receiver disagree at step " + std::to_string(k));
      }
      view.record(k, x, sent.wire);
      res.wire_bits += 1;
      res.wire_ones += sent.wire.b_c;

      auto act = receiver_act(std::move(receiver), x, sent.wire, receiver_rng);
      receiver = std::move(act.state);
      const Transition t{x, sent.wire.u0, sent.wire.u1};
      const Vector next = plant.step(x, act.u).x_next;

      auto seen = receiver_observe(std::move(receiver), next, ctx);
      receiver = std::move(seen.state);
      if (seen.key_event) {
        ++res.key_events;
        event_steps.push_back(k);
        if (eavesdropper_exclusive(next, t, cfg.eavesdropper, cfg.tol)) ++res.events_exposed_by_de;
      }
      if (seen.decoded_bit) {
        if (event_steps.empty() || event_steps.back() + 1 != k) ++res.conservation_violations;
        decode_steps.push_back(k);
      }
      if (cfg.trace) {
        res.trace.push_back({k, x, sent.wire, act.b_r, in_diff(next, x, t.u0, t.u1, ctx.controller, ctx.eavesdropper, cfg.tol),
                             sender.s, receiver.s, seen.key_event, seen.decoded_bit});
      }

      const std::size_t next_index = set_index(next, fam, cfg.tol);
      if (next_index > (index == 0 ? 0 : index - 1)) ++res.descent_violations;
      index = next_index;
      x = next;
    }
  } catch (const ProtocolDesyncError& e) {
    if (res.desyncs == 0) res.desyncs = 1;
    res.aborted = true;
    res.error = e.what();
  } catch (const Error& e) {
    res.aborted = true;
    res.error = e.what();
  }

  res.decoded_bits = std::min(receiver.decoded.size(), message.size());
  const Bits truth(message.begin(), message.begin() + static_cast<std::ptrdiff_t>(res.decoded_bits));
  for (std::size_t i = 0; i < res.decoded_bits; ++i) res.bit_errors += receiver.decoded[i] != truth[i];
  res.rate_bps = static_cast<double>(res.decoded_bits) / (static_cast<double>(cfg.steps) * cfg.model.Ts);

  const std::vector<std::size_t> truth_steps(decode_steps.begin(),
                                             decode_steps.begin() + static_cast<std::ptrdiff_t>(res.decoded_bits));
  Rng guess_rng(derive_seed({cfg.seed, kGuessRandom}));
  res.acc_random = score(attack_random(truth.size(), guess_rng), truth);
  for (std::size_t i = 0; i < cfg.attack_scales.size(); ++i) {
    Rng fill(derive_seed({cfg.seed, kGuessFill, i}));
    const auto attack = attack_reachability(view, cfg.attack_scales[i], cfg.tol);
    res.acc_reach[i] = score(align_guesses(attack, truth_steps, fill), truth);
  }
  Rng fill(derive_seed({cfg.seed, kGuessTrueDc}));
  const auto inverted = attack_with_surrogate(view, cfg.controller.disturbance, cfg.tol);
  res.acc_true_dc = score(align_guesses(inverted, truth_steps, fill), truth);
  return res;
}

Vector shell_state(const ControllableFamily& fam, std::size_t j, const Vector& direction) {
  if (j == 0 || j > fam.horizon()) throw ContractViolation("shell_state: index must lie in 1..N");
  const auto reach_along = [&](const Polytope& p) {
    const Vector nd = p.normals() * direction;
    double t = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < nd.size(); ++i) {
      if (nd(i) > 0.0) t = std::min(t, p.offsets()(i) / nd(i));
    }
    return t;
  };
  return 0.5 * (reach_along(fam.sets[j - 1]) + reach_along(fam.sets[j])) * direction;
}

std::vector<Vector> initial_states(const Config& cfg, const ControllableFamily& fam) {
  std::vector<Vector> out;
  if (!cfg.x0.empty()) {
    for (std::size_t i = 0; i < cfg.x0.size(); ++i) {
      if (!contains(fam.sets.back(), cfg.x0[i], cfg.tol)) {
        throw ConfigError("sim.x0 entry " + std::to_string(i) + " lies outside the controllable region T_N");
      }
      out.push_back(cfg.x0[i]);
    }
    return out;
  }
  Vector d = Vector::Zero(cfg.model.state_dim());
  d(0) = 1.0;
  for (int j : cfg.x0_shells) {
    if (j < 1 || static_cast<std::size_t>(j) > fam.horizon()) {
      throw ConfigError("sim.x0_shells entry " + std::to_string(j) + " is outside 1..N");
    }
    out.push_back(shell_state(fam, static_cast<std::size_t>(j), d));
  }
  return out;
}

std::uint64_t episode_seed(std::uint64_t base, std::size_t alpha_index, std::size_t x0_index, std::size_t rep) {
  return derive_seed({base, alpha_index, x0_index, rep});
}

std::vector<SweepRow> run_sweep(const Config& cfg, const ControllableFamily& fam, const std::vector<Vector>& x0s,
                                unsigned jobs, std::size_t rep_begin, std::size_t rep_end) {
  std::vector<SweepRow> rows;
  for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
    for (std::size_t i = 0; i < x0s.size(); ++i) {
      for (std::size_t r = rep_begin; r < rep_end; ++r) {
        SweepRow row;
        row.alpha = cfg.alphas[a];
        row.alpha_index = a;
        row.x0_id = i;
        row.rep = r;
        row.seed = episode_seed(cfg.base_seed, a, i, r);
        rows.push_back(std::move(row));
      }
    }
  }

  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(rows.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < rows.size() && !failed; i = next++) {
      try {
        auto& row = rows[i];
        row.result = run_episode(episode_config(cfg, row.alpha, x0s[row.x0_id], row.seed), fam);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) r[order[m]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b, bool* degenerate) {
  if (a.size() != b.size()) throw ContractViolation("spearman: series differ in length");
  if (degenerate) *degenerate = false;
  const auto flag = [&]() {
    if (degenerate) *degenerate = true;
    return 0.0;
  };
  if (a.size() < 2) return flag();
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return flag();
  return sab / std::sqrt(saa * sbb);
}

Summary summarize(const std::vector<SweepRow>& rows) {
  std::map<std::size_t, std::vector<const SweepRow*>> by_alpha;
  for (const auto& r : rows) by_alpha[r.alpha_index].push_back(&r);
  Summary s;
  std::vector<double> alphas;
  std::vector<double> means;
  for (const auto& [index, group] : by_alpha) {
    AlphaSummary a;
    a.alpha = group.front()->alpha;
    a.n = group.size();
    for (const auto* r : group) a.mean += r->result.rate_bps;
    a.mean /= static_cast<double>(a.n);
    if (a.n > 1) {
      double ss = 0.0;
      for (const auto* r : group) ss += (r->result.rate_bps - a.mean) * (r->result.rate_bps - a.mean);
      a.stddev = std::sqrt(ss / static_cast<double>(a.n - 1));
    }
    alphas.push_back(a.alpha);
    means.push_back(a.mean);
    s.per_alpha.push_back(a);
  }
  s.spearman = spearman(alphas, means, &s.spearman_degenerate);
  return s;
}

namespace {

std::string fmt(const char* spec, double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void write_results_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "alpha,x0_id,rep,seed,steps,key_events,decoded_bits,bit_errors,desyncs,rate_bps,acc_random,"
        "acc_reach_025,acc_reach_050,acc_reach_075\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    os << fmt("%.6g", row.alpha) << ',' << row.x0_id << ',' << row.rep << ',' << row.seed << ',' << r.steps << ','
       << r.key_events << ',' << r.decoded_bits << ',' << r.bit_errors << ',' << r.desyncs << ','
       << fmt("%.10g", r.rate_bps) << ',' << fmt("%.6f", r.acc_random.accuracy());
    for (std::size_t i = 0; i < 3; ++i) {
      os << ',' << (i < r.acc_reach.size() ? fmt("%.6f", r.acc_reach[i].accuracy()) : "nan");
    }
    os << '\n';
  }
}

void write_summary_csv(std::ostream& os, const Summary& s) {
  os << "alpha,mean_rate_bps,std_rate_bps,n\n";
  for (const auto& a : s.per_alpha) {
    os << fmt("%.6g", a.alpha) << ',' << fmt("%.10g", a.mean) << ',' << fmt("%.10g", a.stddev) << ',' << a.n << '\n';
  }
}

void write_rate_svg(std::ostream& os, const Summary& s, double rate_bound) {
  const double w = 640, h = 420, left = 70, right = 20, top = 30, bottom = 60;
  double amin = 0, amax = 1, ymax = 0;
  if (!s.per_alpha.empty()) {
    amin = s.per_alpha.front().alpha;
    amax = s.per_alpha.back().alpha;
  }
  if (amax <= amin) amax = amin + 1;
  for (const auto& a : s.per_alpha) ymax = std::max(ymax, a.mean + a.stddev);
  ymax = std::min(std::max(ymax * 1.1, 0.1), rate_bound);
  const auto px = [&](double a) { return left + (a - amin) / (amax - amin) * (w - left - right); };
  const auto py = [&](double r) { return h - bottom - std::clamp(r, 0.0, ymax) / ymax * (h - top - bottom); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
     << "\" stroke=\"black\"/>\n";
  for (const auto& a : s.per_alpha) {
    os << "<text x=\"" << fmt("%.2f", px(a.alpha)) << "\" y=\"" << h - bottom + 18 << "\" text-anchor=\"middle\">"
       << fmt("%g", a.alpha) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double r = ymax * i / 5.0;
    os << "<text x=\"" << left - 8 << "\" y=\"" << fmt("%.2f", py(r) + 4) << "\" text-anchor=\"end\">"
       << fmt("%.2f", r) << "</text>\n";
  }
  os << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">alpha (D_e = alpha D_c)</text>\n";
  os << "<text transform=\"translate(18," << (top + h - bottom) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">mean transmission rate (bits/s)</text>\n";

  os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (const auto& a : s.per_alpha) os << fmt("%.2f", px(a.alpha)) << ',' << fmt("%.2f", py(a.mean)) << ' ';
  os << "\"/>\n";
  for (const auto& a : s.per_alpha) {
    const std::string x = fmt("%.2f", px(a.alpha));
    os << "<line x1=\"" << x << "\" y1=\"" << fmt("%.2f", py(a.mean - a.stddev)) << "\" x2=\"" << x << "\" y2=\""
       << fmt("%.2f", py(a.mean + a.stddev)) << "\" stroke=\"steelblue\"/>\n";
    os << "<circle cx=\"" << x << "\" cy=\"" << fmt("%.2f", py(a.mean)) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace smtpcps
