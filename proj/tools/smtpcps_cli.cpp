// Command line front end: precompute, run, sweep, verify.
//
// Exit codes: 0 success, 1 runtime or protocol failure (including failed checks), 2 bad configuration.

#include "smtpcps/config.hpp"
#include "smtpcps/controller.hpp"
#include "smtpcps/errors.hpp"
#include "smtpcps/harness.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace smtpcps;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string config;
  std::string family;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool trace = false;
  unsigned jobs = 0;
  std::size_t x0 = 0;
};

Config load(const Options& o) {
  Config cfg = o.config.empty() ? Config{} : load_config(o.config);
  validate_config(cfg);
  return cfg;
}

// The cache stores no model or D_c, so a cache built under different settings is rejected here.
ControllableFamily obtain_family(const Config& cfg, const Options& o) {
  if (o.family.empty()) return build_family(cfg);
  std::ifstream in(o.family);
  if (!in) throw FormatError("cannot open family cache '" + o.family + "'");
  auto fam = read_family(in, cfg.model, controller_model(cfg).disturbance);
  if (fam.horizon() != static_cast<std::size_t>(cfg.N) || fam.u_max != cfg.u_max ||
      fam.alpha_max != cfg.alpha_max || fam.gain.K != cfg.K) {
    throw FormatError("family cache '" + o.family + "' was built with different controller settings");
  }
  for (const auto& c : verify_family(fam, cfg.tol)) {
    if (!c.passed) throw FormatError("family cache '" + o.family + "' fails " + c.name + ": " + c.detail);
  }
  return fam;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write '" + p.string() + "'");
  return f;
}

int cmd_precompute(const Options& o) {
  const Config cfg = load(o);
  const auto fam = build_family(cfg);
  const fs::path out = o.out.empty() ? fs::path("family.ctrlfam") : fs::path(o.out);
  auto f = open_out(out);
  write_family(f, fam);
  std::size_t rows = 0;
  for (const auto& s : fam.sets) rows += s.num_halfspaces();
  std::printf("family: N=%zu, %zu sets, T_0 has %zu vertices, T_N has %zu vertices, %zu halfspaces in total\n",
              fam.horizon(), fam.sets.size(), fam.sets.front().vertices().size(),
              fam.sets.back().vertices().size(), rows);
  std::printf("build time: %.3f s\nwrote %s\n", fam.build_seconds, out.string().c_str());
  return 0;
}

int cmd_run(const Options& o) {
  const Config cfg = load(o);
  const auto fam = obtain_family(cfg, o);
  const auto x0s = initial_states(cfg, fam);
  if (o.x0 >= x0s.size()) throw ConfigError("--x0 index out of range (have " + std::to_string(x0s.size()) + ")");
  SweepRow row;
  row.alpha = cfg.alpha;
  row.x0_id = o.x0;
  row.seed = o.seed.value_or(episode_seed(cfg.base_seed, 0, o.x0, 0));
  auto ec = episode_config(cfg, cfg.alpha, x0s[o.x0], row.seed);
  ec.trace = o.trace;
  row.result = run_episode(ec, fam);

  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  {
    auto f = open_out(dir / "episode.csv");
    write_results_csv(f, {row});
  }
  if (o.trace) {
    auto f = open_out(dir / "trace.csv");
    write_trace_header(f);
    for (const auto& t : row.result.trace) write_trace_row(f, t);
  }
  const auto& r = row.result;
  std::printf("alpha=%g x0=(%.6g, %.6g) seed=%llu\n", cfg.alpha, x0s[o.x0](0), x0s[o.x0](1),
              static_cast<unsigned long long>(row.seed));
  std::printf("key events %zu, decoded bits %zu, bit errors %zu, desyncs %zu, rate %.3f bits/s\n", r.key_events,
              r.decoded_bits, r.bit_errors, r.desyncs, r.rate_bps);
  if (r.aborted) {
    std::fprintf(stderr, "episode aborted: %s\n", r.error.c_str());
    return kExitRuntime;
  }
  return r.bit_errors == 0 && r.desyncs == 0 ? 0 : kExitRuntime;
}

int cmd_sweep(const Options& o) {
  const Config cfg = load(o);
  const auto fam = obtain_family(cfg, o);
  const auto x0s = initial_states(cfg, fam);
  const auto start = std::chrono::steady_clock::now();
  const auto rows = run_sweep(cfg, fam, x0s, o.jobs);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto summary = summarize(rows);

  const fs::path dir = o.out.empty() ? fs::path("sweep") : fs::path(o.out);
  {
    auto f = open_out(dir / "results.csv");
    write_results_csv(f, rows);
  }
  {
    auto f = open_out(dir / "summary.csv");
    write_summary_csv(f, summary);
  }
  {
    auto f = open_out(dir / "rate_vs_alpha.svg");
    write_rate_svg(f, summary, 0.5 / cfg.model.Ts);
  }

  std::size_t errors = 0, desyncs = 0, aborted = 0;
  for (const auto& r : rows) {
    errors += r.result.bit_errors;
    desyncs += r.result.desyncs;
    aborted += r.result.aborted;
  }
  std::printf("%zu episodes in %.2f s\n", rows.size(), seconds);
  std::printf("%8s %14s %14s %5s\n", "alpha", "mean bits/s", "std bits/s", "n");
  for (const auto& a : summary.per_alpha) std::printf("%8g %14.4f %14.4f %5zu\n", a.alpha, a.mean, a.stddev, a.n);
  std::printf("Spearman(alpha, mean rate) = %.4f%s\n", summary.spearman,
              summary.spearman_degenerate ? " (degenerate)" : "");
  std::printf("bit errors %zu, desyncs %zu, aborted episodes %zu\nwrote %s\n", errors, desyncs, aborted,
              dir.string().c_str());
  return errors == 0 && desyncs == 0 && aborted == 0 ? 0 : kExitRuntime;
}

int cmd_verify(const Options& o) {
  std::vector<CheckResult> checks;
  Config cfg;
  try {
    cfg = load(o);
    checks.push_back({"configuration", true, "D subset D_c subset D_e and all values in range"});
  } catch (const ConfigError& e) {
    std::printf("FAIL configuration: %s\n", e.what());
    return kExitConfig;
  }

  std::optional<ControllableFamily> fam;
  try {
    fam = obtain_family(cfg, o);
    checks.push_back({"family", true, o.family.empty() ? "built in process" : "cache checksum and settings match"});
  } catch (const Error& e) {
    checks.push_back({"family", false, e.what()});
  }

  if (fam) {
    for (auto& c : verify_family(*fam, cfg.tol)) checks.push_back(std::move(c));

    // reach-set inclusion for every configured alpha
    Rng rng(cfg.base_seed);
    const auto mc = controller_model(cfg);
    std::size_t bad = 0, total = 0;
    for (double a : cfg.alphas) {
      const auto me = eavesdropper_model(cfg, a);
      for (int i = 0; i < 1000; ++i) {
        Vector x(2);
        x << rng.uniform(-10, 10), rng.uniform(-10, 10);
        const double u = rng.uniform(-cfg.u_max, cfg.u_max);
        bad += !is_subset(reach(mc, x, u), reach(me, x, u), cfg.tol);
        ++total;
      }
    }
    checks.push_back({"reach-set inclusion", bad == 0, std::to_string(total - bad) + "/" + std::to_string(total)});

    // one replication of the sweep exercises the protocol invariants end to end
    const auto x0s = initial_states(cfg, *fam);
    const auto rows = run_sweep(cfg, *fam, x0s, o.jobs, 0, 1);
    std::size_t errors = 0, desyncs = 0, descent = 0, exposed = 0, conservation = 0;
    Tally inverted;
    for (const auto& r : rows) {
      errors += r.result.bit_errors;
      desyncs += r.result.desyncs + r.result.aborted;
      descent += r.result.descent_violations;
      exposed += r.result.events_exposed_by_de;
      conservation += r.result.conservation_violations;
      inverted += r.result.acc_true_dc;
    }
    checks.push_back({"protocol correctness", errors == 0 && desyncs == 0,
                      std::to_string(errors) + " bit errors, " + std::to_string(desyncs) + " desyncs"});
    checks.push_back({"index descent", descent == 0, std::to_string(descent) + " violations"});
    checks.push_back({"key/decode conservation", conservation == 0, std::to_string(conservation) + " violations"});
    checks.push_back({"genuine events hidden from D_e", exposed == 0, std::to_string(exposed) + " exposed"});
    checks.push_back({"true-D_c decoder", inverted.correct == inverted.total,
                      std::to_string(inverted.correct) + "/" + std::to_string(inverted.total) + " bits"});
  }

  bool ok = true;
  for (const auto& c : checks) {
    std::printf("%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    ok = ok && c.passed;
  }
  return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secret message transfer through a control loop: simulator and tools"};
  app.require_subcommand(1);
  Options o;

  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "configuration file (defaults to the reference instance)");
  };
  const auto add_family = [&](CLI::App* sub) {
    sub->add_option("--family", o.family, "precomputed family cache (built in process when omitted)");
  };

  auto* pre = app.add_subcommand("precompute", "build and cache the controllable-set family");
  add_config(pre);
  pre->add_option("--out", o.out, "cache file to write (default family.ctrlfam)");

  auto* run = app.add_subcommand("run", "simulate one episode");
  add_config(run);
  add_family(run);
  run->add_option("--out", o.out, "output directory for episode.csv and trace.csv");
  run->add_option("--seed", o.seed, "episode seed (default derived from sim.base_seed)");
  run->add_flag("--trace", o.trace, "write the per-step trace");
  run->add_option("--x0", o.x0, "index into the initial-state list");

  auto* sweep = app.add_subcommand("sweep", "run the rate-versus-alpha experiment");
  add_config(sweep);
  add_family(sweep);
  sweep->add_option("--out", o.out, "output directory (default ./sweep)");
  sweep->add_option("--jobs", o.jobs, "concurrent episodes (0 = all cores)");

  auto* verify = app.add_subcommand("verify", "check every certificate and protocol invariant");
  add_config(verify);
  add_family(verify);
  verify->add_option("--jobs", o.jobs, "concurrent episodes (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*pre) return cmd_precompute(o);
    if (*run) return cmd_run(o);
    if (*sweep) return cmd_sweep(o);
    return cmd_verify(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
