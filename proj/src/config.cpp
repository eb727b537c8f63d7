#include "smtpcps/config.hpp"

#include "smtpcps/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace smtpcps {

LinearModel Config::default_model() {
  LinearModel m;
  m.A.resize(2, 2);
  m.A << 1.0, 0.0975, 0.0, 0.9512;
  m.B.resize(2);
  m.B << 0.0246, 0.4877;
  m.Ts = 0.1;
  return m;
}

Eigen::RowVectorXd Config::default_gain() {
  Eigen::RowVectorXd k(2);
  k << -13.27, -2.26;
  return k;
}

std::vector<double> Config::default_alphas() { return expand_range(1.5, 0.5, 8.0); }

std::vector<double> expand_range(double start, double step, double stop) {
  if (!(step > 0.0)) throw ConfigError("range step must be positive");
  std::vector<double> out;
  const double count = std::floor((stop - start) / step + 1e-9);
  for (long i = 0; i <= static_cast<long>(count); ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

Bits MessageSpec::materialize(std::size_t steps, Rng& rng) const {
  if (!random) return bits;
  Bits out(length == 0 ? steps : length);
  for (auto& b : out) b = rng.bit();
  return out;
}

std::string MessageSpec::describe() const {
  if (random) return "random:" + (length == 0 ? std::string("<steps>") : std::to_string(length));
  std::string s;
  for (auto b : bits) s.push_back(static_cast<char>('0' + b));
  return s;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& value) {
  std::string v = value;
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream is(v);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

double to_double(const std::string& t, int line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError("'" + t + "' is not a finite number", line);
  }
  return v;
}

long long to_int(const std::string& t, int line) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("'" + t + "' is not an integer", line);
  return v;
}

std::vector<double> numbers(const std::string& value, int line, std::size_t expect) {
  std::vector<double> out;
  for (const auto& t : tokens(value)) out.push_back(to_double(t, line));
  if (expect && out.size() != expect) {
    throw ConfigError("expected " + std::to_string(expect) + " numbers, got " + std::to_string(out.size()), line);
  }
  return out;
}

double scalar(const std::string& value, int line) { return numbers(value, line, 1)[0]; }

int positive_int(const std::string& value, int line) {
  const auto t = tokens(value);
  if (t.size() != 1) throw ConfigError("expected one integer", line);
  const long long v = to_int(t[0], line);
  if (v < 1 || v > 1'000'000'000) throw ConfigError("expected a positive integer", line);
  return static_cast<int>(v);
}

CostId cost_id(const std::string& value, int line) {
  const std::string v = trim(value);
  if (v == "J0" || v == "MinDistance") return CostId::MinDistance;
  if (v == "J1" || v == "MinEffort") return CostId::MinEffort;
  throw ConfigError("unknown cost '" + v + "' (use J0/MinDistance or J1/MinEffort)", line);
}

MessageSpec message_spec(const std::string& value, int line) {
  const std::string v = trim(value);
  MessageSpec m;
  if (v.rfind("random", 0) == 0) {
    if (v == "random") return m;
    if (v.size() < 8 || v[6] != ':') throw ConfigError("expected random:<length>", line);
    const long long len = to_int(v.substr(7), line);
    if (len < 0) throw ConfigError("message length must be non-negative", line);
    m.length = static_cast<std::size_t>(len);
    if (m.length == 0) {
      m.random = false;  // an explicitly empty message
    }
    return m;
  }
  m.random = false;
  try {
    m.bits = parse_bits(v);
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("sim.message: ") + e.what(), line);
  }
  return m;
}

std::vector<double> alpha_list(const std::string& value, int line) {
  const std::string v = trim(value);
  if (std::count(v.begin(), v.end(), ':') == 2) {
    const auto a = v.find(':');
    const auto b = v.find(':', a + 1);
    const double start = to_double(trim(v.substr(0, a)), line);
    const double step = to_double(trim(v.substr(a + 1, b - a - 1)), line);
    const double stop = to_double(trim(v.substr(b + 1)), line);
    if (!(step > 0.0)) throw ConfigError("range step must be positive", line);
    return expand_range(start, step, stop);
  }
  return numbers(v, line, 0);
}

std::vector<Vector> state_list(const std::string& value, int line) {
  std::vector<Vector> out;
  std::stringstream ss(value);
  for (std::string part; std::getline(ss, part, ';');) {
    if (trim(part).empty()) continue;
    const auto n = numbers(part, line, 2);
    Vector x(2);
    x << n[0], n[1];
    out.push_back(x);
  }
  return out;
}

}  // namespace

Config parse_config(std::istream& is) {
  Config cfg;
  using Setter = std::function<void(const std::string&, int)>;
  const std::map<std::string, Setter> setters{
      {"model.A",
       [&](const std::string& v, int l) {
         const auto n = numbers(v, l, 4);
         cfg.model.A << n[0], n[1], n[2], n[3];
       }},
      {"model.B",
       [&](const std::string& v, int l) {
         const auto n = numbers(v, l, 2);
         cfg.model.B << n[0], n[1];
       }},
      {"model.Ts", [&](const std::string& v, int l) { cfg.model.Ts = scalar(v, l); }},
      {"dist.true_bound", [&](const std::string& v, int l) { cfg.true_bound = scalar(v, l); }},
      {"dist.controller_bound", [&](const std::string& v, int l) { cfg.controller_bound = scalar(v, l); }},
      {"dist.alpha", [&](const std::string& v, int l) { cfg.alpha = scalar(v, l); }},
      {"controller.K",
       [&](const std::string& v, int l) {
         const auto n = numbers(v, l, 2);
         cfg.K << n[0], n[1];
       }},
      {"controller.N", [&](const std::string& v, int l) { cfg.N = positive_int(v, l); }},
      {"controller.u_max", [&](const std::string& v, int l) { cfg.u_max = scalar(v, l); }},
      {"controller.alpha_max", [&](const std::string& v, int l) { cfg.alpha_max = scalar(v, l); }},
      {"controller.bit0_cost", [&](const std::string& v, int l) { cfg.costs.bit0 = cost_id(v, l); }},
      {"controller.bit1_cost", [&](const std::string& v, int l) { cfg.costs.bit1 = cost_id(v, l); }},
      {"sim.steps", [&](const std::string& v, int l) { cfg.steps = positive_int(v, l); }},
      {"sim.reps", [&](const std::string& v, int l) { cfg.reps = positive_int(v, l); }},
      {"sim.base_seed",
       [&](const std::string& v, int l) {
         const auto t = tokens(v);
         if (t.size() != 1) throw ConfigError("expected one unsigned integer", l);
         errno = 0;
         char* end = nullptr;
         const auto s = std::strtoull(t[0].c_str(), &end, 10);
         if (*end != '\0' || errno == ERANGE || t[0][0] == '-') throw ConfigError("bad seed '" + t[0] + "'", l);
         cfg.base_seed = s;
       }},
      {"sim.message", [&](const std::string& v, int l) { cfg.message = message_spec(v, l); }},
      {"sim.x0", [&](const std::string& v, int l) { cfg.x0 = state_list(v, l); }},
      {"sim.x0_shells",
       [&](const std::string& v, int l) {
         cfg.x0_shells.clear();
         for (const auto& t : tokens(v)) {
           const long long j = to_int(t, l);
           if (j < 1) throw ConfigError("shell indices must be at least 1", l);
           cfg.x0_shells.push_back(static_cast<int>(j));
         }
       }},
      {"tol.geom_eps", [&](const std::string& v, int l) { cfg.tol.geom_eps = scalar(v, l); }},
      {"sweep.alphas", [&](const std::string& v, int l) { cfg.alphas = alpha_list(v, l); }},
  };

  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "'", line);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line);
    it->second(value, line);
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void validate_config(const Config& cfg) {
  try {
    cfg.model.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  if (cfg.model.state_dim() != 2) throw ConfigError("only two-state models are supported");
  if (!(cfg.true_bound >= 0.0)) throw ConfigError("dist.true_bound must be non-negative");
  if (!(cfg.controller_bound > 0.0)) throw ConfigError("dist.controller_bound must be positive");
  if (cfg.true_bound > cfg.controller_bound) {
    throw ConfigError("true disturbance set is not contained in D_c (dist.true_bound > dist.controller_bound)");
  }
  if (!(cfg.alpha >= 1.0)) throw ConfigError("dist.alpha must be at least 1 so that D_c is inside D_e");
  if (!(cfg.u_max > 0.0)) throw ConfigError("controller.u_max must be positive");
  if (!(cfg.alpha_max > 0.0 && cfg.alpha_max < 1.0)) throw ConfigError("controller.alpha_max must lie in (0, 1)");
  if (!(cfg.tol.geom_eps > 0.0)) throw ConfigError("tol.geom_eps must be positive");
  if (cfg.alphas.empty()) throw ConfigError("sweep.alphas is empty");
  for (double a : cfg.alphas) {
    if (!(a > 1.0)) throw ConfigError("sweep.alphas entries must exceed 1");
  }
  for (int j : cfg.x0_shells) {
    if (j > cfg.N) throw ConfigError("sim.x0_shells entry " + std::to_string(j) + " exceeds controller.N");
  }
  if (cfg.x0.empty() && cfg.x0_shells.empty()) throw ConfigError("no initial states configured");
}

Polytope true_disturbance(const Config& cfg) {
  return Polytope::symmetric_box(Vector::Constant(cfg.model.state_dim(), cfg.true_bound));
}

UncertainModel controller_model(const Config& cfg) {
  return {cfg.model, Polytope::symmetric_box(Vector::Constant(cfg.model.state_dim(), cfg.controller_bound))};
}

UncertainModel eavesdropper_model(const Config& cfg, double alpha) {
  const auto mc = controller_model(cfg);
  return {cfg.model, scale(mc.disturbance, alpha)};
}

TerminalGain terminal_gain(const Config& cfg) { return TerminalGain{cfg.K}; }

ControllableFamily build_family(const Config& cfg) {
  return build_family(controller_model(cfg), terminal_gain(cfg), cfg.u_max, cfg.N, cfg.alpha_max, cfg.tol);
}

}  // namespace smtpcps
