#pragma once

#include "smtpcps/controller.hpp"
#include "smtpcps/protocol.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace smtpcps {

/// Either an explicit bit string or `random:<len>`. A random message with no length uses the
/// episode length.
struct MessageSpec {
  bool random = true;
  std::size_t length = 0;  ///< 0 means "sim.steps"
  Bits bits;

  Bits materialize(std::size_t steps, Rng& rng) const;
  std::string describe() const;
};

/// Run configuration. Every field defaults to the reference instance.
struct Config {
  LinearModel model = default_model();
  double true_bound = 0.1;
  double controller_bound = 0.12;
  double alpha = 4.0;

  Eigen::RowVectorXd K = default_gain();
  int N = 250;
  double u_max = 6.0;
  double alpha_max = 0.05;
  CostAssignment costs;

  int steps = 50;
  int reps = 20;
  std::uint64_t base_seed = 1;
  MessageSpec message;
  std::vector<Vector> x0;                    ///< explicit initial states; empty means shell construction
  std::vector<int> x0_shells{200, 100, 50};  ///< family indices whose outer shells seed the initial states

  Tolerance tol;
  std::vector<double> alphas = default_alphas();

  static LinearModel default_model();
  static Eigen::RowVectorXd default_gain();
  static std::vector<double> default_alphas();
};

/// `key = value` lines, `#` comments, blank lines ignored. Lists are whitespace or comma separated;
/// sweep.alphas also accepts `start:step:stop`. Throws ConfigError with the offending line.
Config parse_config(std::istream& is);
Config load_config(const std::string& path);

/// Cross-field checks (D subset of D_c, positive sizes, ...). Throws ConfigError.
void validate_config(const Config& cfg);

/// `start:step:stop` inclusive of stop up to rounding.
std::vector<double> expand_range(double start, double step, double stop);

Polytope true_disturbance(const Config& cfg);
UncertainModel controller_model(const Config& cfg);
UncertainModel eavesdropper_model(const Config& cfg, double alpha);
TerminalGain terminal_gain(const Config& cfg);

ControllableFamily build_family(const Config& cfg);

}  // namespace smtpcps
