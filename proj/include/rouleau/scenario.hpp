#ifndef ROULEAU_SCENARIO_HPP
#define ROULEAU_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rouleau/kernels.hpp"
#include "rouleau/measure.hpp"

namespace rouleau {

struct StochasticSpec {
  bool enabled = false;
  int runs = 16;
  long particles = 20000;
  std::uint64_t seed = 1;
  // gelling runs: fractions of T*; otherwise physical times
  std::vector<double> checkpoints{0.1, 0.2, 0.3, 0.4, 0.5};
};

struct Scenario {
  std::string name;
  AlphaWeights alpha;
  DiscreteMeasure f0;
  double R = 256.0;
  double rtol = 1e-9;
  double atol = 1e-14;
  int checkpoint_count = 40;  // uniform in tau
  double tau_max = 3.0;
  double t_end = 10.0;        // horizon when nothing gels
  double rho_max = 10.0;
  int n_rho = 64;
  StochasticSpec stochastic;
  std::string output_dir;
  bool write_checkpoints = false;
  nlohmann::ordered_json raw;  // normalized configuration, input to the hash

  std::string hash() const;  // 16 hex digits
};

// Field-path validation messages, e.g. "initial.points[0].a: must be >= 2 (got 1)".
Scenario scenario_from_json(const nlohmann::ordered_json& cfg);
Scenario load_scenario(const std::string& path);

// overrides from the command line, reflected in raw and hence in the hash
void override_tau_max(Scenario& s, double tau_max);
void override_truncation(Scenario& s, double R);

}  // namespace rouleau

#endif
