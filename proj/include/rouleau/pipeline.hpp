#ifndef ROULEAU_PIPELINE_HPP
#define ROULEAU_PIPELINE_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rouleau/lattice.hpp"
#include "rouleau/moments.hpp"
#include "rouleau/scenario.hpp"
#include "rouleau/selfsim.hpp"

namespace rouleau {

struct MomentAnalysis {
  MomentSet f0;
  GelationReport report;
  MomentTrajectory traj;
};

// classification, T*, theta, c0, K0 and the moment trajectory (to t_end when nothing gels)
MomentAnalysis analyze_moments(const DiscreteMeasure& f0, const AlphaWeights& alpha, double t_end_nogel = 10.0);

struct TauRunOptions {
  double R = 256.0;
  LatticeOptions lattice;
  double tau_max = 3.0;
  int count = 40;            // snapshots at tau = k tau_max / count
  double leak_frac = 0.005;  // stop once leaked M^2 passes this share of the retained M^2
};

struct TauRun {
  std::vector<ScaledSnapshot> snaps;
  std::vector<MomentSet> moments;  // unscaled, orders 0..2, at each snapshot
  std::vector<MomentSet> leaked;
  std::string stop_reason;  // tau_max | leakage | step_underflow
  double tau_reached = 0.0;
  StepStats stats;
  int grid_c = 0, grid_a = 0;
};

// Lattice run sampled uniformly in tau; on_state sees the state at every kept snapshot.
TauRun run_lattice_tau(const AlphaWeights& alpha, const DiscreteMeasure& f0, double T_star, const TauRunOptions& opt,
                       const std::function<void(const SolverState&)>& on_state = {});

// Checkpoints where the lattice still tracks the untruncated equation: scaled M^2
// within tol (relative) of the moment ODE at every checkpoint up to tau.
struct ResolvedRange {
  double tau = 0.0;
  std::vector<double> dev;  // per snapshot
};
ResolvedRange resolved_range(const TauRun& run, const DiscreteMeasure& f0, const AlphaWeights& alpha, double T_star,
                             double tol = 1e-6);

struct TimeRun {
  std::vector<double> t;
  std::vector<MomentSet> moments, leaked;
  StepStats stats;
  std::string stop_reason;
};

TimeRun run_lattice_times(const AlphaWeights& alpha, const DiscreteMeasure& f0, double R, const LatticeOptions& opt,
                          const std::vector<double>& times,
                          const std::function<void(const SolverState&)>& on_state = {});

struct RunOptions {
  int threads = 1;
  bool deterministic = true;  // false: ensemble seeds from the OS instead of the scenario
};

// Writes gelation_report.json, moments.csv, selfsim.csv, laplace.csv, laplace.json,
// support.csv and (when enabled) ensemble.csv into the scenario's output directory.
void run_scenario(const Scenario& s, const RunOptions& ro, std::ostream& log);

// Summary of an output directory; throws ConfigError when it holds no report.
void report(const std::string& dir, std::ostream& os);

}  // namespace rouleau

#endif
