#ifndef ROULEAU_LATTICE_HPP
#define ROULEAU_LATTICE_HPP

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "rouleau/errors.hpp"
#include "rouleau/kernels.hpp"
#include "rouleau/measure.hpp"
#include "rouleau/moments.hpp"

namespace rouleau {

// Dense weights on c in [2, 2+nc), a in [2, 2+na); row-major in c.
struct LatticeDensity {
  int nc = 0, na = 0;
  std::vector<double> w;

  LatticeDensity() = default;
  LatticeDensity(int nc_, int na_) : nc(nc_), na(na_), w(std::size_t(nc_) * na_, 0.0) {}

  double& at(int i, int j) { return w[std::size_t(i) * na + j]; }
  double at(int i, int j) const { return w[std::size_t(i) * na + j]; }

  static LatticeDensity from_measure(const DiscreteMeasure& f);
  DiscreteMeasure to_measure() const;
  MomentSet moments(int order_max = 4) const;
  double total() const;
  std::pair<int, int> support_box() const;  // smallest (bc, ba) holding every nonzero
  void resize(int nc_new, int na_new);      // keeps overlapping entries
};

struct StepStats {
  long steps = 0;
  long rejected = 0;
  long positivity_rejects = 0;
  long clipped = 0;
  double clipped_mass = 0.0;
  double dropped_mass = 0.0;
  long monotonicity_violations = 0;
  double last_dt = 0.0;
  double next_dt = 0.0;
};

struct SolverState {
  double t = 0.0;
  LatticeDensity field;
  MomentSet leaked;  // orders 0..2 of everything routed past the cutoff
  StepStats stats;

  DiscreteMeasure measure() const { return field.to_measure(); }
};

// Gain/loss evaluation of the truncated lattice equation. The gain is a sum of
// three shifted 2-D convolutions, done with real FFTs.
class LatticeOperator {
 public:
  LatticeOperator(const AlphaWeights& alpha, double R);
  ~LatticeOperator();
  LatticeOperator(const LatticeOperator&) = delete;
  LatticeOperator& operator=(const LatticeOperator&) = delete;

  const AlphaWeights& alpha() const { return alpha_; }
  double R() const { return R_; }
  int max_index() const { return nmax_; }  // entries per axis inside [2, 2R]

  // Extents of the output grid reached from an input box, capped at the cutoff.
  std::pair<int, int> reach(int bc, int ba) const;

  // gain on the nc x na grid of `out` from the entries of f inside [0,bc) x [0,ba).
  // Moments of the gain landing past the cutoff go to *leak (orders 0..2).
  void gain(const LatticeDensity& f, int bc, int ba, LatticeDensity& out, MomentSet* leak);

  // sum over every target (inside and past the cutoff) of phi(target) * gain(target)
  double gain_functional(const LatticeDensity& f, const std::function<double(int, int)>& phi);

  // K * (first moment of f): the loss rate at v is v . loss_vector(f)
  Vec2 loss_vector(const LatticeDensity& f) const;

 private:
  struct Fft;
  void convolve(const LatticeDensity& f, int bc, int ba);
  AlphaWeights alpha_;
  double R_;
  int nmax_;
  Mat2 K_;
  std::unique_ptr<Fft> fft_;
};

// gain minus loss on the support grid (signed), FFT roundoff below
// 64 eps * (total gain rate) is suppressed; gain past the cutoff goes to *leak
SignedMap coagulation_rhs(const DiscreteMeasure& f, const AlphaWeights& alpha, double R, MomentSet* leak = nullptr);

struct LatticeOptions {
  double rtol = 1e-9;
  double atol = 1e-14;
  double drop_rel = 1e-16;
  double T_est = std::numeric_limits<double>::infinity();  // sets dt_min = 1e-12 T_est
  double dt_min = 0.0;                                     // explicit override
  double dt_init = 0.0;
};

struct StepUnderflow : NumericalError {
  using NumericalError::NumericalError;
};

// Integrating-factor Dormand-Prince 5(4): the loss rate frozen at the step start is
// integrated exactly, which removes the stiffness from large clusters.
class LatticeSolver {
 public:
  LatticeSolver(const AlphaWeights& alpha, double R, const LatticeOptions& opt = {});

  SolverState init(const DiscreteMeasure& f0) const;
  void step(SolverState& s, double dt_max);
  void advance_to(SolverState& s, double t_target);
  LatticeOperator& op() { return op_; }
  const LatticeOptions& options() const { return opt_; }

 private:
  AlphaWeights alpha_;
  double R_;
  LatticeOptions opt_;
  LatticeOperator op_;
};

void write_checkpoint(std::ostream& os, const SolverState& s);

// 1/2 sum_i alpha_i sum_{z,z'} K_i(z,z') Delta_i phi(z,z') f(z) f(z')
double weak_form_integrand(const DiscreteMeasure& f, const AlphaWeights& alpha,
                           const std::function<double(const Composition&)>& phi);

struct TrajectoryPoint {
  double t;
  DiscreteMeasure f;
};

// |<phi,f(t)> - <phi,f0> - int_0^t (weak integrand) ds|, composite Simpson in time.
double weak_form_residual(const std::vector<TrajectoryPoint>& traj, const AlphaWeights& alpha,
                          const std::function<double(const Composition&)>& phi, double t);

// (J1, J2) through the shell |z| = R_flux, |.| the 1-norm
std::pair<double, double> mass_flux(const DiscreteMeasure& f, const AlphaWeights& alpha, double R_flux);

}  // namespace rouleau

#endif
