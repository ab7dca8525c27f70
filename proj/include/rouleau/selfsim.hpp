#ifndef ROULEAU_SELFSIM_HPP
#define ROULEAU_SELFSIM_HPP

#include <utility>
#include <vector>

#include "rouleau/kernels.hpp"
#include "rouleau/lattice.hpp"
#include "rouleau/measure.hpp"
#include "rouleau/moments.hpp"

namespace rouleau {

// Points of F(tau) grouped by 1-norm radius; every diagnostic here depends on
// a point only through r, w and w*eta, w*|eta|^2, so the grouping is exact.
struct ShellPoint {
  double r = 0.0;
  double w = 0.0;
  Vec2 weta = Vec2::Zero();
  double weta2 = 0.0;  // w * ||eta||^2 (Euclidean)
};

struct ScaledSnapshot {
  double tau = 0.0;
  double t = 0.0;
  double T_star = 1.0;
  double scale = 1.0;  // (T*-t)^2, the factor taking z to eta
  std::vector<ShellPoint> shells;  // increasing r
  MomentSet m;                     // moments of F up to order 4
  double Z = 0.0;                  // sum_jk M^2_jk(F)

  // F given directly as weighted points in eta
  static ScaledSnapshot from_points(const std::vector<std::pair<Vec2, double>>& pts, double tau = 0.0,
                                    double T_star = 1.0);
};

ScaledSnapshot rescale(const DiscreteMeasure& f, double t, double T_star);
ScaledSnapshot rescale(const LatticeDensity& f, double t, double T_star);

// sum w |eta|^p || eta/|eta| - theta/|theta| ||^2
double localization_integral(const ScaledSnapshot& F, const Vec2& theta, int p);

struct RadialMeasure {
  std::vector<double> r, w;
  double moment(int k) const;
};

struct PolarProjection {
  RadialMeasure g;              // r = |eta|, weight w/Z
  std::vector<ShellPoint> G;    // same shells, unnormalized
  double Z = 0.0;
};

PolarProjection polar_project(const ScaledSnapshot& F);

// shift of the radius under channel i in self-similar variables
double shift_delta(int i, double tau, double T_star);

// derivative at index k of samples y(x) from the nearest five nodes (fewer if short)
double finite_difference(const std::vector<double>& x, const std::vector<double>& y, std::size_t k);

struct ProjectedResidual {
  std::vector<double> rho, lhs, rhs;
  double max_residual = 0.0;
};

// both sides of the projected radial weak equation at snapshot k, test
// functions 1 - exp(-r rho_j)
ProjectedResidual projected_equation_residual(const std::vector<ScaledSnapshot>& traj, std::size_t k,
                                              const AlphaWeights& alpha, const Vec2& theta,
                                              const std::vector<double>& rho);

struct SelfsimRow {
  double tau, Z, m2_dev, m3_dev, m4_norm, loc_p2, loc_p3;
};

SelfsimRow selfsim_diagnostics(const ScaledSnapshot& F, const Vec2& theta, double c0);

// kappa in y ~ C exp(-kappa tau), least squares on log y over [lo, hi]
double fit_decay_exponent(const std::vector<double>& tau, const std::vector<double>& y, double lo, double hi);

}  // namespace rouleau

#endif
