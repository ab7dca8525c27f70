#ifndef ROULEAU_LAPLACE_HPP
#define ROULEAU_LAPLACE_HPP

#include <vector>

#include "rouleau/kernels.hpp"
#include "rouleau/measure.hpp"
#include "rouleau/selfsim.hpp"

namespace rouleau {

// ghat(rho) = int r (1 - e^{-r rho}) g(dr) and its rho-derivative
double radial_laplace(const RadialMeasure& g, double rho);
double radial_laplace_drho(const RadialMeasure& g, double rho);

double selfsim_target(double rho, double K0);  // (1 + 2 K0 rho)^(-1/2)
double fs_profile(double r, double K0);
double ginf_density(double r, double K0);

// reference pair Q0(rho) = K0 rho^2/2 + rho and its inverse
double q0(double rho, double K0);
double q0_inverse(double q, double K0);

// n points on [0, rho_max], clustered towards 0
std::vector<double> rho_grid(double rho_max, int n = 64);

// sup over the grid of |d ghat/d rho - target|
double convergence_gap(const RadialMeasure& g, double K0, const std::vector<double>& rho);

// int_0^inf r^2 F_s(r) e^{-r rho} dr by double-exponential quadrature
double profile_laplace_quadrature(double rho, double K0);

struct RemainderResult {
  std::vector<double> rho;
  std::vector<double> R;         // remainder on the grid
  std::vector<double> identity;  // d_tau ghat - ghat - (ghat - 2 rho) d_rho ghat - R
  double max_R_over_rho = 0.0;   // over rho > 0
};

// Remainder of the Burgers equation for ghat at snapshot k. theta is rescaled
// internally so that theta^T K theta = 1.
RemainderResult burgers_remainder(const std::vector<ScaledSnapshot>& traj, std::size_t k,
                                  const AlphaWeights& alpha, const Vec2& theta, const std::vector<double>& rho);

// vector transform int z (1 - e^{-z.zeta}) f(dz)
Vec2 vector_laplace(const DiscreteMeasure& f, const Vec2& zeta);

struct CharacteristicPoint {
  Vec2 zeta = Vec2::Zero();
  Vec2 fhat = Vec2::Zero();
  Vec2 zeta0 = Vec2::Zero();  // foot of the characteristic at t = 0
  bool ok = false;
  int iterations = 0;
};

// f-hat(t_end, zeta) along characteristics Z' = sign * b, F' = c, shooting on
// the foot point. Points whose characteristic leaves the positive quadrant
// come back with ok = false.
std::vector<CharacteristicPoint> laplace_characteristics(const DiscreteMeasure& f0, const AlphaWeights& alpha,
                                                         const std::vector<Vec2>& zetas, double t_end,
                                                         int sign = -1);

struct SignResolution {
  int sign = 0;
  double err_minus = 0.0, err_plus = 0.0;
};

// picks the sign of the characteristic speed that matches one short lattice step
SignResolution resolve_characteristic_sign(const DiscreteMeasure& f0, const AlphaWeights& alpha, double h,
                                           const Vec2& zeta);

}  // namespace rouleau

#endif
