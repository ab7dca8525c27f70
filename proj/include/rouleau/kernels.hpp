#ifndef ROULEAU_KERNELS_HPP
#define ROULEAU_KERNELS_HPP

#include <array>
#include <compare>
#include <Eigen/Dense>

namespace rouleau {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Cluster with c faces and a arms, c,a >= 2.
struct Composition {
  int c = 2;
  int a = 2;

  long size() const { return long(a) + 2L * c - 3; }
  Vec2 vec() const { return Vec2(c, a); }
  auto operator<=>(const Composition&) const = default;
};

// Throws std::invalid_argument if c < 2 or a < 2.
Composition make_composition(int c, int a);
bool in_state_space(const Composition& z);

struct AlphaWeights {
  std::array<double, 3> v{0.0, 0.0, 0.0};

  AlphaWeights() = default;
  AlphaWeights(double a1, double a2, double a3);
  double operator[](int i) const { return v[i - 1]; }  // channel 1..3
};

Eigen::Vector2i reaction_offset(int i);
int zeta(int i);  // -(xi_1 + xi_2)
const Mat2& kernel_matrix(int i);

double kernel_eval(int i, const Vec2& z, const Vec2& zp);
double kernel_eval(int i, const Composition& z, const Composition& zp);
Mat2 combined_kernel(const AlphaWeights& alpha);

Composition apply_reaction(int i, const Composition& z, const Composition& zp);

// Cutoff profile in the max-norm. Equal to 1 up to 2R and zero from 2R+1 on,
// cubic in between, so on the integer lattice it is a sharp cutoff at 2R.
double cutoff_ramp(double s, double R);
double truncated_kernel_eval(int i, double R, const Vec2& z, const Vec2& zp);
double truncated_kernel_eval(int i, double R, const Composition& z, const Composition& zp);

}  // namespace rouleau

#endif
