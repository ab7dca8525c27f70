#include "rouleau/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rouleau {

namespace {

void check_channel(int i) {
  if (i < 1 || i > 3) throw std::invalid_argument("channel index must be 1, 2 or 3, got " + std::to_string(i));
}

const std::array<Mat2, 3>& matrices() {
  static const std::array<Mat2, 3> k = [] {
    std::array<Mat2, 3> m;
    m[0] << 1.0, 0.0, 0.0, 0.0;
    m[1] << 0.0, 0.5, 0.5, 0.0;
    m[2] << 0.0, 0.0, 0.0, 1.0;
    return m;
  }();
  return k;
}

}  // namespace

Composition make_composition(int c, int a) {
  if (c < 2 || a < 2)
    throw std::invalid_argument("composition (" + std::to_string(c) + "," + std::to_string(a) + ") outside c,a >= 2");
  return Composition{c, a};
}

bool in_state_space(const Composition& z) { return z.c >= 2 && z.a >= 2; }

AlphaWeights::AlphaWeights(double a1, double a2, double a3) : v{a1, a2, a3} {
  for (double x : v)
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("alpha weights must be finite and nonnegative");
  if (a1 == 0.0 && a2 == 0.0 && a3 == 0.0) throw std::invalid_argument("alpha weights must not all vanish");
}

Eigen::Vector2i reaction_offset(int i) {
  check_channel(i);
  static const Eigen::Vector2i xi[3] = {Eigen::Vector2i(-2, 1), Eigen::Vector2i(-1, -1), Eigen::Vector2i(0, -2)};
  return xi[i - 1];
}

int zeta(int i) {
  auto x = reaction_offset(i);
  return -(x(0) + x(1));
}

const Mat2& kernel_matrix(int i) {
  check_channel(i);
  return matrices()[i - 1];
}

double kernel_eval(int i, const Vec2& z, const Vec2& zp) {
  check_channel(i);
  switch (i) {
    case 1: return z(0) * zp(0);
    case 2: return 0.5 * (z(0) * zp(1) + zp(0) * z(1));
    default: return z(1) * zp(1);
  }
}

double kernel_eval(int i, const Composition& z, const Composition& zp) { return kernel_eval(i, z.vec(), zp.vec()); }

Mat2 combined_kernel(const AlphaWeights& alpha) {
  Mat2 k = Mat2::Zero();
  for (int i = 1; i <= 3; ++i) k += alpha[i] * kernel_matrix(i);
  return k;
}

Composition apply_reaction(int i, const Composition& z, const Composition& zp) {
  auto x = reaction_offset(i);
  return Composition{z.c + zp.c + x(0), z.a + zp.a + x(1)};
}

double cutoff_ramp(double s, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("truncation radius must be positive");
  double u = s - 2.0 * R;
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  return 1.0 - u * u * (3.0 - 2.0 * u);
}

double truncated_kernel_eval(int i, double R, const Vec2& z, const Vec2& zp) {
  double chi = cutoff_ramp(z.cwiseAbs().maxCoeff(), R) * cutoff_ramp(zp.cwiseAbs().maxCoeff(), R);
  if (chi == 0.0) return 0.0;
  return chi * kernel_eval(i, z, zp);
}

double truncated_kernel_eval(int i, double R, const Composition& z, const Composition& zp) {
  return truncated_kernel_eval(i, R, z.vec(), zp.vec());
}

}  // namespace rouleau
