#include <random>

#include "doctest.h"
#include "rouleau/kernels.hpp"

using namespace rouleau;

TEST_SUITE("kernels") {

TEST_CASE("reaction offsets and shift sizes") {
  CHECK(reaction_offset(1) == Eigen::Vector2i(-2, 1));
  CHECK(reaction_offset(2) == Eigen::Vector2i(-1, -1));
  CHECK(reaction_offset(3) == Eigen::Vector2i(0, -2));
  CHECK(zeta(1) == 1);
  CHECK(zeta(2) == 2);
  CHECK(zeta(3) == 2);
  CHECK_THROWS(reaction_offset(0));
  CHECK_THROWS(reaction_offset(4));
}

TEST_CASE("kernel values") {
  Composition z{3, 2}, zp{4, 5};
  CHECK(kernel_eval(1, z, zp) == doctest::Approx(12));
  CHECK(kernel_eval(2, z, zp) == doctest::Approx(11.5));
  CHECK(kernel_eval(3, z, zp) == doctest::Approx(10));
  for (int i = 1; i <= 3; ++i) CHECK(kernel_eval(i, Vec2(0, 0), Vec2(7, 3)) == 0.0);
}

TEST_CASE("kernel matches its matrix and is symmetric") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 50);
  for (int k = 0; k < 200; ++k) {
    Vec2 z(u(rng), u(rng)), zp(u(rng), u(rng));
    for (int i = 1; i <= 3; ++i) {
      CHECK(kernel_eval(i, z, zp) == doctest::Approx(z.dot(kernel_matrix(i) * zp)));
      CHECK(kernel_eval(i, z, zp) == doctest::Approx(kernel_eval(i, zp, z)));
    }
  }
}

TEST_CASE("combined kernel") {
  Mat2 k = combined_kernel(AlphaWeights(1, 1, 1));
  CHECK(k(0, 0) == 1.0);
  CHECK(k(0, 1) == 0.5);
  CHECK(k(1, 0) == 0.5);
  CHECK(k(1, 1) == 1.0);
  CHECK(combined_kernel(AlphaWeights(0, 0, 1)) == kernel_matrix(3));
  Mat2 k2 = combined_kernel(AlphaWeights(2, 0, 0));
  CHECK(k2(0, 0) == 2.0);
  CHECK(k2.cwiseAbs().sum() == 2.0);
  CHECK_THROWS(AlphaWeights(0, 0, 0));
  CHECK_THROWS(AlphaWeights(-1, 1, 0));
}

TEST_CASE("reaction rules") {
  CHECK(apply_reaction(1, {2, 2}, {2, 2}) == Composition{2, 5});
  CHECK(apply_reaction(2, {3, 2}, {2, 3}) == Composition{4, 4});
  CHECK(apply_reaction(3, {2, 2}, {2, 2}) == Composition{4, 2});
}

TEST_CASE("products stay in the state space; size adds up, plus one under R3") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> u(2, 40);
  for (int k = 0; k < 500; ++k) {
    Composition z{u(rng), u(rng)}, zp{u(rng), u(rng)};
    for (int i = 1; i <= 3; ++i) {
      Composition p = apply_reaction(i, z, zp);
      CHECK(in_state_space(p));
      CHECK(p.size() == z.size() + zp.size() + (i == 3 ? 1 : 0));
    }
  }
}

TEST_CASE("compositions below (2,2) are rejected") {
  CHECK_THROWS(make_composition(1, 2));
  CHECK_THROWS(make_composition(2, 1));
  CHECK(make_composition(2, 2) == Composition{2, 2});
  CHECK_FALSE(in_state_space(Composition{1, 5}));
}

TEST_CASE("truncated kernel") {
  CHECK(truncated_kernel_eval(1, 100, Composition{3, 2}, Composition{4, 5}) == doctest::Approx(12));
  CHECK(truncated_kernel_eval(1, 1, Composition{300, 2}, Composition{4, 5}) == 0.0);
  double v = truncated_kernel_eval(3, 10, Composition{2, 12}, Composition{2, 12});
  CHECK(144 - v >= 0.0);
  CHECK(144 - v <= std::exp(-10.0));
}

TEST_CASE("cutoff ramp") {
  const double R = 5.0;
  CHECK(cutoff_ramp(0.0, R) == 1.0);
  CHECK(cutoff_ramp(10.0, R) == 1.0);
  CHECK(cutoff_ramp(11.0, R) == 0.0);
  CHECK(cutoff_ramp(50.0, R) == 0.0);
  double prev = 1.0;
  for (double s = 10.0; s <= 11.0; s += 0.01) {
    double c = cutoff_ramp(s, R);
    CHECK(c <= prev + 1e-15);
    CHECK(c >= 0.0);
    prev = c;
  }
  // flat at both ends
  CHECK((1.0 - cutoff_ramp(10.0 + 1e-4, R)) < 1e-7);
  CHECK(cutoff_ramp(11.0 - 1e-4, R) < 1e-7);
  // lattice points are either inside or outside
  for (int s = 0; s < 40; ++s) {
    double c = cutoff_ramp(s, R);
    CHECK((c == 0.0 || c == 1.0));
  }
  CHECK_THROWS(cutoff_ramp(1.0, 0.0));
}

}
