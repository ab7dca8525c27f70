#include <cmath>
#include <random>

#include "doctest.h"
#include "rouleau/pipeline.hpp"
#include "rouleau/selfsim.hpp"

using namespace rouleau;

namespace {

DiscreteMeasure sample_measure() {
  DiscreteMeasure f;
  f.add({2, 2}, 0.7);
  f.add({5, 3}, 0.2);
  f.add({3, 8}, 0.05);
  f.add({11, 6}, 0.01);
  return f;
}

// lattice snapshots of the reference problem on a uniform tau grid
std::vector<ScaledSnapshot> reference_snaps(double tau_max, int count, Vec2* theta = nullptr) {
  MomentAnalysis ma = analyze_moments(DiscreteMeasure::delta(2, 2), AlphaWeights(1, 1, 1));
  if (theta) *theta = ma.report.theta;
  TauRunOptions o;
  o.R = 128;
  o.tau_max = tau_max;
  o.count = count;
  return run_lattice_tau(AlphaWeights(1, 1, 1), DiscreteMeasure::delta(2, 2), ma.report.T_star, o).snaps;
}

}  // namespace

TEST_SUITE("selfsim") {

TEST_CASE("moments scale with (T*-t)^(2k-3)") {
  DiscreteMeasure f = sample_measure();
  MomentSet m = extract_moments(f);
  for (double t : {0.0, 0.3, 0.77}) {
    const double T = 0.9, s = T - t;
    ScaledSnapshot F = rescale(f, t, T);
    CHECK(F.m.m0 == doctest::Approx(m.m0 * std::pow(s, -3)).epsilon(1e-13));
    CHECK((F.m.m1 - m.m1 * std::pow(s, -1)).norm() <= 1e-13 * F.m.m1.norm());
    CHECK((F.m.m2 - m.m2 * s).norm() <= 1e-13 * F.m.m2.norm());
    CHECK((F.m.m3 - m.m3 * std::pow(s, 3)).norm() <= 1e-13 * F.m.m3.norm());
    CHECK((F.m.m4 - m.m4 * std::pow(s, 5)).norm() <= 1e-13 * F.m.m4.norm());
    CHECK(F.tau == doctest::Approx(-std::log(1 - t / T)));
    CHECK(F.Z == doctest::Approx(F.m.m2.sum()));
  }
}

TEST_CASE("unit factors at t = 0 and T* = 1") {
  DiscreteMeasure f = sample_measure();
  ScaledSnapshot F = rescale(f, 0.0, 1.0);
  MomentSet m = extract_moments(f);
  CHECK(F.m.m0 == doctest::Approx(m.m0));
  CHECK((F.m.m1 - m.m1).norm() < 1e-14);
  double tot = 0.0;
  for (const auto& q : F.shells) tot += q.w;
  CHECK(tot == doctest::Approx(m.m0));
  ScaledSnapshot H = rescale(f, 0.5, 1.0);
  CHECK(H.tau == doctest::Approx(std::log(2.0)));
  CHECK((H.m.m2 - 0.5 * m.m2).norm() < 1e-13);
  CHECK_THROWS(rescale(f, 1.0, 1.0));
}

TEST_CASE("lattice and point rescaling agree") {
  DiscreteMeasure f = sample_measure();
  ScaledSnapshot a = rescale(f, 0.2, 1.0), b = rescale(LatticeDensity::from_measure(f), 0.2, 1.0);
  CHECK((a.m.m3 - b.m.m3).norm() <= 1e-13 * a.m.m3.norm());
  CHECK(a.shells.size() == b.shells.size());
}

TEST_CASE("localization integral") {
  Vec2 theta(2, 1);
  ScaledSnapshot ray = ScaledSnapshot::from_points({{theta * 0.5, 1.0}, {theta * 3.0, 0.2}});
  CHECK(localization_integral(ray, theta, 2) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(localization_integral(ray, theta, 3) < 1e-13);
  ScaledSnapshot one = ScaledSnapshot::from_points({{Vec2(1, 0), 1.0}});
  CHECK(localization_integral(one, Vec2(1, 1), 2) == doctest::Approx(0.5));
  CHECK_THROWS(localization_integral(one, Vec2(1, 1), 4));
}

TEST_CASE("localization integral p = 2 as a moment identity") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<Vec2, double>> pts;
    for (int k = 0; k < 5; ++k) pts.push_back({Vec2(u(rng), u(rng)), u(rng)});
    ScaledSnapshot F = ScaledSnapshot::from_points(pts);
    Vec2 th(u(rng), u(rng));
    const Mat2& M = F.m.m2;
    const double n1 = th.sum(), n2 = th.squaredNorm();
    double ref = M.trace() + n2 / (n1 * n1) * M.sum() - 2.0 / n1 * (M * th).sum();
    CHECK(localization_integral(F, th, 2) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("polar projection") {
  const double w = 0.3;
  ScaledSnapshot F = ScaledSnapshot::from_points({{Vec2(3, 1), w}});
  PolarProjection P = polar_project(F);
  CHECK(P.Z == doctest::Approx(16 * w));
  REQUIRE(P.g.r.size() == 1);
  CHECK(P.g.r[0] == 4.0);
  CHECK(P.g.w[0] == doctest::Approx(1.0 / 16));
  CHECK(P.g.moment(2) == doctest::Approx(1.0));
  ScaledSnapshot G = rescale(sample_measure(), 0.4, 1.0);
  PolarProjection Q = polar_project(G);
  CHECK(Q.g.moment(2) == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t j = 0; j < Q.G.size(); ++j) CHECK(Q.G[j].w / Q.Z == doctest::Approx(Q.g.w[j]));
}

TEST_CASE("radius shifts") {
  for (double tau : {0.0, 0.5, 2.0}) {
    CHECK(shift_delta(1, tau, 1.0) == doctest::Approx(std::exp(-2 * tau)));
    CHECK(shift_delta(2, tau, 1.0) == doctest::Approx(2 * std::exp(-2 * tau)));
    CHECK(shift_delta(3, tau, 1.0) == doctest::Approx(2 * std::exp(-2 * tau)));
    // the radius of z is |z| (T*-t)^2 = |z| T*^2 e^{-2 tau}
    CHECK(shift_delta(2, tau, 0.3) == doctest::Approx(2 * 0.09 * std::exp(-2 * tau)));
  }
}

TEST_CASE("finite differences are exact for quartics") {
  std::vector<double> x{0, 0.1, 0.25, 0.3, 0.55, 0.7, 1.0};
  auto f = [](double t) { return 1 - 2 * t + 3 * t * t - t * t * t + 0.5 * t * t * t * t; };
  auto df = [](double t) { return -2 + 6 * t - 3 * t * t + 2 * t * t * t; };
  std::vector<double> y;
  for (double t : x) y.push_back(f(t));
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(finite_difference(x, y, k) == doctest::Approx(df(x[k])).epsilon(1e-10));
}

TEST_CASE("decay fit") {
  std::vector<double> t, y;
  for (int k = 0; k <= 20; ++k) {
    t.push_back(0.1 * k);
    y.push_back(3.0 * std::exp(-0.8 * t.back()));
  }
  CHECK(fit_decay_exponent(t, y, 0.5, 2.0) == doctest::Approx(0.8));
  CHECK_THROWS(fit_decay_exponent(t, y, 5.0, 6.0));
}

TEST_CASE("diagnostics row") {
  ScaledSnapshot F = rescale(sample_measure(), 0.3, 1.0);
  Vec2 th(0.6, 0.7);
  SelfsimRow r = selfsim_diagnostics(F, th, 0.05);
  CHECK(r.Z == F.Z);
  CHECK(r.loc_p2 == localization_integral(F, th, 2));
  CHECK(r.m2_dev == doctest::Approx((F.m.m2 - th * th.transpose()).norm()));
}

TEST_CASE("projected equation residual shrinks under refinement") {
  Vec2 theta;
  auto coarse = reference_snaps(0.8, 8, &theta);
  auto fine = reference_snaps(0.8, 16);
  const std::vector<double> rho{0.25, 0.5, 1.0, 2.0};
  // tau = 0.4 is index 4 on the coarse grid and 8 on the fine one
  double rc = projected_equation_residual(coarse, 4, AlphaWeights(1, 1, 1), theta, rho).max_residual;
  double rf = projected_equation_residual(fine, 8, AlphaWeights(1, 1, 1), theta, rho).max_residual;
  MESSAGE("projected residual coarse " << rc << " fine " << rf);
  CHECK(rf < rc);
  CHECK(std::log2(rc / rf) >= 1.0);
  std::vector<ScaledSnapshot> zero(3);
  for (int k = 0; k < 3; ++k) zero[k].tau = 0.1 * k;
  CHECK(projected_equation_residual(zero, 1, AlphaWeights(1, 1, 1), theta, rho).max_residual == 0.0);
}

}
