#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "rouleau/moments.hpp"
#include "rouleau/stochastic.hpp"

using namespace rouleau;

TEST_SUITE("stochastic") {

TEST_CASE("fenwick tree") {
  Fenwick t(6);
  std::vector<std::int64_t> w{3, 0, 5, 1, 0, 2};
  for (std::size_t i = 0; i < w.size(); ++i) t.add(i, w[i]);
  CHECK(t.prefix(6) == 11);
  CHECK(t.prefix(3) == 8);
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::int64_t u = acc; u < acc + w[i]; ++u) CHECK(t.find(u) == i);
    acc += w[i];
  }
  t.add(2, -5);
  CHECK(t.find(3) == 3);
}

TEST_CASE("two clusters under R1") {
  std::vector<double> dts;
  for (std::uint64_t seed = 1; seed <= 400; ++seed) {
    ParticleSystem sys({{2, 2}, {2, 2}}, 1.0, seed);
    CHECK(sys.total_rate(AlphaWeights(1, 0, 0)) == doctest::Approx(4.0));
    auto ev = sys.gillespie_step(AlphaWeights(1, 0, 0));
    CHECK(ev.channel == 1);
    CHECK(ev.product == Composition{2, 5});
    CHECK(sys.count() == 1);
    dts.push_back(ev.dt);
  }
  double mean = std::accumulate(dts.begin(), dts.end(), 0.0) / dts.size();
  // Exp(4): mean 1/4, sd of the sample mean 1/(4 sqrt(400))
  CHECK(std::abs(mean - 0.25) < 4 * 0.25 / 20);
}

TEST_CASE("rate sums agree with pair enumeration") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> u(2, 9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Composition> ps;
    for (int k = 0; k < 30; ++k) ps.push_back({u(rng), u(rng)});
    ParticleSystem sys(ps, 3.0, trial);
    const AlphaWeights a(0.3, 1.2, 0.7);
    long size = 0;
    for (auto& z : ps) size += z.size();
    for (int e = 0; e < 20; ++e) {
      CHECK(sys.total_rate(a) == doctest::Approx(sys.brute_force_rate(a)).epsilon(1e-12));
      if (sys.gillespie_step(a).channel == 3) ++size;
    }
    CHECK(sys.recheck());
    CHECK(sys.total_size() == size);
  }
}

TEST_CASE("R3 keeps two-arm clusters on a = 2") {
  std::vector<Composition> ps;
  for (int k = 0; k < 200; ++k) ps.push_back({2 + k % 5, 2});
  ParticleSystem sys(ps, 10.0, 5);
  const AlphaWeights a(0, 0, 1);
  while (sys.count() > 1) {
    auto ev = sys.gillespie_step(a);
    CHECK(ev.channel == 3);
    CHECK(ev.product.a == 2);
  }
  for (const auto& z : sys.particles()) CHECK(z.a == 2);
}

TEST_CASE("empirical measure") {
  ParticleSystem sys({{2, 2}, {2, 2}, {2, 2}}, 2.0, 1);
  DiscreteMeasure f = empirical_measure(sys);
  CHECK(f.size() == 1);
  CHECK(f.weight({2, 2}) == 1.5);
  ParticleSystem empty({}, 1.0, 1);
  CHECK(empirical_measure(empty).empty());
  std::vector<Composition> ps{{2, 3}, {4, 2}, {2, 3}, {7, 5}};
  ParticleSystem s2(ps, 4.0, 1);
  MomentSet m = extract_moments(empirical_measure(s2));
  Vec2 sum = Vec2::Zero();
  for (auto& z : ps) sum += z.vec();
  CHECK((m.m1 - sum / 4.0).norm() < 1e-15);
}

TEST_CASE("from_measure sets the volume from the particle count") {
  DiscreteMeasure f;
  f.add({2, 2}, 1.0);
  f.add({3, 2}, 3.0);
  ParticleSystem sys = ParticleSystem::from_measure(f, 4000, 3);
  CHECK(sys.count() == 4000);
  CHECK(sys.volume() == doctest::Approx(1000.0));
  DiscreteMeasure e = empirical_measure(sys);
  CHECK(e.weight({2, 2}) == doctest::Approx(1.0));
  CHECK(e.weight({3, 2}) == doctest::Approx(3.0));
}

TEST_CASE("advance_to stops on the requested time") {
  ParticleSystem sys = ParticleSystem::from_measure(DiscreteMeasure::delta(2, 2), 2000, 9);
  sys.advance_to(0.05, AlphaWeights(1, 1, 1));
  CHECK(sys.t() == 0.05);
  CHECK(sys.count() < 2000);
}

TEST_CASE("number density on a = 2 approaches N0/(1+2 N0 t)") {
  EnsembleConfig ec;
  ec.alpha = AlphaWeights(0, 0, 1);
  ec.f0 = DiscreteMeasure::delta(2, 2);
  ec.n_particles = 20000;
  ec.checkpoints = {0.5, 1.0, 2.0};
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < 16; ++k) seeds.push_back(100 + k);
  EnsembleResult r = run_ensemble(ec, seeds);
  for (const auto& s : r.summary) {
    double exact = 1.0 / (1.0 + 2.0 * s.t);
    // finite systems carry an O(1/n) bias on top of the noise
    CHECK(std::abs(s.mean.m0 - exact) < 4 * s.sem.m0 + 5.0 / ec.n_particles);
  }
}

TEST_CASE("ensembles are deterministic and threads do not matter") {
  EnsembleConfig ec;
  ec.alpha = AlphaWeights(1, 1, 1);
  ec.f0 = DiscreteMeasure::delta(2, 2);
  ec.n_particles = 3000;
  ec.checkpoints = {0.02, 0.04};
  EnsembleResult a = run_ensemble(ec, {5, 5});
  REQUIRE(a.rows.size() == 4);
  CHECK(a.rows[0].m.m0 == a.rows[2].m.m0);
  CHECK(a.rows[1].m.m2 == a.rows[3].m.m2);
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6};
  EnsembleResult s1 = run_ensemble(ec, seeds);
  ec.threads = 3;
  EnsembleResult s3 = run_ensemble(ec, seeds);
  for (std::size_t k = 0; k < s1.summary.size(); ++k) {
    CHECK(s1.summary[k].mean.m2 == s3.summary[k].mean.m2);
    CHECK(s1.summary[k].sem.m1 == s3.summary[k].sem.m1);
  }
}

TEST_CASE("standard error shrinks like 1/sqrt(runs)") {
  EnsembleConfig ec;
  ec.alpha = AlphaWeights(1, 1, 1);
  ec.f0 = DiscreteMeasure::delta(2, 2);
  ec.n_particles = 2000;
  ec.checkpoints = {0.05};
  std::vector<std::uint64_t> s16, s64;
  for (int k = 0; k < 16; ++k) s16.push_back(k);
  for (int k = 0; k < 64; ++k) s64.push_back(1000 + k);
  double e16 = run_ensemble(ec, s16).summary[0].sem.m2(0, 0);
  double e64 = run_ensemble(ec, s64).summary[0].sem.m2(0, 0);
  // ratio 2 up to the sampling error of the standard deviations themselves
  CHECK(e16 / e64 > 1.4);
  CHECK(e16 / e64 < 2.8);
}

}
