#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rouleau/lattice.hpp"
#include "rouleau/moments.hpp"

using namespace rouleau;

namespace {

// gain 1/2 K f f' at the product, loss K f f' at each partner; products past
// the box [2, 2R]^2 are dropped from the map and summed into *out_m0
SignedMap brute_rhs(const DiscreteMeasure& f, const AlphaWeights& a, double R, double* out_m0 = nullptr) {
  SignedMap r;
  const int top = int(std::floor(2 * R));
  for (const auto& [z, w] : f)
    for (const auto& [zp, wp] : f)
      for (int i = 1; i <= 3; ++i) {
        double k = a[i] * kernel_eval(i, z, zp) * w * wp;
        if (k == 0.0) continue;
        Composition p = apply_reaction(i, z, zp);
        if (p.c <= top && p.a <= top)
          r[p] += 0.5 * k;
        else if (out_m0)
          *out_m0 += 0.5 * k;
        r[z] -= k;
      }
  return r;
}

double max_diff(const SignedMap& a, const SignedMap& b) {
  double d = 0.0;
  for (const auto& [z, v] : a) {
    auto it = b.find(z);
    d = std::max(d, std::abs(v - (it == b.end() ? 0.0 : it->second)));
  }
  for (const auto& [z, v] : b)
    if (!a.count(z)) d = std::max(d, std::abs(v));
  return d;
}

double max_abs(const SignedMap& a) {
  double m = 0.0;
  for (const auto& [z, v] : a) m = std::max(m, std::abs(v));
  return m;
}

DiscreteMeasure random_measure(std::mt19937_64& rng, int npts, int top) {
  std::uniform_int_distribution<int> u(2, top);
  std::uniform_real_distribution<double> w(0.01, 1.0);
  DiscreteMeasure f;
  for (int k = 0; k < npts; ++k) f.add({u(rng), u(rng)}, w(rng));
  return f;
}

double size_functional(const MomentSet& m) { return 2 * m.m1(0) + m.m1(1) - 3 * m.m0; }

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("one-point measure under R1") {
  const double w = 2.0;
  SignedMap r = coagulation_rhs(DiscreteMeasure::delta(2, 2, w), AlphaWeights(1, 0, 0), 10);
  CHECK(r[Composition{2, 2}] == doctest::Approx(-4 * w * w));
  CHECK(r[Composition{2, 5}] == doctest::Approx(2 * w * w));
  for (const auto& [z, v] : r)
    if (!(z == Composition{2, 2}) && !(z == Composition{2, 5})) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("zero measure has zero rhs") {
  SignedMap r = coagulation_rhs(DiscreteMeasure{}, AlphaWeights(1, 1, 1), 10);
  CHECK(max_abs(r) == 0.0);
}

TEST_CASE("two-point measure under R3 against brute force") {
  DiscreteMeasure f;
  f.add({2, 2}, 1.0);
  f.add({3, 4}, 1.0);
  SignedMap r = coagulation_rhs(f, AlphaWeights(0, 0, 1), 50);
  SignedMap b = brute_rhs(f, AlphaWeights(0, 0, 1), 50);
  CHECK(max_diff(r, b) <= 1e-13 * max_abs(b));
}

TEST_CASE("random measures against brute force") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> ua(0, 2);
  for (int trial = 0; trial < 40; ++trial) {
    DiscreteMeasure f = random_measure(rng, 1 + trial % 6, 15);
    AlphaWeights a(ua(rng) + 0.01, ua(rng), ua(rng));
    SignedMap r = coagulation_rhs(f, a, 100);
    SignedMap b = brute_rhs(f, a, 100);
    CHECK(max_diff(r, b) <= 1e-12 * max_abs(b));
  }
}

TEST_CASE("products past the cutoff leak and are accounted for") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    DiscreteMeasure f = random_measure(rng, 4, 7);
    const AlphaWeights a(1, 0.5, 0.8);
    MomentSet leak;
    SignedMap r = coagulation_rhs(f, a, 4.0, &leak);
    double leak_m0 = 0.0;
    SignedMap b = brute_rhs(f, a, 4.0, &leak_m0);
    CHECK(max_diff(r, b) <= 1e-12 * max_abs(b));
    CHECK(leak.m0 == doctest::Approx(leak_m0).epsilon(1e-12));
    for (const auto& [z, v] : r) CHECK((z.c <= 8 && z.a <= 8));
  }
}

TEST_CASE("density round trip and moments") {
  DiscreteMeasure f;
  f.add({2, 2}, 1.0);
  f.add({5, 3}, 0.25);
  f.add({4, 9}, 0.5);
  LatticeDensity d = LatticeDensity::from_measure(f);
  DiscreteMeasure g = d.to_measure();
  CHECK(g.size() == f.size());
  for (const auto& [z, w] : f) CHECK(g.weight(z) == w);
  MomentSet a = d.moments(4), b = extract_moments(f);
  CHECK(a.m0 == doctest::Approx(b.m0));
  CHECK((a.m2 - b.m2).norm() <= 1e-13 * b.m2.norm());
  CHECK((a.m4 - b.m4).norm() <= 1e-13 * b.m4.norm());
}

TEST_CASE("zero measure steps to zero") {
  LatticeSolver s(AlphaWeights(1, 1, 1), 16);
  SolverState st = s.init(DiscreteMeasure{});
  s.advance_to(st, 0.1);
  CHECK(st.field.total() == 0.0);
}

TEST_CASE("short step follows the first-moment equation") {
  const AlphaWeights a(1, 1, 1);
  DiscreteMeasure f0 = DiscreteMeasure::delta(2, 2);
  LatticeSolver s(a, 64);
  SolverState st = s.init(f0);
  const double dt = 1e-4;
  s.advance_to(st, dt);
  MomentSet m = st.field.moments(2), m0 = extract_moments(f0);
  CHECK(m.m0 < m0.m0);
  Vec2 d = (m.m1 - m0.m1) / dt, ref = first_moment_rhs(m0.m1, a);
  CHECK((d - ref).norm() <= 10 * dt * ref.norm());
}

TEST_CASE("lattice run tracks the moment equations") {
  const AlphaWeights a(1, 1, 1);
  DiscreteMeasure f0 = DiscreteMeasure::delta(2, 2);
  GelationReport rep = detect_blow_up(extract_moments(f0), a);
  LatticeOptions o;
  o.T_est = rep.T_star;
  LatticeSolver s(a, 64, o);
  SolverState st = s.init(f0);
  const double te = 0.3 * rep.T_star;
  s.advance_to(st, te);
  MomentOptions mo;
  mo.t_end = te;
  mo.n_out = 2;
  MomentSet ref = integrate_moment_system(extract_moments(f0), a, mo).samples.back().m;
  MomentSet m = st.field.moments(2);
  CHECK(std::abs(m.m0 / ref.m0 - 1) < 1e-8);
  CHECK((m.m1 - ref.m1).norm() < 1e-8 * ref.m1.norm());
  CHECK((m.m2 - ref.m2).norm() < 1e-7 * ref.m2.norm());
  CHECK(st.leaked.m0 < 1e-15);
  for (double w : st.field.w) CHECK(w >= 0.0);
}

// R3 adds one to the size, so only R1 and R2 here
TEST_CASE("retained plus leaked size is conserved under truncation") {
  const AlphaWeights a(1, 1, 0);
  DiscreteMeasure f0 = DiscreteMeasure::delta(2, 2);
  LatticeSolver s(a, 8);
  SolverState st = s.init(f0);
  s.advance_to(st, 0.2);
  CHECK(st.leaked.m0 > 0.0);
  MomentSet m = st.field.moments(2);
  double total = size_functional(m) + size_functional(st.leaked);
  CHECK(total == doctest::Approx(size_functional(extract_moments(f0))).epsilon(1e-9));
}

TEST_CASE("step size underflow is raised") {
  LatticeOptions o;
  o.dt_min = 1e-2;
  o.rtol = 1e-12;
  LatticeSolver s(AlphaWeights(1, 1, 1), 64, o);
  SolverState st = s.init(DiscreteMeasure::delta(2, 2));
  CHECK_THROWS_AS(s.advance_to(st, 0.12), StepUnderflow);
}

TEST_CASE("weak form residual") {
  const AlphaWeights a(1, 1, 1);
  DiscreteMeasure f0 = DiscreteMeasure::delta(2, 2);
  std::vector<TrajectoryPoint> traj;
  LatticeSolver s(a, 64);
  SolverState st = s.init(f0);
  const double te = 0.04;
  for (int k = 0; k <= 40; ++k) {
    s.advance_to(st, te * k / 40);
    traj.push_back({st.t, st.measure()});
  }
  auto one = [](const Composition&) { return 1.0; };
  auto lin = [](const Composition& z) { return double(z.c + z.a); };
  CHECK(weak_form_residual(traj, a, one, te) <= 1e-6);
  CHECK(weak_form_residual(traj, a, lin, te) <= 1e-8);
  std::vector<TrajectoryPoint> frozen{{0.0, f0}};
  CHECK(weak_form_residual(frozen, a, one, 0.0) == 0.0);
}

TEST_CASE("mass flux") {
  auto none = mass_flux(DiscreteMeasure::delta(2, 2), AlphaWeights(1, 1, 1), 100);
  CHECK(none.first == 0.0);
  CHECK(none.second == 0.0);
  DiscreteMeasure f;
  f.add({2, 2}, 1.0);
  f.add({5, 5}, 1.0);
  const double Rf = 9;
  double J1 = 0, J2 = 0;
  for (const auto& [z, w] : f)
    for (const auto& [zp, wp] : f) {
      double nz = z.c + z.a, nzp = zp.c + zp.a;
      if (nz <= Rf && nz + nzp >= Rf + zeta(1)) {
        double k = kernel_eval(1, z, zp) * w * wp;
        J1 += k * nz;
        J2 -= zeta(1) * k;
      }
    }
  auto J = mass_flux(f, AlphaWeights(1, 0, 0), Rf);
  CHECK(J.first == doctest::Approx(J1));
  CHECK(J.second == doctest::Approx(J2));
  CHECK(J1 > 0.0);
  CHECK_THROWS(mass_flux(f, AlphaWeights(1, 0, 0), 0.0));
}

TEST_CASE("checkpoint record") {
  LatticeSolver s(AlphaWeights(1, 1, 1), 8);
  SolverState st = s.init(DiscreteMeasure::delta(2, 2));
  s.advance_to(st, 0.05);
  std::ostringstream os;
  write_checkpoint(os, st);
  std::string line = os.str();
  CHECK(line.back() == '\n');
  CHECK(std::count(line.begin(), line.end(), '\n') == 1);
  auto j = nlohmann::json::parse(line);
  CHECK(j["t"].get<double>() == doctest::Approx(0.05));
  double tot = 0.0;
  for (const auto& e : j["entries"]) tot += e[2].get<double>();
  CHECK(tot == doctest::Approx(st.field.total()));
  CHECK(j["leaked"].contains("m0"));
  CHECK(j["leaked"]["m1"].size() == 2);
}

}
