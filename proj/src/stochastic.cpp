#include "rouleau/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "rouleau/errors.hpp"

namespace rouleau {

void Fenwick::add(std::size_t i, std::int64_t d) {
  for (++i; i < t_.size(); i += i & (~i + 1)) t_[i] += d;
}

std::int64_t Fenwick::prefix(std::size_t n) const {
  std::int64_t s = 0;
  for (; n > 0; n -= n & (~n + 1)) s += t_[n];
  return s;
}

std::size_t Fenwick::find(std::int64_t u) const {
  std::size_t pos = 0, step = 1;
  while (step * 2 < t_.size()) step *= 2;
  for (; step > 0; step /= 2)
    if (pos + step < t_.size() && t_[pos + step] <= u) {
      pos += step;
      u -= t_[pos];
    }
  return pos;
}

ParticleSystem::ParticleSystem(std::vector<Composition> particles, double V, std::uint64_t seed)
    : slots_(std::move(particles)),
      alive_(slots_.size(), 1),
      fx_(slots_.size()),
      fy_(slots_.size()),
      V_(V),
      rng_(seed) {
  if (!(V > 0.0)) throw ConfigError("stochastic: volume must be positive");
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    if (!in_state_space(slots_[k])) throw ConfigError("stochastic: particle outside the state space");
    put(k, slots_[k]);
  }
  n_alive_ = long(slots_.size());
}

ParticleSystem ParticleSystem::from_measure(const DiscreteMeasure& f0, long n_particles, std::uint64_t seed) {
  double tot = f0.total();
  if (!(tot > 0.0) || n_particles < 2) throw ConfigError("stochastic: need a nonzero measure and >= 2 particles");
  double V = double(n_particles) / tot;
  std::vector<Composition> ps;
  ps.reserve(n_particles);
  for (const auto& [z, w] : f0) {
    long k = std::lround(w * V);
    for (long j = 0; j < k; ++j) ps.push_back(z);
  }
  return ParticleSystem(std::move(ps), V, seed);
}

void ParticleSystem::put(std::size_t k, const Composition& z) {
  slots_[k] = z;
  alive_[k] = 1;
  fx_.add(k, z.c);
  fy_.add(k, z.a);
  sx_ += z.c;
  sy_ += z.a;
  sxx_ += std::int64_t(z.c) * z.c;
  sxy_ += std::int64_t(z.c) * z.a;
  syy_ += std::int64_t(z.a) * z.a;
}

void ParticleSystem::clear(std::size_t k) {
  const Composition z = slots_[k];
  alive_[k] = 0;
  fx_.add(k, -z.c);
  fy_.add(k, -z.a);
  sx_ -= z.c;
  sy_ -= z.a;
  sxx_ -= std::int64_t(z.c) * z.c;
  sxy_ -= std::int64_t(z.c) * z.a;
  syy_ -= std::int64_t(z.a) * z.a;
}

std::vector<Composition> ParticleSystem::particles() const {
  std::vector<Composition> out;
  out.reserve(n_alive_);
  for (std::size_t k = 0; k < slots_.size(); ++k)
    if (alive_[k]) out.push_back(slots_[k]);
  return out;
}

double ParticleSystem::total_rate(const AlphaWeights& alpha) const {
  // ordered pairs p != q, halved
  double r1 = double(sx_ * sx_ - sxx_);
  double r2 = double(sx_ * sy_ - sxy_);
  double r3 = double(sy_ * sy_ - syy_);
  return (alpha[1] * r1 + alpha[2] * r2 + alpha[3] * r3) / (2.0 * V_);
}

double ParticleSystem::brute_force_rate(const AlphaWeights& alpha) const {
  auto ps = particles();
  double s = 0.0;
  for (std::size_t p = 0; p < ps.size(); ++p)
    for (std::size_t q = p + 1; q < ps.size(); ++q)
      for (int i = 1; i <= 3; ++i) s += alpha[i] * kernel_eval(i, ps[p], ps[q]);
  return s / V_;
}

bool ParticleSystem::recheck() {
  std::int64_t x = 0, y = 0, xx = 0, xy = 0, yy = 0;
  for (std::size_t k = 0; k < slots_.size(); ++k)
    if (alive_[k]) {
      const auto& z = slots_[k];
      x += z.c;
      y += z.a;
      xx += std::int64_t(z.c) * z.c;
      xy += std::int64_t(z.c) * z.a;
      yy += std::int64_t(z.a) * z.a;
    }
  bool ok = x == sx_ && y == sy_ && xx == sxx_ && xy == sxy_ && yy == syy_ &&
            fx_.prefix(fx_.size()) == sx_ && fy_.prefix(fy_.size()) == sy_;
  if (!ok) {
    fx_ = Fenwick(slots_.size());
    fy_ = Fenwick(slots_.size());
    sx_ = sy_ = sxx_ = sxy_ = syy_ = 0;
    for (std::size_t k = 0; k < slots_.size(); ++k)
      if (alive_[k]) put(k, slots_[k]);
  }
  return ok;
}

std::size_t ParticleSystem::pick(const Fenwick& tree, std::int64_t total) {
  std::uniform_int_distribution<std::int64_t> u(0, total - 1);
  return tree.find(u(rng_));
}

ParticleSystem::Event ParticleSystem::gillespie_step(const AlphaWeights& alpha) {
  if (n_alive_ < 2) throw NumericalError("stochastic: fewer than two particles");
  const double lam = total_rate(alpha);
  if (!(lam > 0.0)) throw NumericalError("stochastic: zero total rate");
  std::exponential_distribution<double> ex(lam);
  const double dt = ex(rng_);
  t_ += dt;
  auto [ch, prod] = apply_event(alpha);
  return {dt, ch, prod};
}

std::pair<int, Composition> ParticleSystem::apply_event(const AlphaWeights& alpha) {
  const double w[3] = {alpha[1] * double(sx_ * sx_ - sxx_), alpha[2] * double(sx_ * sy_ - sxy_),
                       alpha[3] * double(sy_ * sy_ - syy_)};
  std::uniform_real_distribution<double> uni(0.0, w[0] + w[1] + w[2]);
  double u = uni(rng_);
  int ch = u < w[0] ? 1 : (u < w[0] + w[1] ? 2 : 3);
  if (w[ch - 1] == 0.0) ch = w[2] > 0 ? 3 : (w[1] > 0 ? 2 : 1);
  // ordered pair p ~ first factor, q ~ second; resample on p == q
  const Fenwick& tp = ch == 3 ? fy_ : fx_;
  const Fenwick& tq = ch == 1 ? fx_ : fy_;
  const std::int64_t Tp = ch == 3 ? sy_ : sx_, Tq = ch == 1 ? sx_ : sy_;
  std::size_t p, q;
  do {
    p = pick(tp, Tp);
    q = pick(tq, Tq);
  } while (p == q);
  Composition prod = apply_reaction(ch, slots_[p], slots_[q]);
  clear(p);
  clear(q);
  put(p, prod);
  --n_alive_;
  ++events_;
  if (events_ % 10000 == 0 && !recheck()) throw NumericalError("stochastic: running sums drifted");
  return {ch, prod};
}

void ParticleSystem::advance_to(double t_end, const AlphaWeights& alpha) {
  // memoryless: a waiting time overshooting t_end is discarded
  while (n_alive_ >= 2) {
    double lam = total_rate(alpha);
    if (!(lam > 0.0)) break;
    std::exponential_distribution<double> ex(lam);
    double dt = ex(rng_);
    if (t_ + dt > t_end) break;
    t_ += dt;
    apply_event(alpha);
  }
  t_ = std::max(t_, t_end);
}

long ParticleSystem::total_size() const {
  long s = 0;
  for (std::size_t k = 0; k < slots_.size(); ++k)
    if (alive_[k]) s += slots_[k].size();
  return s;
}

double ParticleSystem::largest_fraction() const {
  long mx = 0, s = 0;
  for (std::size_t k = 0; k < slots_.size(); ++k)
    if (alive_[k]) {
      mx = std::max(mx, slots_[k].size());
      s += slots_[k].size();
    }
  return s > 0 ? double(mx) / double(s) : 0.0;
}

DiscreteMeasure empirical_measure(const ParticleSystem& sys) {
  DiscreteMeasure m;
  for (const auto& z : sys.particles()) m.add(z, 1.0 / sys.volume());
  return m;
}

namespace {

MomentSet low_moments(const ParticleSystem& sys) {
  MomentSet m;
  double iv = 1.0 / sys.volume();
  for (const auto& z : sys.particles()) {
    m.m0 += iv;
    m.m1 += iv * z.vec();
    m.m2 += iv * z.vec() * z.vec().transpose();
  }
  return m;
}

// pairwise reduction in index order, independent of thread scheduling
MomentSet pairwise_sum(const std::vector<MomentSet>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return v[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  MomentSet a = pairwise_sum(v, lo, mid), b = pairwise_sum(v, mid, hi);
  a.m0 += b.m0;
  a.m1 += b.m1;
  a.m2 += b.m2;
  return a;
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  const std::size_t nr = seeds.size(), nc = cfg.checkpoints.size();
  if (nr < 2) throw ConfigError("ensemble: need at least two runs");
  for (std::size_t k = 1; k < nc; ++k)
    if (!(cfg.checkpoints[k] > cfg.checkpoints[k - 1])) throw ConfigError("ensemble: checkpoints must increase");
  std::vector<EnsembleRow> rows(nr * nc);
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t r = next++;
      if (r >= nr) return;
      try {
        auto sys = ParticleSystem::from_measure(cfg.f0, cfg.n_particles, seeds[r]);
        for (std::size_t k = 0; k < nc; ++k) {
          sys.advance_to(cfg.checkpoints[k], cfg.alpha);
          rows[r * nc + k] = {int(r), cfg.checkpoints[k], low_moments(sys), sys.largest_fraction()};
        }
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  int nt = std::max(1, std::min<int>(cfg.threads, int(nr)));
  std::vector<std::thread> pool;
  for (int k = 1; k < nt; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);

  EnsembleResult res;
  res.rows = rows;
  for (std::size_t k = 0; k < nc; ++k) {
    std::vector<MomentSet> v(nr), sq(nr);
    for (std::size_t r = 0; r < nr; ++r) v[r] = rows[r * nc + k].m;
    MomentSet mean = pairwise_sum(v, 0, nr);
    mean.m0 /= double(nr);
    mean.m1 /= double(nr);
    mean.m2 /= double(nr);
    for (std::size_t r = 0; r < nr; ++r) {
      sq[r].m0 = std::pow(v[r].m0 - mean.m0, 2);
      sq[r].m1 = (v[r].m1 - mean.m1).cwiseAbs2();
      sq[r].m2 = (v[r].m2 - mean.m2).cwiseAbs2();
    }
    MomentSet var = pairwise_sum(sq, 0, nr);
    double f = 1.0 / (double(nr - 1) * double(nr));
    MomentSet sem;
    sem.m0 = std::sqrt(var.m0 * f);
    sem.m1 = (var.m1 * f).cwiseSqrt();
    sem.m2 = (var.m2 * f).cwiseSqrt();
    res.summary.push_back({cfg.checkpoints[k], mean, sem});
  }
  return res;
}

}  // namespace rouleau
