#ifndef ROULEAU_STOCHASTIC_HPP
#define ROULEAU_STOCHASTIC_HPP

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "rouleau/kernels.hpp"
#include "rouleau/measure.hpp"
#include "rouleau/moments.hpp"

namespace rouleau {

// Fenwick tree over int64 weights; sample() returns the slot holding offset u.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n = 0) : t_(n + 1, 0) {}
  void add(std::size_t i, std::int64_t d);
  std::int64_t prefix(std::size_t n) const;  // sum of the first n slots
  std::size_t find(std::int64_t u) const;    // smallest i with prefix(i+1) > u
  std::size_t size() const { return t_.size() - 1; }

 private:
  std::vector<std::int64_t> t_;
};

// Marcus-Lushnikov system: each unordered pair merges through channel i at
// rate alpha_i K_i(z,z')/V. Dead slots keep zero weight.
class ParticleSystem {
 public:
  ParticleSystem(std::vector<Composition> particles, double V, std::uint64_t seed);

  static ParticleSystem from_measure(const DiscreteMeasure& f0, long n_particles, std::uint64_t seed);

  double t() const { return t_; }
  double volume() const { return V_; }
  long count() const { return n_alive_; }
  long events() const { return events_; }
  std::vector<Composition> particles() const;  // live particles in slot order

  // total rate summed over unordered pairs
  double total_rate(const AlphaWeights& alpha) const;
  double brute_force_rate(const AlphaWeights& alpha) const;  // O(n^2)
  // recompute the running sums from scratch; returns false (and repairs) on drift
  bool recheck();

  struct Event {
    double dt;
    int channel;
    Composition product;
  };
  Event gillespie_step(const AlphaWeights& alpha);
  // steps until the next event would pass t_end; t() becomes t_end
  void advance_to(double t_end, const AlphaWeights& alpha);

  double largest_fraction() const;  // largest size over total size
  long total_size() const;

 private:
  std::pair<int, Composition> apply_event(const AlphaWeights& alpha);
  void put(std::size_t slot, const Composition& z);
  void clear(std::size_t slot);
  std::size_t pick(const Fenwick& tree, std::int64_t total);

  std::vector<Composition> slots_;
  std::vector<char> alive_;
  Fenwick fx_, fy_;
  std::int64_t sx_ = 0, sy_ = 0, sxx_ = 0, sxy_ = 0, syy_ = 0;
  long n_alive_ = 0;
  long events_ = 0;
  double V_;
  double t_ = 0.0;
  std::mt19937_64 rng_;
};

DiscreteMeasure empirical_measure(const ParticleSystem& sys);

struct EnsembleConfig {
  AlphaWeights alpha;
  DiscreteMeasure f0;
  long n_particles = 100000;
  std::vector<double> checkpoints;
  int threads = 1;
};

struct EnsembleRow {
  int run_id;
  double t;
  MomentSet m;  // orders 0..2
  double largest_fraction;
};

struct MomentStats {
  double t;
  MomentSet mean, sem;  // sem: standard error of the mean
};

struct EnsembleResult {
  std::vector<EnsembleRow> rows;      // run-major, checkpoint order inside a run
  std::vector<MomentStats> summary;  // one per checkpoint
};

EnsembleResult run_ensemble(const EnsembleConfig& cfg, const std::vector<std::uint64_t>& seeds);

}  // namespace rouleau

#endif
