#ifndef ROULEAU_MEASURE_HPP
#define ROULEAU_MEASURE_HPP

#include <map>
#include <vector>

#include "rouleau/kernels.hpp"

namespace rouleau {

using SignedMap = std::map<Composition, double>;

// Sparse nonnegative weights on the lattice, ordered by (c,a).
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  static DiscreteMeasure delta(int c, int a, double w = 1.0);

  void add(const Composition& z, double w);
  void set(const Composition& z, double w);
  double weight(const Composition& z) const;

  std::size_t size() const { return w_.size(); }
  bool empty() const { return w_.empty(); }
  auto begin() const { return w_.begin(); }
  auto end() const { return w_.end(); }

  double total() const;  // sum of weights
  double max_norm_extent() const;
  // remove weights below tol
  std::size_t drop_below(double tol);

 private:
  std::map<Composition, double> w_;
};

}  // namespace rouleau

#endif
