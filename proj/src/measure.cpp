#include "rouleau/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rouleau {

DiscreteMeasure DiscreteMeasure::delta(int c, int a, double w) {
  DiscreteMeasure m;
  m.add(make_composition(c, a), w);
  return m;
}

void DiscreteMeasure::add(const Composition& z, double w) {
  if (!in_state_space(z)) throw std::invalid_argument("measure entry outside the state space");
  if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("measure weights must be finite and nonnegative");
  if (w == 0.0) return;
  w_[z] += w;
}

void DiscreteMeasure::set(const Composition& z, double w) {
  if (!in_state_space(z)) throw std::invalid_argument("measure entry outside the state space");
  if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("measure weights must be finite and nonnegative");
  if (w == 0.0)
    w_.erase(z);
  else
    w_[z] = w;
}

double DiscreteMeasure::weight(const Composition& z) const {
  auto it = w_.find(z);
  return it == w_.end() ? 0.0 : it->second;
}

double DiscreteMeasure::total() const {
  double s = 0.0;
  for (auto& [z, w] : w_) s += w;
  return s;
}

double DiscreteMeasure::max_norm_extent() const {
  double m = 0.0;
  for (auto& [z, w] : w_) m = std::max<double>(m, std::max(z.c, z.a));
  return m;
}

std::size_t DiscreteMeasure::drop_below(double tol) {
  return std::erase_if(w_, [tol](const auto& kv) { return kv.second < tol; });
}

}  // namespace rouleau
