#include "rouleau/tensor.hpp"

#include <bit>
#include <stdexcept>

namespace rouleau {

Tensor Tensor::scalar(double s) {
  Tensor t(0);
  t.d_[0] = s;
  return t;
}

Tensor Tensor::vector(const Vec2& v) {
  Tensor t(1);
  t.d_[0] = v(0);
  t.d_[1] = v(1);
  return t;
}

Tensor Tensor::matrix(const Mat2& m) {
  Tensor t(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) t.d_[(i << 1) | j] = m(i, j);
  return t;
}

Tensor Tensor::outer(const Tensor& o) const {
  Tensor r(rank_ + o.rank_);
  for (std::size_t i = 0; i < d_.size(); ++i) {
    if (d_[i] == 0.0) continue;
    for (std::size_t j = 0; j < o.d_.size(); ++j) r.d_[(i << o.rank_) | j] = d_[i] * o.d_[j];
  }
  return r;
}

Tensor Tensor::contract_first(const Vec2& v) const {
  if (rank_ == 0) throw std::logic_error("cannot contract a scalar");
  Tensor r(rank_ - 1);
  const std::size_t half = r.d_.size();
  for (std::size_t i = 0; i < half; ++i) r.d_[i] = v(0) * d_[i] + v(1) * d_[half + i];
  return r;
}

Tensor Tensor::symmetrized() const {
  // the permutation average of an entry only depends on how many indices sit on each axis
  std::vector<double> sum(rank_ + 1, 0.0), cnt(rank_ + 1, 0.0);
  for (unsigned i = 0; i < d_.size(); ++i) {
    int p = std::popcount(i);
    sum[p] += d_[i];
    cnt[p] += 1.0;
  }
  Tensor r(rank_);
  for (unsigned i = 0; i < d_.size(); ++i) {
    int p = std::popcount(i);
    r.d_[i] = sum[p] / cnt[p];
  }
  return r;
}

double Tensor::asymmetry() const { return (*this - symmetrized()).norm(); }

double Tensor::norm() const {
  double s = 0.0;
  for (double x : d_) s += x * x;
  return std::sqrt(s);
}

Tensor& Tensor::operator+=(const Tensor& o) {
  if (o.rank_ != rank_) throw std::logic_error("rank mismatch");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
  return *this;
}

Tensor Tensor::operator-(const Tensor& o) const {
  if (o.rank_ != rank_) throw std::logic_error("rank mismatch");
  Tensor r = *this;
  for (std::size_t i = 0; i < d_.size(); ++i) r.d_[i] -= o.d_[i];
  return r;
}

Tensor Tensor::operator*(double s) const {
  Tensor r = *this;
  for (auto& x : r.d_) x *= s;
  return r;
}

Tensor contract_A(const Mat2& K, const Mat2& J, const Tensor& T) {
  Tensor r(T.rank());
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      if (K(a, b) == 0.0) continue;
      Tensor left = Tensor::vector(J.col(a));
      Tensor right = T.contract_first(Vec2::Unit(b));
      r += left.outer(right) * K(a, b);
    }
  return r;
}

}  // namespace rouleau
