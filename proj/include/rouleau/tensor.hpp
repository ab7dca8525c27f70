#ifndef ROULEAU_TENSOR_HPP
#define ROULEAU_TENSOR_HPP

#include <array>
#include <bit>
#include <cmath>
#include <vector>

#include "rouleau/kernels.hpp"

namespace rouleau {

constexpr double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

// Symmetric N-tensor over R^2 stored by independent components:
// comp[p] is the entry with p indices on the first axis and N-p on the second,
// i.e. the moment  int x^p y^(N-p).
template <int N>
struct SymTensor {
  std::array<double, N + 1> comp{};

  double& operator[](int p) { return comp[p]; }
  double operator[](int p) const { return comp[p]; }
  static constexpr double multiplicity(int p) { return binomial(N, p); }

  double norm() const {
    double s = 0.0;
    for (int p = 0; p <= N; ++p) s += multiplicity(p) * comp[p] * comp[p];
    return std::sqrt(s);
  }
  // full contraction with v^{\otimes N}
  double contract(const Vec2& v) const {
    double s = 0.0;
    for (int p = 0; p <= N; ++p) s += multiplicity(p) * comp[p] * std::pow(v(0), p) * std::pow(v(1), N - p);
    return s;
  }
  static SymTensor power(const Vec2& v) {
    SymTensor t;
    for (int p = 0; p <= N; ++p) t.comp[p] = std::pow(v(0), p) * std::pow(v(1), N - p);
    return t;
  }
  SymTensor& operator+=(const SymTensor& o) {
    for (int p = 0; p <= N; ++p) comp[p] += o.comp[p];
    return *this;
  }
  SymTensor operator-(const SymTensor& o) const {
    SymTensor r = *this;
    for (int p = 0; p <= N; ++p) r.comp[p] -= o.comp[p];
    return r;
  }
  SymTensor operator*(double s) const {
    SymTensor r = *this;
    for (auto& x : r.comp) x *= s;
    return r;
  }
};

using Sym3 = SymTensor<3>;
using Sym4 = SymTensor<4>;

// Dense tensor of any rank over R^2. Entry (i_1..i_n), i_k in {0,1}, lives at
// bit pattern i_1 i_2 ... i_n (first index most significant).
class Tensor {
 public:
  explicit Tensor(int rank = 0) : rank_(rank), d_(std::size_t(1) << rank, 0.0) {}

  static Tensor scalar(double s);
  static Tensor vector(const Vec2& v);
  static Tensor matrix(const Mat2& m);
  template <int N>
  static Tensor from_sym(const SymTensor<N>& s) {
    Tensor t(N);
    for (unsigned idx = 0; idx < t.d_.size(); ++idx) t.d_[idx] = s[N - std::popcount(idx)];
    return t;
  }

  int rank() const { return rank_; }
  std::size_t size() const { return d_.size(); }
  double& operator[](unsigned idx) { return d_[idx]; }
  double operator[](unsigned idx) const { return d_[idx]; }

  Tensor outer(const Tensor& o) const;
  Tensor contract_first(const Vec2& v) const;  // sum_j v_j T_{j...}
  Tensor symmetrized() const;                  // average over index permutations
  double asymmetry() const;                    // ||T - P T||
  double norm() const;

  Tensor& operator+=(const Tensor& o);
  Tensor operator-(const Tensor& o) const;
  Tensor operator*(double s) const;

  // Reads off the independent components; the caller is expected to have a
  // symmetric tensor (use symmetrized() first otherwise).
  template <int N>
  SymTensor<N> to_sym() const {
    SymTensor<N> s;
    for (int p = 0; p <= N; ++p) {
      // p ones on the first axis -> leading zeros bits (axis 0 is bit value 0)
      unsigned idx = (1u << (N - p)) - 1u;  // low N-p bits set = second axis
      s[p] = d_[idx];
    }
    return s;
  }

 private:
  int rank_;
  std::vector<double> d_;
};

// A(J,T)_{k l m ...} = sum_ab K_ab J_ka T_{b l m ...}
Tensor contract_A(const Mat2& K, const Mat2& J, const Tensor& T);

}  // namespace rouleau

#endif
