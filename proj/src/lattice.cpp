#include "rouleau/lattice.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <ostream>

#include "json.hpp"

namespace rouleau {

namespace {

int smooth_size(int m) {
  for (int n = std::max(m, 1);; ++n) {
    int r = n;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return n;
  }
}

void add_moments(MomentSet& acc, double w, double c, double a) {
  acc.m0 += w;
  acc.m1 += w * Vec2(c, a);
  acc.m2(0, 0) += w * c * c;
  acc.m2(0, 1) += w * c * a;
  acc.m2(1, 1) += w * a * a;
}

void finish_m2(MomentSet& m) { m.m2(1, 0) = m.m2(0, 1); }

}  // namespace

LatticeDensity LatticeDensity::from_measure(const DiscreteMeasure& f) {
  int cmax = 1, amax = 1;
  for (const auto& [z, w] : f) {
    cmax = std::max(cmax, z.c);
    amax = std::max(amax, z.a);
  }
  LatticeDensity d(cmax - 1, amax - 1);
  for (const auto& [z, w] : f) d.at(z.c - 2, z.a - 2) = w;
  return d;
}

DiscreteMeasure LatticeDensity::to_measure() const {
  DiscreteMeasure m;
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < na; ++j)
      if (at(i, j) != 0.0) m.set({i + 2, j + 2}, at(i, j));
  return m;
}

MomentSet LatticeDensity::moments(int order_max) const {
  MomentSet m;
  const int K = std::clamp(order_max, 0, 4);
  for (int i = 0; i < nc; ++i) {
    const double* row = &w[std::size_t(i) * na];
    double r[5] = {0, 0, 0, 0, 0};  // sum_j w a^q
    for (int j = 0; j < na; ++j) {
      if (row[j] == 0.0) continue;
      double a = j + 2, p = row[j];
      for (int q = 0; q <= K; ++q) {
        r[q] += p;
        p *= a;
      }
    }
    double c = i + 2, cp[5] = {1, c, c * c, c * c * c, c * c * c * c};
    m.m0 += r[0];
    if (K < 1) continue;
    m.m1 += Vec2(c * r[0], r[1]);
    if (K < 2) continue;
    m.m2(0, 0) += cp[2] * r[0];
    m.m2(0, 1) += c * r[1];
    m.m2(1, 1) += r[2];
    if (K < 3) continue;
    for (int p = 0; p <= 3; ++p) m.m3[p] += cp[p] * r[3 - p];
    if (K < 4) continue;
    for (int p = 0; p <= 4; ++p) m.m4[p] += cp[p] * r[4 - p];
  }
  finish_m2(m);
  return m;
}

double LatticeDensity::total() const {
  double s = 0;
  for (double x : w) s += x;
  return s;
}

std::pair<int, int> LatticeDensity::support_box() const {
  int bc = 0, ba = 0;
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < na; ++j)
      if (at(i, j) != 0.0) {
        bc = i + 1;
        ba = std::max(ba, j + 1);
      }
  return {bc, ba};
}

void LatticeDensity::resize(int nc_new, int na_new) {
  if (nc_new == nc && na_new == na) return;
  LatticeDensity d(nc_new, na_new);
  int mc = std::min(nc, nc_new), ma = std::min(na, na_new);
  for (int i = 0; i < mc; ++i)
    std::copy_n(&w[std::size_t(i) * na], ma, &d.w[std::size_t(i) * na_new]);
  *this = std::move(d);
}

// ---------------------------------------------------------------- operator

struct LatticeOperator::Fft {
  int n0 = 0, n1 = 0, h1 = 0;
  double* real = nullptr;
  std::complex<double>* A = nullptr;
  std::complex<double>* B = nullptr;
  fftw_plan r2c_a = nullptr, r2c_b = nullptr, c2r = nullptr;
  std::vector<std::complex<double>> w0[3], w1[4];

  ~Fft() { release(); }

  void release() {
    if (r2c_a) fftw_destroy_plan(r2c_a);
    if (r2c_b) fftw_destroy_plan(r2c_b);
    if (c2r) fftw_destroy_plan(c2r);
    if (real) fftw_free(real);
    if (A) fftw_free(A);
    if (B) fftw_free(B);
    r2c_a = r2c_b = c2r = nullptr;
    real = nullptr;
    A = B = nullptr;
    n0 = n1 = 0;
  }

  void ensure(int m0, int m1) {
    if (m0 == n0 && m1 == n1) return;
    release();
    n0 = m0;
    n1 = m1;
    h1 = n1 / 2 + 1;
    std::size_t nr = std::size_t(n0) * n1, nk = std::size_t(n0) * h1;
    real = fftw_alloc_real(nr);
    A = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(nk));
    B = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(nk));
    if (!real || !A || !B) throw NumericalError("lattice: FFT buffer allocation failed");
    auto* fa = reinterpret_cast<fftw_complex*>(A);
    auto* fb = reinterpret_cast<fftw_complex*>(B);
    r2c_a = fftw_plan_dft_r2c_2d(n0, n1, real, fa, FFTW_ESTIMATE);
    r2c_b = fftw_plan_dft_r2c_2d(n0, n1, real, fb, FFTW_ESTIMATE);
    c2r = fftw_plan_dft_c2r_2d(n0, n1, fa, real, FFTW_ESTIMATE);
    const double tau = 2.0 * M_PI;
    for (int s = 0; s < 3; ++s) {
      w0[s].resize(n0);
      for (int k = 0; k < n0; ++k) w0[s][k] = std::polar(1.0, -tau * double((long(k) * s) % n0) / n0);
    }
    for (int s = 0; s < 4; ++s) {
      w1[s].resize(h1);
      for (int k = 0; k < h1; ++k) w1[s][k] = std::polar(1.0, -tau * double((long(k) * s) % n1) / n1);
    }
  }
};

LatticeOperator::LatticeOperator(const AlphaWeights& alpha, double R)
    : alpha_(alpha), R_(R), K_(combined_kernel(alpha)), fft_(std::make_unique<Fft>()) {
  if (!(R >= 1.0) || !std::isfinite(R)) throw ConfigError("lattice: cutoff R must be finite and >= 1");
  nmax_ = int(std::floor(2.0 * R)) - 1;
}

LatticeOperator::~LatticeOperator() = default;

std::pair<int, int> LatticeOperator::reach(int bc, int ba) const {
  if (bc == 0 || ba == 0) return {0, 0};
  // (c,a) + (c',a') + xi: c index reaches 2(bc-1)+2, a index 2(ba-1)+3
  return {std::min(2 * bc + 1, nmax_), std::min(2 * ba + 2, nmax_)};
}

Vec2 LatticeOperator::loss_vector(const LatticeDensity& f) const {
  return K_ * f.moments(1).m1;
}

void LatticeOperator::convolve(const LatticeDensity& f, int bc, int ba) {
  Fft& F = *fft_;
  F.ensure(smooth_size(2 * bc + 1), smooth_size(2 * ba + 2));
  const int n1 = F.n1;
  std::fill_n(F.real, std::size_t(F.n0) * n1, 0.0);
  for (int i = 0; i < bc; ++i)
    for (int j = 0; j < ba; ++j) F.real[std::size_t(i) * n1 + j] = (i + 2) * f.at(i, j);
  fftw_execute(F.r2c_a);
  for (int i = 0; i < bc; ++i)
    for (int j = 0; j < ba; ++j) F.real[std::size_t(i) * n1 + j] = (j + 2) * f.at(i, j);
  fftw_execute(F.r2c_b);

  // channel offsets in index space: (c,a)+(c',a')+xi -> index shift xi + (2,2)
  const double s = 0.5 / (double(F.n0) * n1);
  const double a1 = alpha_[1] * s, a2 = alpha_[2] * s, a3 = alpha_[3] * s;
  for (int k0 = 0; k0 < F.n0; ++k0) {
    const auto p10 = F.w0[0][k0], p20 = F.w0[1][k0], p30 = F.w0[2][k0];
    std::complex<double>* ra = F.A + std::size_t(k0) * F.h1;
    const std::complex<double>* rb = F.B + std::size_t(k0) * F.h1;
    for (int k1 = 0; k1 < F.h1; ++k1) {
      const auto x = ra[k1], y = rb[k1];
      std::complex<double> g = 0.0;
      if (a1 != 0.0) g += a1 * (p10 * F.w1[3][k1]) * (x * x);
      if (a2 != 0.0) g += a2 * (p20 * F.w1[1][k1]) * (x * y);
      if (a3 != 0.0) g += a3 * (p30 * F.w1[0][k1]) * (y * y);
      ra[k1] = g;
    }
  }
  fftw_execute(F.c2r);
}

void LatticeOperator::gain(const LatticeDensity& f, int bc, int ba, LatticeDensity& out, MomentSet* leak) {
  std::fill(out.w.begin(), out.w.end(), 0.0);
  if (leak) *leak = MomentSet{};
  bc = std::min(bc, f.nc);
  ba = std::min(ba, f.na);
  if (bc == 0 || ba == 0) return;
  convolve(f, bc, ba);
  const Fft& F = *fft_;
  const int rc = 2 * bc + 1, ra = 2 * ba + 2;  // reachable extents
  const int oc = std::min(out.nc, rc), oa = std::min(out.na, ra);
  for (int i = 0; i < oc; ++i)
    std::copy_n(F.real + std::size_t(i) * F.n1, oa, &out.w[std::size_t(i) * out.na]);
  if (!leak) return;
  for (int i = 0; i < rc; ++i)
    for (int j = 0; j < ra; ++j) {
      if (i < nmax_ && j < nmax_) continue;
      double g = F.real[std::size_t(i) * F.n1 + j];
      if (g > 0.0) add_moments(*leak, g, i + 2, j + 2);
    }
  finish_m2(*leak);
}

double LatticeOperator::gain_functional(const LatticeDensity& f, const std::function<double(int, int)>& phi) {
  auto [bc, ba] = f.support_box();
  if (bc == 0) return 0.0;
  convolve(f, bc, ba);
  const Fft& F = *fft_;
  double s = 0.0;
  for (int i = 0; i < 2 * bc + 1; ++i)
    for (int j = 0; j < 2 * ba + 2; ++j) s += phi(i + 2, j + 2) * F.real[std::size_t(i) * F.n1 + j];
  return s;
}

SignedMap coagulation_rhs(const DiscreteMeasure& f, const AlphaWeights& alpha, double R, MomentSet* leak) {
  SignedMap out;
  if (leak) *leak = MomentSet{};
  if (f.empty()) return out;
  LatticeOperator op(alpha, R);
  for (const auto& [z, w] : f) {
    if (!in_state_space(z)) throw ConfigError("coagulation_rhs: support outside the state space");
    if (z.c - 1 > op.max_index() || z.a - 1 > op.max_index())
      throw ConfigError("coagulation_rhs: support outside the truncation box");
    if (w < 0.0) throw ConfigError("coagulation_rhs: negative weight");
  }
  LatticeDensity d = LatticeDensity::from_measure(f);
  auto [bc, ba] = d.support_box();
  auto [ec, ea] = op.reach(bc, ba);
  LatticeDensity g(std::max(ec, d.nc), std::max(ea, d.na));
  op.gain(d, bc, ba, g, leak);
  Vec2 lv = op.loss_vector(d);
  const Vec2 m1 = d.moments(1).m1;
  const double scale = 0.5 * m1.dot(combined_kernel(alpha) * m1);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  for (int i = 0; i < g.nc; ++i)
    for (int j = 0; j < g.na; ++j) {
      double v = g.at(i, j);
      if (std::abs(v) <= floor) v = 0.0;
      if (i < d.nc && j < d.na) v -= d.at(i, j) * ((i + 2) * lv(0) + (j + 2) * lv(1));
      if (v != 0.0) out[{i + 2, j + 2}] = v;
    }
  return out;
}

// ---------------------------------------------------------------- stepper

namespace {

// Dormand-Prince 5(4)
constexpr double C[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double A[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double E[7] = {71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

struct Decay {
  std::vector<double> x, y;
  void set(const Vec2& g, double theta, int nc, int na) {
    x.resize(nc);
    y.resize(na);
    for (int i = 0; i < nc; ++i) x[i] = std::exp(-(i + 2) * g(0) * theta);
    for (int j = 0; j < na; ++j) y[j] = std::exp(-(j + 2) * g(1) * theta);
  }
};

}  // namespace

LatticeSolver::LatticeSolver(const AlphaWeights& alpha, double R, const LatticeOptions& opt)
    : alpha_(alpha), R_(R), opt_(opt), op_(alpha, R) {
  if (!(opt.rtol > 0) || !(opt.atol > 0)) throw ConfigError("lattice: tolerances must be positive");
}

SolverState LatticeSolver::init(const DiscreteMeasure& f0) const {
  for (const auto& [z, w] : f0) {
    if (!in_state_space(z)) throw ConfigError("lattice: initial support outside the state space");
    if (z.c - 1 > op_.max_index() || z.a - 1 > op_.max_index())
      throw ConfigError("lattice: initial support outside the truncation box");
    if (w < 0.0) throw ConfigError("lattice: negative initial weight");
  }
  SolverState s;
  s.field = LatticeDensity::from_measure(f0);
  return s;
}

void LatticeSolver::step(SolverState& s, double dt_max) {
  if (!(dt_max > 0.0)) throw ConfigError("lattice: dt_max must be positive");
  auto [bc, ba] = s.field.support_box();
  if (bc == 0) {  // empty measure: nothing moves
    s.t += dt_max;
    s.stats.steps++;
    s.stats.last_dt = dt_max;
    return;
  }
  auto [ec, ea] = op_.reach(bc, ba);
  int gc = std::max(ec, bc), ga = std::max(ea, ba);

  const MomentSet mom0 = s.field.moments(2);
  const Vec2 g0 = op_.loss_vector(s.field);
  const double norm1 = mom0.m0;
  const double norm2 = mom0.m2(0, 0) + 2 * mom0.m2(0, 1) + mom0.m2(1, 1);  // sum f (c+a)^2
  const double thr = opt_.drop_rel * norm1;

  const double dt_min = opt_.dt_min > 0 ? opt_.dt_min
                                        : (std::isfinite(opt_.T_est) ? 1e-12 * opt_.T_est : 1e-12);
  double h = s.stats.next_dt;
  if (!(h > 0.0)) {
    const double rate = g0.sum() + mom0.m1.dot(combined_kernel(alpha_) * mom0.m1) / std::max(norm1, 1e-300);
    h = opt_.dt_init > 0 ? opt_.dt_init : 1e-3 / (1e-300 + 4.0 * rate);
  }
  h = std::min(h, dt_max);

  std::vector<LatticeDensity> N;
  LatticeDensity F;
  std::vector<MomentSet> lk(7);
  Decay dec[7];

  for (;;) {
    if (h < dt_min) throw StepUnderflow("lattice: step size underflow at t=" + std::to_string(s.t));
    s.field.resize(gc, ga);
    const int nc = gc, na = ga;
    const std::size_t n = s.field.w.size();
    const LatticeDensity& f = s.field;
    if (F.nc != nc || F.na != na) {
      F = LatticeDensity(nc, na);
      N.assign(7, LatticeDensity(nc, na));
    }
    bool grow = false;
    for (int st = 0; st < 7 && !grow; ++st) {
      // F = e^{-L c h} f + h sum_l a_{st,l} e^{-L (c_st - c_l) h} N_l
      if (st == 0) {
        F.w = f.w;
      } else {
        dec[0].set(g0, C[st] * h, nc, na);
        for (int l = 0; l < st; ++l) dec[l + 1].set(g0, (C[st] - C[l]) * h, nc, na);
        for (int i = 0; i < nc; ++i)
          for (int j = 0; j < na; ++j) {
            std::size_t k = std::size_t(i) * na + j;
            double v = dec[0].x[i] * dec[0].y[j] * f.w[k];
            for (int l = 0; l < st; ++l)
              if (A[st][l] != 0.0) v += h * A[st][l] * dec[l + 1].x[i] * dec[l + 1].y[j] * N[l].w[k];
            F.w[k] = v;
          }
      }
      // sources: the stage's support above the drop level, at least the step's box
      int sc = bc, sa = ba;
      if (st > 0) {
        for (int i = nc - 1; i >= sc; --i) {
          const double* row = &F.w[std::size_t(i) * na];
          if (std::any_of(row, row + na, [&](double x) { return std::abs(x) > thr; })) {
            sc = i + 1;
            break;
          }
        }
        for (int j = na - 1; j >= sa; --j) {
          bool hit = false;
          for (int i = 0; i < nc && !hit; ++i) hit = std::abs(F.at(i, j)) > thr;
          if (hit) {
            sa = j + 1;
            break;
          }
        }
      }
      auto [rc, ra] = op_.reach(sc, sa);
      if (rc > gc || ra > ga) {  // gain would land outside the grid: enlarge and redo
        gc = std::max(gc, rc);
        ga = std::max(ga, ra);
        grow = true;
        break;
      }
      op_.gain(F, sc, sa, N[st], &lk[st]);
      Vec2 dg = op_.loss_vector(F) - g0;
      if (st > 0)
        for (int i = 0; i < nc; ++i)
          for (int j = 0; j < na; ++j) {
            std::size_t k = std::size_t(i) * na + j;
            N[st].w[k] -= ((i + 2) * dg(0) + (j + 2) * dg(1)) * F.w[k];
          }
    }
    if (grow) continue;
    // F now holds the 5th-order solution; error from the embedded pair
    double e1 = 0.0, e2 = 0.0;
    for (int l = 0; l < 7; ++l) dec[l].set(g0, (1.0 - C[l]) * h, nc, na);
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < na; ++j) {
        std::size_t k = std::size_t(i) * na + j;
        double e = 0.0;
        for (int l = 0; l < 7; ++l)
          if (E[l] != 0.0) e += E[l] * dec[l].x[i] * dec[l].y[j] * N[l].w[k];
        e = std::abs(h * e);
        double r = i + j + 4;
        e1 += e;
        e2 += e * r * r;
      }
    double q = std::max(e1 / (opt_.rtol * norm1 + opt_.atol), e2 / (opt_.rtol * norm2 + opt_.atol));
    if (!std::isfinite(q)) q = 1e10;
    if (q > 1.0) {
      s.stats.rejected++;
      h *= std::max(0.2, 0.9 * std::pow(q, -0.2));
      continue;
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::min(worst, F.w[k]);
    if (worst < -opt_.atol) {
      s.stats.positivity_rejects++;
      h *= 0.5;
      continue;
    }
    // accepted
    for (std::size_t k = 0; k < n; ++k)
      if (F.w[k] < 0.0) {
        s.stats.clipped++;
        s.stats.clipped_mass += -F.w[k];
        F.w[k] = 0.0;
      }
    MomentSet dl;
    for (int l = 0; l < 6; ++l) {
      dl.m0 += h * A[6][l] * lk[l].m0;
      dl.m1 += h * A[6][l] * lk[l].m1;
      dl.m2 += h * A[6][l] * lk[l].m2;
    }
    s.leaked.m0 += std::max(0.0, dl.m0);
    for (int a = 0; a < 2; ++a) s.leaked.m1(a) += std::max(0.0, dl.m1(a));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) s.leaked.m2(a, b) += std::max(0.0, dl.m2(a, b));

    s.field.w.swap(F.w);
    for (double& x : s.field.w)
      if (x != 0.0 && x < thr) {
        s.stats.dropped_mass += x;
        x = 0.0;
      }
    MomentSet mom1 = s.field.moments(1);
    double slack = opt_.atol + 1e-12 * mom0.m0;
    if (mom1.m0 > mom0.m0 + slack) s.stats.monotonicity_violations++;
    if (mom1.m1.sum() > mom0.m1.sum() + slack * 1e3) s.stats.monotonicity_violations++;

    s.t += h;
    s.stats.steps++;
    s.stats.last_dt = h;
    s.stats.next_dt = h * std::min(5.0, 0.9 * std::pow(std::max(q, 1e-10), -0.2));
    return;
  }
}

void LatticeSolver::advance_to(SolverState& s, double t_target) {
  while (s.t < t_target) {
    double rem = t_target - s.t;
    if (rem <= 1e-14 * std::max(1.0, std::abs(t_target))) {
      s.t = t_target;
      break;
    }
    double keep = s.stats.next_dt;
    step(s, rem);
    // a step clipped to land on the target should not shrink the controller's proposal
    if (s.stats.last_dt == rem && keep > s.stats.next_dt) s.stats.next_dt = keep;
    if (s.stats.last_dt == rem) s.t = t_target;
  }
}

void write_checkpoint(std::ostream& os, const SolverState& s) {
  nlohmann::ordered_json j;
  j["t"] = s.t;
  auto& e = j["entries"] = nlohmann::ordered_json::array();
  for (int i = 0; i < s.field.nc; ++i)
    for (int k = 0; k < s.field.na; ++k)
      if (s.field.at(i, k) != 0.0) e.push_back({i + 2, k + 2, s.field.at(i, k)});
  auto& l = j["leaked"];
  l["m0"] = s.leaked.m0;
  l["m1"] = {s.leaked.m1(0), s.leaked.m1(1)};
  l["m2"] = {s.leaked.m2(0, 0), s.leaked.m2(0, 1), s.leaked.m2(1, 1)};
  os << j.dump() << '\n';
}

// ---------------------------------------------------------------- weak form, flux

double weak_form_integrand(const DiscreteMeasure& f, const AlphaWeights& alpha,
                           const std::function<double(const Composition&)>& phi) {
  if (f.empty()) return 0.0;
  int ext = 2;
  for (const auto& [z, w] : f) ext = std::max({ext, z.c, z.a});
  LatticeOperator op(alpha, 0.5 * (ext + 1));
  LatticeDensity d = LatticeDensity::from_measure(f);
  double g = op.gain_functional(d, [&](int c, int a) { return phi({c, a}); });
  Vec2 lv = op.loss_vector(d);
  double loss = 0.0;
  for (const auto& [z, w] : f) loss += phi(z) * w * (z.c * lv(0) + z.a * lv(1));
  return g - loss;
}

double weak_form_residual(const std::vector<TrajectoryPoint>& traj, const AlphaWeights& alpha,
                          const std::function<double(const Composition&)>& phi, double t) {
  if (traj.empty()) throw NumericalError("weak_form_residual: empty trajectory");
  auto pair = [&](const DiscreteMeasure& f) {
    double s = 0;
    for (const auto& [z, w] : f) s += phi(z) * w;
    return s;
  };
  std::vector<double> ts, qs;
  std::size_t last = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (k > 0 && !(traj[k].t > traj[k - 1].t)) throw NumericalError("weak_form_residual: times not increasing");
    if (traj[k].t <= t * (1 + 1e-14)) {
      ts.push_back(traj[k].t);
      qs.push_back(weak_form_integrand(traj[k].f, alpha, phi));
      last = k;
    }
  }
  if (std::abs(traj.front().t) > 0.0 || std::abs(ts.back() - t) > 1e-12 * std::max(1.0, t))
    throw NumericalError("weak_form_residual: trajectory does not cover [0,t]");
  double integral = 0.0;
  std::size_t m = ts.size() - 1;  // intervals
  std::size_t k = 0;
  for (; k + 2 <= m; k += 2) {
    double h0 = ts[k + 1] - ts[k], h1 = ts[k + 2] - ts[k + 1];
    integral += (h0 + h1) / 6.0 *
                ((2.0 - h1 / h0) * qs[k] + (h0 + h1) * (h0 + h1) / (h0 * h1) * qs[k + 1] + (2.0 - h0 / h1) * qs[k + 2]);
  }
  if (k < m) {  // one interval left
    if (m == 1) {
      integral += 0.5 * (ts[1] - ts[0]) * (qs[0] + qs[1]);
    } else {
      // quadratic through the last three nodes, integrated over the final interval
      double x0 = ts[m - 2], x1 = ts[m - 1], x2 = ts[m];
      auto lag = [&](double x) {
        return qs[m - 2] * (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2)) +
               qs[m - 1] * (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2)) +
               qs[m] * (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
      };
      double hm = x2 - x1, mid = 0.5 * (x1 + x2);
      integral += hm / 6.0 * (lag(x1) + 4.0 * lag(mid) + lag(x2));
    }
  }
  return std::abs(pair(traj[last].f) - pair(traj.front().f) - integral);
}

std::pair<double, double> mass_flux(const DiscreteMeasure& f, const AlphaWeights& alpha, double R_flux) {
  if (!(R_flux > 0.0)) throw ConfigError("mass_flux: R_flux must be positive");
  if (f.empty()) return {0.0, 0.0};
  // suffix sums over 1-norm shells of sum w z'
  long smax = 0;
  for (const auto& [z, w] : f) smax = std::max<long>(smax, z.c + z.a);
  std::vector<Vec2> tail(smax + 2, Vec2::Zero());
  for (const auto& [z, w] : f) tail[z.c + z.a] += w * z.vec();
  for (long s = smax - 1; s >= 0; --s) tail[s] += tail[s + 1];
  auto tail_at = [&](double thr) -> Vec2 {
    long s = std::max<long>(0, long(std::ceil(thr - 1e-9)));
    return s > smax ? Vec2::Zero() : tail[s];
  };
  double J1 = 0.0, J2 = 0.0;
  for (int i = 1; i <= 3; ++i) {
    if (alpha[i] == 0.0) continue;
    const Mat2& K = kernel_matrix(i);
    for (const auto& [z, w] : f) {
      double nz = z.c + z.a;
      if (nz > R_flux) continue;
      Vec2 t = tail_at(R_flux + zeta(i) - nz);
      double k = w * z.vec().dot(K * t);
      J1 += alpha[i] * k * nz;
      J2 -= zeta(i) * alpha[i] * k;
    }
  }
  return {J1, J2};
}

}  // namespace rouleau
