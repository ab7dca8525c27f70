#include "rouleau/moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "rouleau/errors.hpp"

namespace odeint = boost::numeric::odeint;

namespace rouleau {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

Tensor xi_power(int i, int c) {
  Tensor t = Tensor::scalar(1.0);
  auto x = reaction_offset(i);
  Tensor xv = Tensor::vector(Vec2(x(0), x(1)));
  for (int k = 0; k < c; ++k) t = t.outer(xv);
  return t;
}

std::vector<Tensor> moment_tensors(const Vec2& m1, const Mat2& m2, const Sym3* m3, const Sym4* m4) {
  std::vector<Tensor> M;
  M.push_back(Tensor::scalar(0.0));
  M.push_back(Tensor::vector(m1));
  M.push_back(Tensor::matrix(m2));
  if (m3) M.push_back(Tensor::from_sym(*m3));
  if (m4) M.push_back(Tensor::from_sym(*m4));
  return M;
}

void check_symmetric(const Tensor& t, const char* what) {
  double n = t.norm();
  if (t.asymmetry() > 1e-13 * n + 1e-300) throw NumericalError(std::string("asymmetric ") + what + " right-hand side");
}

}  // namespace

MomentSet extract_moments(const DiscreteMeasure& f, int order_max) {
  MomentSet m;
  for (auto& [z, w] : f) {
    const double x = z.c, y = z.a;
    m.m0 += w;
    if (order_max < 1) continue;
    m.m1 += w * Vec2(x, y);
    if (order_max < 2) continue;
    m.m2(0, 0) += w * x * x;
    m.m2(0, 1) += w * x * y;
    m.m2(1, 1) += w * y * y;
    if (order_max < 3) continue;
    for (int p = 0; p <= 3; ++p) m.m3[p] += w * std::pow(x, p) * std::pow(y, 3 - p);
    if (order_max < 4) continue;
    for (int p = 0; p <= 4; ++p) m.m4[p] += w * std::pow(x, p) * std::pow(y, 4 - p);
  }
  m.m2(1, 0) = m.m2(0, 1);
  return m;
}

double zeroth_moment_rhs(const Vec2& m1, const AlphaWeights& alpha) {
  double s = 0.0;
  for (int i = 1; i <= 3; ++i) s -= 0.5 * alpha[i] * m1.dot(kernel_matrix(i) * m1);
  return s;
}

Vec2 first_moment_rhs(const Vec2& m1, const AlphaWeights& alpha) {
  Vec2 r = Vec2::Zero();
  for (int i = 1; i <= 3; ++i) r += 0.5 * alpha[i] * m1.dot(kernel_matrix(i) * m1) * reaction_offset(i).cast<double>();
  return r;
}

RiccatiCoefficients riccati_coefficients(const Vec2& m1, const AlphaWeights& alpha) {
  RiccatiCoefficients rc{Mat2::Zero(), Mat2::Zero(), Mat2::Zero()};
  for (int i = 1; i <= 3; ++i) {
    if (alpha[i] == 0.0) continue;
    const Mat2& Ki = kernel_matrix(i);
    Vec2 xi = reaction_offset(i).cast<double>();
    rc.K += alpha[i] * Ki;
    rc.A += alpha[i] * Ki * (m1 * xi.transpose());
    rc.B += alpha[i] * 0.5 * m1.dot(Ki * m1) * (xi * xi.transpose());
  }
  return rc;
}

Mat2 second_moment_rhs(const Mat2& m2, const Vec2& m1, const AlphaWeights& alpha) {
  Mat2 r = Mat2::Zero();
  for (int i = 1; i <= 3; ++i) {
    if (alpha[i] == 0.0) continue;
    const Mat2& Ki = kernel_matrix(i);
    Vec2 xi = reaction_offset(i).cast<double>();
    Mat2 left = m2 + xi * m1.transpose();
    Mat2 right = m2 + m1 * xi.transpose();
    r += alpha[i] * (left * Ki * right - 0.5 * m1.dot(Ki * m1) * (xi * xi.transpose()));
  }
  double asym = (r - r.transpose()).norm();
  if (asym > 1e-13 * r.norm() + 1e-300) throw NumericalError("asymmetric second-moment right-hand side");
  return 0.5 * (r + r.transpose());
}

Tensor moment_tensor_rhs(int n, const std::vector<Tensor>& M, const AlphaWeights& alpha, bool with_offsets) {
  if (n < 0) throw std::invalid_argument("negative moment order");
  if (int(M.size()) < std::max(n + 1, 2)) throw std::invalid_argument("not enough moment tensors");
  if (n == 0) {
    Vec2 m1(M[1][0], M[1][1]);
    return Tensor::scalar(zeroth_moment_rhs(m1, alpha));
  }
  Tensor out(n);
  for (int i = 1; i <= 3; ++i) {
    if (alpha[i] == 0.0) continue;
    const Mat2& Ki = kernel_matrix(i);
    for (int a = 0; a <= n; ++a)
      for (int b = 0; a + b <= n; ++b) {
        int c = n - a - b;
        // z^{\otimes n} and z'^{\otimes n} cancel against the subtracted terms
        if ((b == 0 && c == 0) || (a == 0 && c == 0)) continue;
        if (!with_offsets && c > 0) continue;
        double coef = 0.5 * alpha[i] * factorial(n) / (factorial(a) * factorial(b) * factorial(c));
        Tensor X = xi_power(i, c);
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) {
            if (Ki(j, k) == 0.0) continue;
            Tensor L = M[a + 1].contract_first(Vec2::Unit(j));
            Tensor R = M[b + 1].contract_first(Vec2::Unit(k));
            out += L.outer(R).outer(X) * (coef * Ki(j, k));
          }
      }
  }
  return out.symmetrized();
}

Tensor leading_block(const Tensor& Mn, const Mat2& m2, const Mat2& K) {
  return contract_A(K, m2, Mn).symmetrized() * double(Mn.rank());
}

Sym3 third_moment_rhs(const Sym3& m3, const Mat2& m2, const Vec2& m1, const AlphaWeights& alpha) {
  Tensor r = moment_tensor_rhs(3, moment_tensors(m1, m2, &m3, nullptr), alpha);
  check_symmetric(r, "third-moment");
  return r.to_sym<3>();
}

Sym4 fourth_moment_rhs(const Sym4& m4, const Sym3& m3, const Mat2& m2, const Vec2& m1, const AlphaWeights& alpha) {
  Tensor r = moment_tensor_rhs(4, moment_tensors(m1, m2, &m3, &m4), alpha);
  check_symmetric(r, "fourth-moment");
  return r.to_sym<4>();
}

std::string to_string(GelBranch b) {
  switch (b) {
    case GelBranch::alpha12: return "alpha12";
    case GelBranch::alpha1_cond: return "alpha1_cond";
    case GelBranch::alpha3_cond: return "alpha3_cond";
    default: return "no_gel";
  }
}

GelBranch classify_gelation(const MomentSet& f0, const AlphaWeights& alpha) {
  if (f0.m0 <= 0.0) throw std::invalid_argument("initial measure must not vanish");
  const double a1 = alpha[1], a2 = alpha[2], a3 = alpha[3];
  if (a2 > 0.0 || (a1 > 0.0 && a3 > 0.0)) return GelBranch::alpha12;
  if (a1 > 0.0) {
    // only R1: c never changes on {c = 2}; int x(x-2) f0 decides
    double n = f0.m2(0, 0) - 2.0 * f0.m1(0);
    return n > 1e-12 * f0.m2(0, 0) ? GelBranch::alpha1_cond : GelBranch::no_gel;
  }
  double n = f0.m2(1, 1) - 2.0 * f0.m1(1);
  return n > 1e-12 * f0.m2(1, 1) ? GelBranch::alpha3_cond : GelBranch::no_gel;
}

namespace {

using HamState = std::array<double, 10>;  // m1, U (col-major), V (col-major)

struct HamSystem {
  AlphaWeights alpha;
  void operator()(const HamState& y, HamState& dy, double) const {
    Vec2 m1(y[0], y[1]);
    Eigen::Map<const Mat2> U(y.data() + 2), V(y.data() + 6);
    auto rc = riccati_coefficients(m1, alpha);
    Vec2 d1 = first_moment_rhs(m1, alpha);
    Mat2 dU = rc.A.transpose() * U + rc.B * V;
    Mat2 dV = -rc.K * U - rc.A * V;
    dy[0] = d1(0);
    dy[1] = d1(1);
    std::copy(dU.data(), dU.data() + 4, dy.begin() + 2);
    std::copy(dV.data(), dV.data() + 4, dy.begin() + 6);
  }
};

double det_v(const HamState& y) { return y[6] * y[9] - y[7] * y[8]; }

HamState ham_initial(const MomentSet& f0) {
  HamState y{};
  y[0] = f0.m1(0);
  y[1] = f0.m1(1);
  std::copy(f0.m2.data(), f0.m2.data() + 4, y.begin() + 2);
  Mat2 I = Mat2::Identity();
  std::copy(I.data(), I.data() + 4, y.begin() + 6);
  return y;
}

}  // namespace

double find_det_root(const MomentSet& f0, const AlphaWeights& alpha, double horizon, const BlowUpOptions& opt) {
  HamSystem sys{alpha};
  HamState y = ham_initial(f0);
  auto stepper = odeint::make_controlled(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<HamState>());
  double t = 0.0;
  double dt = std::min(1e-3, horizon / 1000.0);
  double d_prev = det_v(y);
  while (t < horizon) {
    HamState y_old = y;
    double t_old = t;
    dt = std::min(dt, horizon - t);
    int fails = 0;
    while (stepper.try_step(sys, y, t, dt) == odeint::fail) {
      if (++fails > 200) throw NumericalError("step size control failed while locating the blow-up time");
    }
    double d = det_v(y);
    if (!std::isfinite(d)) throw NumericalError("non-finite det V while locating the blow-up time");
    if (d <= 0.0 && d_prev > 0.0) {
      // bisection, re-integrating from the last accepted state
      double lo = t_old, hi = t;
      auto value_at = [&](double tm) {
        HamState z = y_old;
        odeint::integrate_adaptive(stepper, sys, z, t_old, tm, (tm - t_old) / 16.0);
        return det_v(z);
      };
      while (hi - lo > opt.root_rtol * hi * 0.5) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (value_at(mid) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    d_prev = d;
  }
  return std::numeric_limits<double>::infinity();
}

GelationReport detect_blow_up(const MomentSet& f0, const AlphaWeights& alpha, const BlowUpOptions& opt) {
  GelationReport rep;
  rep.branch = classify_gelation(f0, alpha);
  rep.gelates = rep.branch != GelBranch::no_gel;
  if (!rep.gelates) return rep;
  Mat2 K = combined_kernel(alpha);
  double scale = K.norm() * (f0.m2.norm() + f0.m1.squaredNorm() + 1e-300);
  double horizon = opt.horizon > 0.0 ? opt.horizon : 8.0 / scale;
  double t0 = 0.0;
  for (int ext = 0; ext <= opt.max_extensions; ++ext) {
    double r = find_det_root(f0, alpha, horizon, opt);
    if (std::isfinite(r)) {
      rep.T_star = r;
      return rep;
    }
    t0 = horizon;
    horizon *= 4.0;
  }
  throw NumericalError("classification predicts gelation but det V has no root up to t = " + std::to_string(t0));
}

namespace {

using FullState = std::array<double, 20>;  // m0, m1, U, V, m3 (4), m4 (5)

struct Unpacked {
  double m0;
  Vec2 m1;
  Mat2 U, V;
  Sym3 m3;
  Sym4 m4;
};

Unpacked unpack(const FullState& y) {
  Unpacked u;
  u.m0 = y[0];
  u.m1 = Vec2(y[1], y[2]);
  u.U = Eigen::Map<const Mat2>(y.data() + 3);
  u.V = Eigen::Map<const Mat2>(y.data() + 7);
  for (int p = 0; p < 4; ++p) u.m3[p] = y[11 + p];
  for (int p = 0; p < 5; ++p) u.m4[p] = y[15 + p];
  return u;
}

Mat2 sym_part(const Mat2& m) { return 0.5 * (m + m.transpose()); }

// physical time
struct PhysSystem {
  AlphaWeights alpha;
  void operator()(const FullState& y, FullState& dy, double) const {
    Unpacked u = unpack(y);
    Mat2 m2 = sym_part(u.U * u.V.inverse());
    auto rc = riccati_coefficients(u.m1, alpha);
    dy[0] = zeroth_moment_rhs(u.m1, alpha);
    Vec2 d1 = first_moment_rhs(u.m1, alpha);
    dy[1] = d1(0);
    dy[2] = d1(1);
    Mat2 dU = rc.A.transpose() * u.U + rc.B * u.V;
    Mat2 dV = -rc.K * u.U - rc.A * u.V;
    std::copy(dU.data(), dU.data() + 4, dy.begin() + 3);
    std::copy(dV.data(), dV.data() + 4, dy.begin() + 7);
    Sym3 d3 = third_moment_rhs(u.m3, m2, u.m1, alpha);
    Sym4 d4 = fourth_moment_rhs(u.m4, u.m3, m2, u.m1, alpha);
    for (int p = 0; p < 4; ++p) dy[11 + p] = d3[p];
    for (int p = 0; p < 5; ++p) dy[15 + p] = d4[p];
  }
};

// tau = -ln(1 - t/T*), with S3 = s^3 M^3, S4 = s^5 M^4, s = T* e^{-tau}
struct TauSystem {
  AlphaWeights alpha;
  double T;
  void operator()(const FullState& y, FullState& dy, double tau) const {
    const double s = T * std::exp(-tau);
    Unpacked u = unpack(y);
    Mat2 m2 = sym_part(u.U * u.V.inverse());
    auto rc = riccati_coefficients(u.m1, alpha);
    dy[0] = s * zeroth_moment_rhs(u.m1, alpha);
    Vec2 d1 = s * first_moment_rhs(u.m1, alpha);
    dy[1] = d1(0);
    dy[2] = d1(1);
    Mat2 dU = s * (rc.A.transpose() * u.U + rc.B * u.V);
    Mat2 dV = s * (-rc.K * u.U - rc.A * u.V);
    std::copy(dU.data(), dU.data() + 4, dy.begin() + 3);
    std::copy(dV.data(), dV.data() + 4, dy.begin() + 7);
    const double s3 = s * s * s, s5 = s3 * s * s;
    Sym3 m3 = u.m3 * (1.0 / s3);
    Sym4 m4 = u.m4 * (1.0 / s5);
    Sym3 d3 = third_moment_rhs(m3, m2, u.m1, alpha);
    Sym4 d4 = fourth_moment_rhs(m4, m3, m2, u.m1, alpha);
    const double s4 = s3 * s, s6 = s5 * s;
    for (int p = 0; p < 4; ++p) dy[11 + p] = -3.0 * u.m3[p] + s4 * d3[p];
    for (int p = 0; p < 5; ++p) dy[15 + p] = -5.0 * u.m4[p] + s6 * d4[p];
  }
};

FullState full_initial(const MomentSet& f0, double m3scale, double m4scale) {
  FullState y{};
  y[0] = f0.m0;
  y[1] = f0.m1(0);
  y[2] = f0.m1(1);
  std::copy(f0.m2.data(), f0.m2.data() + 4, y.begin() + 3);
  Mat2 I = Mat2::Identity();
  std::copy(I.data(), I.data() + 4, y.begin() + 7);
  for (int p = 0; p < 4; ++p) y[11 + p] = f0.m3[p] * m3scale;
  for (int p = 0; p < 5; ++p) y[15 + p] = f0.m4[p] * m4scale;
  return y;
}

}  // namespace

MomentTrajectory integrate_moment_system(const MomentSet& f0, const AlphaWeights& alpha, const MomentOptions& opt) {
  double T = std::numeric_limits<double>::infinity();
  if (classify_gelation(f0, alpha) != GelBranch::no_gel) T = detect_blow_up(f0, alpha).T_star;
  return integrate_moment_system(f0, alpha, T, opt);
}

MomentTrajectory integrate_moment_system(const MomentSet& f0, const AlphaWeights& alpha, double T,
                                         const MomentOptions& opt) {
  MomentTrajectory traj;
  traj.T_star = T;
  const bool scaled = std::isfinite(T) && (opt.t_end <= 0.0 || opt.t_end >= T);
  auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<FullState>());
  if (scaled) {
    traj.scaled = true;
    traj.dtau = opt.dtau;
    const double tau_end = -std::log(opt.rel_stop);
    std::vector<double> taus;
    for (int k = 0; k * opt.dtau <= tau_end + 1e-12; ++k) taus.push_back(k * opt.dtau);
    FullState y = full_initial(f0, T * T * T, std::pow(T, 5));
    TauSystem sys{alpha, T};
    odeint::integrate_times(stepper, sys, y, taus.begin(), taus.end(), 1e-3, [&](const FullState& st, double tau) {
      Unpacked u = unpack(st);
      MomentSample smp;
      const double s = T * std::exp(-tau);
      smp.tau = tau;
      smp.t = T * -std::expm1(-tau);
      smp.U = u.U;
      smp.V = u.V;
      // s (U V^{-1}) via the adjugate keeps the cancellation in det V explicit
      Mat2 adj;
      adj << u.V(1, 1), -u.V(0, 1), -u.V(1, 0), u.V(0, 0);
      double detv = u.V.determinant();
      smp.m.m0 = u.m0;
      smp.m.m1 = u.m1;
      smp.m.m2 = sym_part(u.U * adj / detv);
      smp.s2 = s * smp.m.m2;
      smp.s3 = u.m3;
      smp.s4 = u.m4;
      smp.m.m3 = u.m3 * (1.0 / (s * s * s));
      smp.m.m4 = u.m4 * (1.0 / std::pow(s, 5));
      traj.samples.push_back(smp);
    });
  } else {
    double t_end = opt.t_end > 0.0 ? opt.t_end : 10.0;
    if (std::isfinite(T) && t_end >= T) throw std::invalid_argument("t_end beyond the blow-up time");
    std::vector<double> ts;
    for (int k = 0; k < opt.n_out; ++k) ts.push_back(t_end * k / std::max(1, opt.n_out - 1));
    FullState y = full_initial(f0, 1.0, 1.0);
    PhysSystem sys{alpha};
    odeint::integrate_times(stepper, sys, y, ts.begin(), ts.end(), 1e-4 * t_end, [&](const FullState& st, double t) {
      Unpacked u = unpack(st);
      MomentSample smp;
      smp.t = t;
      smp.U = u.U;
      smp.V = u.V;
      smp.m.m0 = u.m0;
      smp.m.m1 = u.m1;
      smp.m.m2 = sym_part(u.U * u.V.inverse());
      smp.m.m3 = u.m3;
      smp.m.m4 = u.m4;
      if (std::isfinite(T)) {
        double s = T - t;
        smp.tau = -std::log1p(-t / T);
        smp.s2 = s * smp.m.m2;
        smp.s3 = u.m3 * (s * s * s);
        smp.s4 = u.m4 * std::pow(s, 5);
      }
      traj.samples.push_back(smp);
    });
  }
  for (auto& smp : traj.samples)
    if (!std::isfinite(smp.m.m2.norm()) || !std::isfinite(smp.m.m4.norm()))
      throw NumericalError("moment integration produced non-finite values");
  return traj;
}

std::vector<Mat2> integrate_riccati_direct(const MomentSet& f0, const AlphaWeights& alpha,
                                           const std::vector<double>& times, double rtol, double atol) {
  using S = std::array<double, 5>;
  auto sys = [&](const S& y, S& dy, double) {
    Vec2 m1(y[0], y[1]);
    Mat2 m2;
    m2 << y[2], y[3], y[3], y[4];
    Vec2 d1 = first_moment_rhs(m1, alpha);
    Mat2 d2 = second_moment_rhs(m2, m1, alpha);
    dy = {d1(0), d1(1), d2(0, 0), d2(0, 1), d2(1, 1)};
  };
  S y{f0.m1(0), f0.m1(1), f0.m2(0, 0), f0.m2(0, 1), f0.m2(1, 1)};
  std::vector<Mat2> out;
  auto stepper = odeint::make_dense_output(atol, rtol, odeint::runge_kutta_dopri5<S>());
  odeint::integrate_times(stepper, sys, y, times.begin(), times.end(), 1e-5, [&](const S& st, double) {
    Mat2 m;
    m << st[2], st[3], st[3], st[4];
    out.push_back(m);
  });
  return out;
}

namespace {

// value at h = 0 of the polynomial through (h_k, v_k)
double neville_zero(const std::vector<double>& h, std::vector<double> v) {
  const std::size_t n = h.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i) v[i] = (h[i + m] * v[i] - h[i] * v[i + 1]) / (h[i + m] - h[i]);
  return v[0];
}

}  // namespace

ThetaFit extract_theta_c0(const MomentTrajectory& traj, double T) {
  if (!std::isfinite(T)) throw std::invalid_argument("theta extraction needs a finite blow-up time");
  // samples at T* - t = 2^{-k} T*/8, i.e. tau = (k+3) ln 2
  std::vector<const MomentSample*> pts;
  std::vector<double> hs;
  for (int k = 0;; ++k) {
    double tau = (k + 3) * kLn2;
    auto it = std::find_if(traj.samples.begin(), traj.samples.end(),
                           [&](const MomentSample& s) { return std::abs(s.tau - tau) < 1e-9; });
    if (it == traj.samples.end()) break;
    pts.push_back(&*it);
    hs.push_back(std::ldexp(1.0, -k));
  }
  // A window well away from T*: the residual error in T* is amplified by 1/(T*-t)
  // closest to the pole, while the polynomial extrapolation removes the O(T*-t) terms.
  const std::size_t k_lo = 5, k_hi = 10;
  if (pts.size() <= k_hi) throw NumericalError("trajectory does not resolve the geometric grid near T*");
  std::vector<double> h;
  std::vector<const MomentSample*> P;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    h.push_back(hs[k]);
    P.push_back(pts[k]);
  }

  ThetaFit fit;
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      std::vector<double> v;
      for (auto* p : P) v.push_back(p->s2(i, j));
      fit.residue(i, j) = fit.residue(j, i) = neville_zero(h, v);
    }
  for (int p = 0; p < 4; ++p) {
    std::vector<double> v;
    for (auto* q : P) v.push_back(q->s3[p]);
    fit.residue3[p] = neville_zero(h, v);
  }
  Eigen::SelfAdjointEigenSolver<Mat2> es(fit.residue);
  double lam = es.eigenvalues()(1);
  Vec2 v = es.eigenvectors().col(1);
  if (v.sum() < 0.0) v = -v;
  fit.theta = std::sqrt(std::max(lam, 0.0)) * v;
  fit.rank1_residual = (fit.residue - fit.theta * fit.theta.transpose()).norm() / fit.residue.norm();
  if (fit.rank1_residual > 1e-3) throw NumericalError("rank-1 fit of the second-moment residue failed");
  const double l1 = fit.theta.cwiseAbs().sum();
  double num = 0.0;
  for (int p = 0; p <= 3; ++p) num += Sym3::multiplicity(p) * fit.residue3[p];
  fit.c0 = num / (l1 * l1 * l1);
  fit.K0 = fit.c0 * l1;
  return fit;
}

void fill_report(GelationReport& rep, const ThetaFit& fit, const AlphaWeights& alpha) {
  rep.theta = fit.theta;
  rep.c0 = fit.c0;
  rep.K0 = fit.K0;
  rep.rank1_residual = fit.rank1_residual;
  rep.omega_theta = fit.theta / fit.theta.cwiseAbs().sum();
  rep.theta_K_theta = fit.theta.dot(combined_kernel(alpha) * fit.theta);
}

DichotomyReport check_dichotomy(const MomentTrajectory& traj) {
  if (traj.samples.size() < 2) throw std::invalid_argument("trajectory too short");
  DichotomyReport r;
  const MomentSample& last = traj.samples.back();
  r.t_last = last.t;
  r.m2_11_last = last.m.m2(0, 0);
  r.m2_22_last = last.m.m2(1, 1);
  for (auto& s : traj.samples)
    if (!std::isfinite(s.m.m2.norm())) {
      r.branch = "mixed";
      return r;
    }
  if (!traj.scaled) {
    r.growth_11 = r.m2_11_last / traj.samples.front().m.m2(0, 0);
    r.growth_22 = r.m2_22_last / traj.samples.front().m.m2(1, 1);
    r.branch = "both_bounded";
    return r;
  }
  // compare with the sample one decade further from T*
  double tau_ref = last.tau - std::log(10.0);
  const MomentSample* ref = &traj.samples.front();
  for (auto& s : traj.samples)
    if (s.tau <= tau_ref + 1e-12) ref = &s;
  r.growth_11 = r.m2_11_last / ref->m.m2(0, 0);
  r.growth_22 = r.m2_22_last / ref->m.m2(1, 1);
  bool d1 = r.growth_11 > 5.0, d2 = r.growth_22 > 5.0;
  bool b1 = r.growth_11 < 2.0, b2 = r.growth_22 < 2.0;
  if (d1 && d2)
    r.branch = "both_diverge";
  else if (b1 && b2)
    r.branch = "both_bounded";
  else
    r.branch = "mixed";
  return r;
}

}  // namespace rouleau
