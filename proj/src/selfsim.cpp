#include "rouleau/selfsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rouleau/errors.hpp"

namespace rouleau {

namespace {

void finish(ScaledSnapshot& F) {
  F.Z = F.m.m2.sum();
}

// moments of F from those of f: M^k(F) = s^(2k-3) M^k(f), s = T*-t
MomentSet scale_moments(const MomentSet& m, double s) {
  MomentSet r;
  r.m0 = m.m0 * std::pow(s, -3);
  r.m1 = m.m1 * std::pow(s, -1);
  r.m2 = m.m2 * s;
  r.m3 = m.m3 * std::pow(s, 3);
  r.m4 = m.m4 * std::pow(s, 5);
  return r;
}

void check_time(double t, double T_star) {
  if (!(T_star > 0.0) || !std::isfinite(T_star)) throw ConfigError("rescale: T* must be finite and positive");
  if (!(t >= 0.0) || !(t < T_star)) throw ConfigError("rescale: need 0 <= t < T*");
}

}  // namespace

ScaledSnapshot ScaledSnapshot::from_points(const std::vector<std::pair<Vec2, double>>& pts, double tau,
                                           double T_star) {
  ScaledSnapshot F;
  F.tau = tau;
  F.T_star = T_star;
  F.t = T_star * (1.0 - std::exp(-tau));
  F.scale = std::pow(T_star - F.t, 2);
  std::map<double, ShellPoint> sh;
  for (const auto& [eta, w] : pts) {
    double r = eta.sum();
    auto& p = sh[r];
    p.r = r;
    p.w += w;
    p.weta += w * eta;
    p.weta2 += w * eta.squaredNorm();
    F.m.m0 += w;
    F.m.m1 += w * eta;
    F.m.m2 += w * eta * eta.transpose();
    F.m.m3 += Sym3::power(eta) * w;
    F.m.m4 += Sym4::power(eta) * w;
  }
  for (auto& [r, p] : sh) F.shells.push_back(p);
  finish(F);
  return F;
}

ScaledSnapshot rescale(const DiscreteMeasure& f, double t, double T_star) {
  return rescale(LatticeDensity::from_measure(f), t, T_star);
}

ScaledSnapshot rescale(const LatticeDensity& f, double t, double T_star) {
  check_time(t, T_star);
  ScaledSnapshot F;
  F.t = t;
  F.T_star = T_star;
  F.tau = -std::log1p(-t / T_star);
  const double s = T_star - t;
  F.scale = s * s;
  const double iw = std::pow(s, -3);
  // shell n = c + a
  std::vector<ShellPoint> sh(std::size_t(f.nc + f.na + 4));
  for (int i = 0; i < f.nc; ++i)
    for (int j = 0; j < f.na; ++j) {
      double w = f.at(i, j);
      if (w == 0.0) continue;
      double c = i + 2, a = j + 2;
      auto& p = sh[std::size_t(i + j + 4)];
      p.w += w;
      p.weta += w * Vec2(c, a);
      p.weta2 += w * (c * c + a * a);
    }
  for (std::size_t n = 0; n < sh.size(); ++n) {
    if (sh[n].w == 0.0) continue;
    ShellPoint p = sh[n];
    p.r = double(n) * F.scale;
    p.w *= iw;
    p.weta *= iw * F.scale;
    p.weta2 *= iw * F.scale * F.scale;
    F.shells.push_back(p);
  }
  F.m = scale_moments(f.moments(4), s);
  finish(F);
  return F;
}

double localization_integral(const ScaledSnapshot& F, const Vec2& theta, int p) {
  if (p != 2 && p != 3) throw ConfigError("localization_integral: p must be 2 or 3");
  double n1 = std::abs(theta(0)) + std::abs(theta(1));
  if (n1 == 0.0) throw ConfigError("localization_integral: zero theta");
  const Vec2 om = theta / n1;
  double s = 0.0;
  for (const auto& q : F.shells) {
    double d = q.weta2 / (q.r * q.r) - 2.0 * om.dot(q.weta) / q.r + q.w * om.squaredNorm();
    s += std::pow(q.r, p) * std::max(d, 0.0);
  }
  return s;
}

double RadialMeasure::moment(int k) const {
  double s = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) s += w[j] * std::pow(r[j], k);
  return s;
}

PolarProjection polar_project(const ScaledSnapshot& F) {
  if (!(F.Z > 0.0)) throw NumericalError("polar_project: Z must be positive");
  PolarProjection P;
  P.Z = F.Z;
  P.G = F.shells;
  for (const auto& q : F.shells) {
    P.g.r.push_back(q.r);
    P.g.w.push_back(q.w / F.Z);
  }
  return P;
}

double shift_delta(int i, double tau, double T_star) {
  return zeta(i) * T_star * T_star * std::exp(-2.0 * tau);
}

double finite_difference(const std::vector<double>& x, const std::vector<double>& y, std::size_t k) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || k >= n) throw NumericalError("finite_difference: not enough samples");
  std::size_t m = std::min<std::size_t>(5, n);
  std::size_t lo = k >= m / 2 ? k - m / 2 : 0;
  lo = std::min(lo, n - m);
  // Fornberg weights for the first derivative at x[k]
  const double x0 = x[k];
  std::vector<std::vector<double>> c(m, std::vector<double>(2, 0.0));
  double c1 = 1.0, c4 = x[lo] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < m; ++i) {
    std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0, c5 = c4;
    c4 = x[lo + i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      double c3 = x[lo + i] - x[lo + j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t q = mn; q >= 1; --q) c[i][q] = c1 * (double(q) * c[i - 1][q - 1] - c5 * c[i - 1][q]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t q = mn; q >= 1; --q) c[j][q] = (c4 * c[j][q] - double(q) * c[j][q - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  double d = 0.0;
  for (std::size_t i = 0; i < m; ++i) d += c[i][1] * y[lo + i];
  return d;
}

ProjectedResidual projected_equation_residual(const std::vector<ScaledSnapshot>& traj, std::size_t k,
                                              const AlphaWeights& alpha, const Vec2& theta,
                                              const std::vector<double>& rho) {
  if (traj.size() < 3 || k >= traj.size()) throw NumericalError("projected_equation_residual: insufficient snapshots");
  ProjectedResidual out;
  out.rho = rho;
  std::vector<double> taus, Zs;
  for (const auto& F : traj) {
    taus.push_back(F.tau);
    Zs.push_back(F.Z);
  }
  const ScaledSnapshot& F = traj[k];
  const double Z = F.Z;
  if (!(Z > 0.0)) return out;  // zero measure: both sides vanish
  const double Zdot = finite_difference(taus, Zs, k);
  const double n1 = std::abs(theta(0)) + std::abs(theta(1));
  const Vec2 om = theta / n1;
  const PolarProjection P = polar_project(F);

  for (double rh : rho) {
    std::vector<double> phis;
    for (const auto& S : traj) {
      double s = 0.0;
      for (const auto& q : S.shells) s += q.w * (1.0 - std::exp(-q.r * rh));
      phis.push_back(S.Z > 0.0 ? s / S.Z : 0.0);
    }
    const double lhs = finite_difference(taus, phis, k);

    double ip = 0.0, irp = 0.0, m1 = 0.0, E1 = 0.0;
    Vec2 A = Vec2::Zero(), B = Vec2::Zero();
    for (std::size_t j = 0; j < P.g.r.size(); ++j) {
      double r = P.g.r[j], w = P.g.w[j], e = std::exp(-r * rh);
      ip += w * (1.0 - e);
      irp += w * r * rh * e;  // r phi'(r)
      m1 += w * r;
      E1 += w * r * e;
      A += P.G[j].weta;
      B += P.G[j].weta * e;
    }
    double rhs = 3.0 * ip - 2.0 * irp - Zdot / Z * ip;
    for (int i = 1; i <= 3; ++i) {
      if (alpha[i] == 0.0) continue;
      const Mat2& Ki = kernel_matrix(i);
      const double eds = std::exp(shift_delta(i, F.tau, F.T_star) * rh);
      const double kap = om.dot(Ki * om);
      // localized kernel on g
      rhs += 0.5 * alpha[i] * Z * kap * (-m1 * m1 + 2.0 * m1 * E1 - eds * E1 * E1);
      // kernel difference on G
      double full = -A.dot(Ki * A) + 2.0 * A.dot(Ki * B) - eds * B.dot(Ki * B);
      double loc = kap * Z * Z * (-m1 * m1 + 2.0 * m1 * E1 - eds * E1 * E1);
      rhs += 0.5 * alpha[i] / Z * (full - loc);
    }
    out.lhs.push_back(lhs);
    out.rhs.push_back(rhs);
    out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs));
  }
  return out;
}

SelfsimRow selfsim_diagnostics(const ScaledSnapshot& F, const Vec2& theta, double c0) {
  SelfsimRow r;
  r.tau = F.tau;
  r.Z = F.Z;
  r.m2_dev = (F.m.m2 - theta * theta.transpose()).norm();
  r.m3_dev = (F.m.m3 - Sym3::power(theta) * c0).norm();
  r.m4_norm = F.m.m4.norm();
  r.loc_p2 = localization_integral(F, theta, 2);
  r.loc_p3 = localization_integral(F, theta, 3);
  return r;
}

double fit_decay_exponent(const std::vector<double>& tau, const std::vector<double>& y, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < tau.size(); ++k) {
    if (tau[k] < lo - 1e-12 || tau[k] > hi + 1e-12 || !(y[k] > 0.0)) continue;
    double ly = std::log(y[k]);
    sx += tau[k];
    sy += ly;
    sxx += tau[k] * tau[k];
    sxy += tau[k] * ly;
    ++n;
  }
  if (n < 2) throw NumericalError("fit_decay_exponent: fewer than two usable points");
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

}  // namespace rouleau
