#include "rouleau/laplace.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include "rouleau/errors.hpp"
#include "rouleau/lattice.hpp"
#include "rouleau/moments.hpp"

namespace rouleau {

double radial_laplace(const RadialMeasure& g, double rho) {
  if (rho < 0.0) throw ConfigError("radial_laplace: rho must be nonnegative");
  double s = 0.0;
  for (std::size_t j = 0; j < g.r.size(); ++j) s += g.w[j] * g.r[j] * -std::expm1(-g.r[j] * rho);
  return s;
}

double radial_laplace_drho(const RadialMeasure& g, double rho) {
  if (rho < 0.0) throw ConfigError("radial_laplace: rho must be nonnegative");
  double s = 0.0;
  for (std::size_t j = 0; j < g.r.size(); ++j) s += g.w[j] * g.r[j] * g.r[j] * std::exp(-g.r[j] * rho);
  return s;
}

double selfsim_target(double rho, double K0) { return 1.0 / std::sqrt(1.0 + 2.0 * K0 * rho); }

double fs_profile(double r, double K0) {
  if (!(r > 0.0)) throw ConfigError("fs_profile: r must be positive");
  return std::pow(2.0 * M_PI * K0, -0.5) * std::pow(r, -2.5) * std::exp(-r / (2.0 * K0));
}

double ginf_density(double r, double K0) {
  if (!(r > 0.0)) throw ConfigError("ginf_density: r must be positive");
  return std::exp(-r / (2.0 * K0)) / std::sqrt(2.0 * M_PI * K0 * r);
}

double q0(double rho, double K0) { return 0.5 * K0 * rho * rho + rho; }
double q0_inverse(double q, double K0) { return 2.0 * q / (1.0 + std::sqrt(1.0 + 2.0 * K0 * q)); }

std::vector<double> rho_grid(double rho_max, int n) {
  if (!(rho_max > 0.0) || n < 2) throw ConfigError("rho_grid: need rho_max > 0 and n >= 2");
  std::vector<double> g(n);
  for (int j = 0; j < n; ++j) g[j] = rho_max * (1.0 - std::cos(M_PI * j / (2.0 * (n - 1))));
  g[0] = 0.0;
  g[n - 1] = rho_max;
  return g;
}

double convergence_gap(const RadialMeasure& g, double K0, const std::vector<double>& rho) {
  double d = 0.0;
  for (double r : rho) d = std::max(d, std::abs(radial_laplace_drho(g, r) - selfsim_target(r, K0)));
  return d;
}

double profile_laplace_quadrature(double rho, double K0) {
  boost::math::quadrature::exp_sinh<double> q;
  const double a = rho + 1.0 / (2.0 * K0), pre = std::pow(2.0 * M_PI * K0, -0.5);
  return q.integrate([&](double r) { return pre * std::exp(-a * r) / std::sqrt(r); });
}

RemainderResult burgers_remainder(const std::vector<ScaledSnapshot>& traj, std::size_t k,
                                  const AlphaWeights& alpha, const Vec2& theta_in, const std::vector<double>& rho) {
  if (traj.size() < 3 || k >= traj.size()) throw NumericalError("burgers_remainder: insufficient snapshots");
  const Mat2 K = combined_kernel(alpha);
  const double tkt = theta_in.dot(K * theta_in);
  if (!(tkt > 0.0)) throw NumericalError("burgers_remainder: theta^T K theta must be positive");
  const Vec2 theta = theta_in / std::sqrt(tkt);
  const double n1 = theta.cwiseAbs().sum();
  const Vec2 om = theta / n1;

  std::vector<double> taus, Zs;
  for (const auto& F : traj) {
    taus.push_back(F.tau);
    Zs.push_back(F.Z);
  }
  const ScaledSnapshot& F = traj[k];
  const double Z = F.Z;
  const double Zdot = finite_difference(taus, Zs, k);
  const PolarProjection P = polar_project(F);

  RemainderResult out;
  out.rho = rho;
  for (double rh : rho) {
    std::vector<double> gh;
    for (const auto& S : traj) gh.push_back(radial_laplace(polar_project(S).g, rh));
    const double dtau = finite_difference(taus, gh, k);

    // r-moments of g and eta-moments of G against e^{-r rho}
    double ghat = 0, dg = 0, m1 = 0, E1 = 0;
    Vec2 A = Vec2::Zero(), B = Vec2::Zero(), C = Vec2::Zero();
    for (std::size_t j = 0; j < P.g.r.size(); ++j) {
      const double r = P.g.r[j], w = P.g.w[j], e = std::exp(-r * rh);
      ghat += w * r * -std::expm1(-r * rh);
      dg += w * r * r * e;
      m1 += w * r;
      E1 += w * r * e;
      A += P.G[j].weta;
      B += P.G[j].weta * e;
      C += P.G[j].weta * (r * e);
    }
    double R = -Zdot / Z * ghat + (Z / (n1 * n1) - 1.0) * ghat * dg;
    for (int i = 1; i <= 3; ++i) {
      if (alpha[i] == 0.0) continue;
      const Mat2& Ki = kernel_matrix(i);
      const double del = shift_delta(i, F.tau, F.T_star);
      const double ed = std::exp(del * rh), omd = -std::expm1(del * rh);
      const double kap = om.dot(Ki * om);
      // h1 + h2 against g g'
      const double hg = omd * dg * E1 - 0.5 * del * (m1 * m1 - ed * E1 * E1);
      R += alpha[i] * Z * kap * hg;
      // kernel difference against G G' on h1 + h2 + h3
      const double vec = omd * C.dot(Ki * B) - 0.5 * del * (A.dot(Ki * A) - ed * B.dot(Ki * B)) + C.dot(Ki * (A - B));
      const double a = Z * m1, b = Z * E1, c = Z * dg;
      const double sca = omd * c * b - 0.5 * del * (a * a - ed * b * b) + c * (a - b);
      R += alpha[i] / Z * (vec - kap * sca);
    }
    out.R.push_back(R);
    out.identity.push_back(dtau - ghat - (ghat - 2.0 * rh) * dg - R);
    if (rh > 0.0) out.max_R_over_rho = std::max(out.max_R_over_rho, std::abs(R) / rh);
  }
  return out;
}

Vec2 vector_laplace(const DiscreteMeasure& f, const Vec2& zeta) {
  Vec2 s = Vec2::Zero();
  for (const auto& [z, w] : f) s += w * z.vec() * -std::expm1(-z.vec().dot(zeta));
  return s;
}

namespace {

using State = std::array<double, 6>;  // Z, F, M^1

struct CharSystem {
  AlphaWeights alpha;
  int sign;
  void operator()(const State& x, State& dx, double) const {
    const Vec2 Z(x[0], x[1]), F(x[2], x[3]), M(x[4], x[5]);
    Vec2 b = Vec2::Zero(), c = Vec2::Zero();
    for (int i = 1; i <= 3; ++i) {
      if (alpha[i] == 0.0) continue;
      const Mat2& Ki = kernel_matrix(i);
      const Vec2 xi = reaction_offset(i).cast<double>();
      const double ex = std::exp(-xi.dot(Z));
      b += alpha[i] * Ki * (F + (1.0 - ex) * (M - F));
      c += alpha[i] * 0.5 * (M.dot(Ki * M) - (M - F).dot(Ki * (M - F)) * ex) * xi;
    }
    const Vec2 dm = first_moment_rhs(M, alpha);
    dx = {sign * b(0), sign * b(1), c(0), c(1), dm(0), dm(1)};
  }
};

// integrates one characteristic; false if it leaves the quadrant or blows up
bool trace(const CharSystem& sys, const DiscreteMeasure& f0, const Vec2& zeta0, const Vec2& m1, double t_end,
           Vec2& Z, Vec2& F) {
  namespace ode = boost::numeric::odeint;
  const Vec2 F0 = vector_laplace(f0, zeta0);
  State x = {zeta0(0), zeta0(1), F0(0), F0(1), m1(0), m1(1)};
  bool ok = true;
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  double t = 0.0, dt = t_end / 100.0;
  while (t < t_end && ok) {
    dt = std::min(dt, t_end - t);
    if (stepper.try_step(sys, x, t, dt) == ode::success) {
      if (x[0] < 0.0 || x[1] < 0.0 || !std::isfinite(x[2]) || !std::isfinite(x[3])) ok = false;
    } else if (dt < 1e-15 * t_end) {
      ok = false;
    }
  }
  Z = Vec2(x[0], x[1]);
  F = Vec2(x[2], x[3]);
  return ok;
}

}  // namespace

std::vector<CharacteristicPoint> laplace_characteristics(const DiscreteMeasure& f0, const AlphaWeights& alpha,
                                                         const std::vector<Vec2>& zetas, double t_end, int sign) {
  if (sign != 1 && sign != -1) throw ConfigError("laplace_characteristics: sign must be +1 or -1");
  if (!(t_end >= 0.0)) throw ConfigError("laplace_characteristics: t_end must be nonnegative");
  const MomentSet m = extract_moments(f0, 1);
  const CharSystem sys{alpha, sign};
  std::vector<CharacteristicPoint> out;
  for (const Vec2& target : zetas) {
    CharacteristicPoint cp;
    cp.zeta = target;
    if (target(0) < 0.0 || target(1) < 0.0) throw ConfigError("laplace_characteristics: zeta outside the quadrant");
    if (t_end == 0.0) {
      cp.fhat = vector_laplace(f0, target);
      cp.zeta0 = target;
      cp.ok = true;
      out.push_back(cp);
      continue;
    }
    Vec2 z0 = target, Z, F;
    const double tol = 1e-12 * std::max(1.0, target.norm());
    for (int it = 0; it < 50; ++it) {
      cp.iterations = it + 1;
      if (!trace(sys, f0, z0, m.m1, t_end, Z, F)) break;
      Vec2 res = Z - target;
      if (res.norm() <= tol) {
        cp.ok = true;
        cp.fhat = F;
        cp.zeta0 = z0;
        break;
      }
      Mat2 J;
      bool jac_ok = true;
      for (int d = 0; d < 2; ++d) {
        Vec2 zp = z0;
        double h = 1e-7 * std::max(1.0, std::abs(z0(d)));
        zp(d) += h;
        Vec2 Zp, Fp;
        jac_ok = jac_ok && trace(sys, f0, zp, m.m1, t_end, Zp, Fp);
        J.col(d) = (Zp - Z) / h;
      }
      if (!jac_ok || std::abs(J.determinant()) < 1e-300) break;
      Vec2 step = J.fullPivLu().solve(res);
      double lam = 1.0;
      while ((z0 - lam * step).minCoeff() < 0.0 && lam > 1e-6) lam *= 0.5;
      z0 -= lam * step;
    }
    out.push_back(cp);
  }
  return out;
}

SignResolution resolve_characteristic_sign(const DiscreteMeasure& f0, const AlphaWeights& alpha, double h,
                                           const Vec2& zeta) {
  int ext = 2;
  for (const auto& [z, w] : f0) ext = std::max({ext, z.c, z.a});
  LatticeOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-16;
  LatticeSolver solver(alpha, std::max(64.0, 8.0 * ext), opt);
  SolverState s = solver.init(f0);
  solver.advance_to(s, h);
  const Vec2 direct = vector_laplace(s.measure(), zeta);
  SignResolution r;
  auto m = laplace_characteristics(f0, alpha, {zeta}, h, -1);
  auto p = laplace_characteristics(f0, alpha, {zeta}, h, +1);
  r.err_minus = m[0].ok ? (m[0].fhat - direct).norm() : std::numeric_limits<double>::infinity();
  r.err_plus = p[0].ok ? (p[0].fhat - direct).norm() : std::numeric_limits<double>::infinity();
  r.sign = r.err_minus <= r.err_plus ? -1 : 1;
  return r;
}

}  // namespace rouleau
