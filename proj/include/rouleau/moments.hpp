#ifndef ROULEAU_MOMENTS_HPP
#define ROULEAU_MOMENTS_HPP

#include <limits>
#include <string>
#include <vector>

#include "rouleau/kernels.hpp"
#include "rouleau/measure.hpp"
#include "rouleau/tensor.hpp"

namespace rouleau {

struct MomentSet {
  double m0 = 0.0;
  Vec2 m1 = Vec2::Zero();
  Mat2 m2 = Mat2::Zero();
  Sym3 m3{};
  Sym4 m4{};
};

MomentSet extract_moments(const DiscreteMeasure& f, int order_max = 4);

double zeroth_moment_rhs(const Vec2& m1, const AlphaWeights& alpha);
Vec2 first_moment_rhs(const Vec2& m1, const AlphaWeights& alpha);

struct RiccatiCoefficients {
  Mat2 K, A, B;
};
RiccatiCoefficients riccati_coefficients(const Vec2& m1, const AlphaWeights& alpha);

Mat2 second_moment_rhs(const Mat2& m2, const Vec2& m1, const AlphaWeights& alpha);
Sym3 third_moment_rhs(const Sym3& m3, const Mat2& m2, const Vec2& m1, const AlphaWeights& alpha);
Sym4 fourth_moment_rhs(const Sym4& m4, const Sym3& m3, const Mat2& m2, const Vec2& m1, const AlphaWeights& alpha);

// d/dt M^n from the multinomial expansion of (z+z'+xi)^{\otimes n}.
// M[k] must hold the rank-k moment tensor for k = 0..n (M[0] unused for n > 0).
// With with_offsets=false every term carrying a power of xi is dropped.
Tensor moment_tensor_rhs(int n, const std::vector<Tensor>& M, const AlphaWeights& alpha, bool with_offsets = true);

// n P_n A(M^2, M^n): the part of d/dt M^n that is bilinear in (M^n, M^2).
Tensor leading_block(const Tensor& Mn, const Mat2& m2, const Mat2& K);

enum class GelBranch { alpha12, alpha1_cond, alpha3_cond, no_gel };
std::string to_string(GelBranch b);

struct GelationReport {
  bool gelates = false;
  GelBranch branch = GelBranch::no_gel;
  double T_star = std::numeric_limits<double>::infinity();
  Vec2 theta = Vec2::Zero();
  double c0 = 0.0;
  double K0 = 0.0;
  Vec2 omega_theta = Vec2::Zero();
  double rank1_residual = 0.0;
  double theta_K_theta = 0.0;
};

GelBranch classify_gelation(const MomentSet& f0, const AlphaWeights& alpha);

struct BlowUpOptions {
  double rtol = 1e-13;
  double atol = 1e-15;
  double root_rtol = 1e-10;
  double horizon = 0.0;  // 0: automatic
  int max_extensions = 40;
};

// First zero of det V along the linear Hamiltonian system, searched on [0, horizon].
// Returns +inf when no sign change is found.
double find_det_root(const MomentSet& f0, const AlphaWeights& alpha, double horizon, const BlowUpOptions& opt = {});

GelationReport detect_blow_up(const MomentSet& f0, const AlphaWeights& alpha, const BlowUpOptions& opt = {});

struct MomentSample {
  double t = 0.0;
  double tau = std::numeric_limits<double>::quiet_NaN();
  MomentSet m;
  // (T*-t) M^2, (T*-t)^3 M^3, (T*-t)^5 M^4 when T* is known
  Mat2 s2 = Mat2::Zero();
  Sym3 s3{};
  Sym4 s4{};
  Mat2 U = Mat2::Zero(), V = Mat2::Identity();
};

struct MomentTrajectory {
  std::vector<MomentSample> samples;
  double T_star = std::numeric_limits<double>::infinity();
  double dtau = 0.0;  // spacing of the tau grid when scaled
  bool scaled = false;
};

struct MomentOptions {
  double t_end = 0.0;      // 0: automatic (up to (T*-t)/T* = rel_stop when gelling, else 10)
  int n_out = 201;         // samples for the physical-time grid
  double rel_stop = 1e-6;
  double dtau = 0.0866433975699931636;  // ln2 / 8
  double rtol = 1e-12;
  double atol = 1e-14;
};

// Couples M^0..M^4. With a finite T* the system is integrated in tau = -ln(1 - t/T*)
// on rescaled variables, and M^2 comes from U V^{-1}.
MomentTrajectory integrate_moment_system(const MomentSet& f0, const AlphaWeights& alpha, const MomentOptions& opt = {});
MomentTrajectory integrate_moment_system(const MomentSet& f0, const AlphaWeights& alpha, double T_star,
                                         const MomentOptions& opt);

// Plain Riccati integration of (M^1, M^2) in physical time.
std::vector<Mat2> integrate_riccati_direct(const MomentSet& f0, const AlphaWeights& alpha,
                                           const std::vector<double>& times, double rtol = 1e-12,
                                           double atol = 1e-14);

struct ThetaFit {
  Vec2 theta = Vec2::Zero();
  double c0 = 0.0;
  double K0 = 0.0;
  double rank1_residual = 0.0;
  Mat2 residue = Mat2::Zero();  // extrapolated (T*-t) M^2
  Sym3 residue3{};
};

ThetaFit extract_theta_c0(const MomentTrajectory& traj, double T_star);
void fill_report(GelationReport& rep, const ThetaFit& fit, const AlphaWeights& alpha);

struct DichotomyReport {
  std::string branch;  // both_diverge | both_bounded | mixed
  double m2_11_last = 0.0;
  double m2_22_last = 0.0;
  double growth_11 = 1.0;
  double growth_22 = 1.0;
  double t_last = 0.0;
};

DichotomyReport check_dichotomy(const MomentTrajectory& traj);

}  // namespace rouleau

#endif
