#pragma once

#include <span>
#include <vector>

#include "treeweyl/bessel.hpp"
#include "treeweyl/chebfit.hpp"
#include "treeweyl/common.hpp"
#include "treeweyl/ode.hpp"

namespace treeweyl {

// ---------------------------------------------------------------------------
// Truncated series evaluation from coefficient vectors (endpoint or pointwise
// values). With every coefficient zero these reduce exactly to the
// zero-potential forms cos(rho x), sin(rho x)/rho, -rho sin(rho x), cos(rho x).
// ---------------------------------------------------------------------------

// cos(rho x) + sum_n (-1)^n g_n j_{2n}(rho x)
cplx eval_phi_series(cplx rho, double x, std::span<const double> g);
// sin(rho x)/rho + (1/rho) sum_n (-1)^n s_n j_{2n+1}(rho x)
cplx eval_S_series(cplx rho, double x, std::span<const double> s);
// -rho sin(rho x) + cos(rho x) Q/2 + sum_n (-1)^n gamma_n j_{2n}(rho x)
cplx eval_phi_prime_series(cplx rho, double x, double Q, std::span<const double> gamma);
// cos(rho x) + sin(rho x) Q/(2 rho) + (1/rho) sum_n (-1)^n sigma_n j_{2n+1}(rho x)
cplx eval_S_prime_series(cplx rho, double x, double Q, std::span<const double> sigma);
// sin(rho (x-L))/rho + (1/rho) sum_n (-1)^n t_n j_{2n+1}(rho (x-L))
cplx eval_T_series(cplx rho, double x, double L, std::span<const double> t);

// ---------------------------------------------------------------------------
// lambda = 0 solutions of -y'' + q y = 0 on [0, L] (direct integration).
// ---------------------------------------------------------------------------
struct Lambda0Solutions {
  std::vector<double> x;
  std::vector<double> phi0, phi0_p;  // phi(0,0)=1, phi'(0,0)=0
  std::vector<double> T0, T0_p;      // T(0,L)=0, T'(0,L)=1
};
Lambda0Solutions lambda0_solutions(const QFunc& q, double L, int G);

// ---------------------------------------------------------------------------
// Recurrent integration producing the series coefficients from a nonvanishing
// lambda = 0 solution f, f(0) = 1, h = f'(0).
// ---------------------------------------------------------------------------
struct RecurrenceState {
  std::vector<double> x;
  std::vector<cplx> f, f_p;
  cplx h = 0.0;
  std::vector<double> q;  // potential samples on x
  std::vector<double> Q;  // cumulative integral of q
  double L = 0.0;
};

// f = phi(0,.) + i T(0,.) normalized to f(0) = 1 when phi(0,L) is away from
// zero; otherwise the second solution comes from a backward Cauchy problem
// (y(L)=1, y'(L)=0), which stays clear of the Abel-formula blow-up. h is the
// 5-point one-sided stencil derivative of f at 0. Errors: VanishingF.
RecurrenceState build_nonvanishing_f(const std::vector<double>& phi0,
                                     const std::vector<double>& phi0_p,
                                     const std::vector<double>& T0,
                                     const std::vector<double>& T0_p,
                                     const std::vector<double>& q, double L);

// Coefficient grids of the representations through beta_n (values) and xi_n
// (derivatives): phi_h uses the even entries, S the odd ones. The potential's
// pure-initial-condition solution is assembled as phi = phi_h - h S.
struct NsbfCoeffs {
  double L = 0.0;
  cplx h = 0.0;
  int N = 0;  // series truncated at index N (orders up to 2N+1)
  std::vector<double> x;
  std::vector<double> Q;
  std::vector<std::vector<cplx>> beta;  // beta[n], n = 0..2N+1, grids over x
  std::vector<std::vector<cplx>> xi;

  // s_n and sigma_n are real for real potentials; the imaginary parts of the
  // odd-order entries cancel analytically and are dropped here.
  std::vector<double> s_at(double x) const;      // s_n(x), n = 0..N
  std::vector<double> sigma_at(double x) const;  // sigma_n(x), n = 0..N
  double Q_at(double x) const;

  cplx phi_h(cplx rho, double x) const;
  cplx phi_h_prime(cplx rho, double x) const;
  cplx S(cplx rho, double x) const;
  cplx S_prime(cplx rho, double x) const;
  cplx phi(cplx rho, double x) const { return phi_h(rho, x) - h * S(rho, x); }
  cplx phi_prime(cplx rho, double x) const {
    return phi_h_prime(rho, x) - h * S_prime(rho, x);
  }
};

NsbfCoeffs coefficients_from_f(const RecurrenceState& state, int N);

// Convenience: the full forward route q -> lambda0 -> f -> coefficients.
NsbfCoeffs forward_nsbf_coefficients(const QFunc& q, double L, int N, int G = 2001);

// ---------------------------------------------------------------------------
// Potential recovery from the first coefficient: q = g0'' / (g0 + 1), with a
// least-squares Chebyshev projection of g0 ahead of the differentiation.
// Errors: DenominatorNearZero.
// ---------------------------------------------------------------------------
struct RecoveredPotential {
  std::vector<double> x;
  std::vector<double> q;
  ChebFit g0_fit;
};
RecoveredPotential recover_q_from_g0(std::span<const double> x, std::span<const double> g0,
                                     double L, int max_degree = 80, int fixed_degree = -1,
                                     std::span<const PointConstraint> extra = {});

}  // namespace treeweyl
