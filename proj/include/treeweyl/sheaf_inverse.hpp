#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "treeweyl/nsbf.hpp"
#include "treeweyl/weyl.hpp"

namespace treeweyl {

struct SolverConfig {
  int N = 9;    // endpoint truncation order (N+1 coefficients per series)
  int Nc = -1;  // interior truncation order; defaults to N
  int K_D = 100, K_N = 100;  // eigenvalue counts used per edge
  int xm_points = 200;       // interior collocation points
  enum class Type2 { none, all };
  Type2 use_type2 = Type2::none;
  double sv_rel_cutoff = 1e-12;   // singular-value cutoff for least squares
  double drop_threshold = 1e-12;  // peeling denominator threshold
  double neg_tau_max = 10.0;      // probe window for negative eigenvalues
  int grid_G = 2001;              // grid for the coefficient recurrences
  int N_peel = -1;                // truncation for the peeling tables; defaults to N
  int max_fit_degree = 80;        // Chebyshev cap in the potential recovery
  int fixed_fit_degree = 22;      // projection degree; -1 re-enables the adaptive pick

  int nc() const { return Nc >= 0 ? Nc : N; }
  int n_peel() const { return N_peel >= 0 ? N_peel : N; }
};

// ---------------------------------------------------------------------------
// Step 1: endpoint coefficients {g_n(L_i)}, {s_n(L_i)} from the Weyl entries
// restricted to the sheaf leaves. One least-squares system per edge; the
// neighbour's s-coefficients ride along as auxiliary unknowns.
// Errors: InsufficientSamples, RankDeficient.
// ---------------------------------------------------------------------------
struct EndpointCoeffs {
  Eigen::VectorXd g, s, s_next;
  double residual = 0.0;  // ||Ax-b|| / ||b||
  double cond = 0.0;      // sigma_max / sigma_min over the kept spectrum
};

EndpointCoeffs solve_endpoint_coeffs(const WeylSamples& w, std::span<const int> sheaf_cols,
                                     std::span<const double> sheaf_lengths, int pos,
                                     const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Step 2: Dirichlet-Dirichlet roots mu_k (zeros of S_N(.,L)) and
// Neumann-Dirichlet roots nu_k (zeros of phi_N(.,L)); negative eigenvalues
// are probed on rho = i tau and stored as imaginary entries. Sorted by
// lambda = rho^2. Errors: RootCountShort.
// ---------------------------------------------------------------------------
struct Spectra {
  std::vector<cplx> mu, nu;
};
Spectra extract_spectra(std::span<const double> g_end, std::span<const double> s_end,
                        double L, const SolverConfig& cfg);

// Step 3a: t_n(0) from sum_n (-1)^n t_n(0) j_{2n+1}(mu_k L) = -sin(mu_k L).
Eigen::VectorXd solve_t0(std::span<const cplx> mu, double L, const SolverConfig& cfg);

// Step 3b: multiplier constants, 1/beta_k = T_N(nu_k, 0).
// Errors: DegenerateMultiplier.
std::vector<double> multipliers(std::span<const cplx> nu, const Eigen::VectorXd& t0,
                                double L);

// Step 3c: pointwise system for g_n(x_m), t_n(x_m) at the interior points,
// extended by g_0(0) = 0 and t_0(L) = 0 (plus the known endpoint values when
// provided). Errors: RankDeficient (per point, reported with x_m).
struct InteriorSolution {
  std::vector<double> x;            // 0, interior points, L
  Eigen::MatrixXd g, t;             // (Nc+1) rows, one column per x
  double max_residual = 0.0;
  double max_cond = 0.0;
};
InteriorSolution interior_solve(std::span<const cplx> nu, std::span<const double> beta,
                                double L, const SolverConfig& cfg,
                                std::optional<double> g0_at_L = std::nullopt,
                                std::optional<double> t0_at_0 = std::nullopt);

// Step 4 is recover_q_from_g0 (nsbf.hpp), applied to the interior g_0 grid.

// ---------------------------------------------------------------------------
// Step 5: endpoint functions phi_i, S_i and derivatives at L_i for the
// peeling step, via the nonvanishing solution built from
// phi(0,x) = g_0 + 1 and T(0,x) = (x - L)(t_0/3 + 1).
// ---------------------------------------------------------------------------
struct EndpointTables {
  std::vector<cplx> phi, S, phi_p, S_p;  // one entry per spectral point
  double wronskian_err = 0.0;            // max |phi S' - phi' S - 1| at L
};
EndpointTables endpoint_functions(const ChebFit& g0_fit, const ChebFit& t0_fit, double L,
                                  std::span<const cplx> rho, const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// The whole per-edge chain. sheaf_cols lists the matrix columns of the sheaf
// leaves in the current samples; pos indexes the edge being solved.
// ---------------------------------------------------------------------------
struct EdgeInverseResult {
  std::vector<double> x, q;
  ChebFit g0_fit, t0_fit;
  EndpointCoeffs endpoint;
  Spectra spectra;
  std::vector<double> beta;
  InteriorSolution interior;
  EndpointTables tables;  // filled only when with_tables
};
EdgeInverseResult solve_local_edge(const WeylSamples& w, std::span<const int> sheaf_cols,
                                   std::span<const double> sheaf_lengths, int pos,
                                   const SolverConfig& cfg, bool with_tables);

}  // namespace treeweyl
