#include "treeweyl/sheaf_inverse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "treeweyl/quadrature.hpp"

namespace treeweyl {

namespace {

struct LsqResult {
  Eigen::VectorXd x;
  double residual = 0.0;
  double cond = 0.0;
  int rank = 0;
};

// Real least squares with singular-value cutoff relative to sigma_max.
LsqResult solve_lsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double rel_cutoff) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rel_cutoff);
  LsqResult r;
  r.x = svd.solve(b);
  r.rank = static_cast<int>(svd.rank());
  const auto& sv = svd.singularValues();
  if (sv.size() > 0 && r.rank > 0) r.cond = sv(0) / sv(r.rank - 1);
  r.residual = (A * r.x - b).norm() / std::max(1.0, b.norm());
  return r;
}

// Stacks the real and imaginary parts of complex equations.
void append_complex_rows(std::vector<Eigen::VectorXcd>& rows, std::vector<cplx>& rhs,
                         Eigen::MatrixXd& A, Eigen::VectorXd& b) {
  const int n = static_cast<int>(rows.size());
  const int cols = n > 0 ? static_cast<int>(rows[0].size()) : 0;
  A.resize(2 * n, cols);
  b.resize(2 * n);
  for (int k = 0; k < n; ++k) {
    A.row(2 * k) = rows[k].real().transpose();
    A.row(2 * k + 1) = rows[k].imag().transpose();
    b(2 * k) = rhs[k].real();
    b(2 * k + 1) = rhs[k].imag();
  }
}

}  // namespace

EndpointCoeffs solve_endpoint_coeffs(const WeylSamples& w, std::span<const int> sheaf_cols,
                                     std::span<const double> sheaf_lengths, int pos,
                                     const SolverConfig& cfg) {
  const int m1 = static_cast<int>(sheaf_cols.size());
  const int N = cfg.N;
  const int K = w.K();
  require(m1 >= 1 && pos >= 0 && pos < m1, "BadConfig", "solve_endpoint_coeffs: bad position");
  require(sheaf_lengths.size() == sheaf_cols.size(), "BadConfig", "lengths/cols mismatch");

  int needed;
  if (m1 == 1)
    needed = 2 * (N + 1);
  else if (cfg.use_type2 == SolverConfig::Type2::all && m1 > 2)
    needed = (m1 + 1) * (N + 1 + m1 - 2) / (m1 - 1);  // ceil((m1+1)(N+1)/(m1-1))
  else
    needed = 3 * (N + 1);
  require(K >= needed, "InsufficientSamples",
          "need K >= " + std::to_string(needed) + " samples, have " + std::to_string(K));

  const double Li = sheaf_lengths[pos];
  const int ci = sheaf_cols[pos];
  std::vector<Eigen::VectorXcd> rows;
  std::vector<cplx> rhs;

  auto sj_block = [&](Eigen::VectorXcd& row, int offset, cplx factor, cplx rho, double L) {
    const auto j = sph_bessel_j_all(2 * N + 1, rho * L);
    double sign = 1.0;
    for (int n = 0; n <= N; ++n, sign = -sign) row(offset + n) += factor * sign * j[2 * n + 1];
  };

  if (m1 == 1) {
    // single-interval boundary data: phi_i(rho,L) + M_ii S_i(rho,L) = 0
    for (int k = 0; k < K; ++k) {
      const cplx rho = w.rho[k];
      const cplx Mii = w.M[k](ci, ci);
      Eigen::VectorXcd row = Eigen::VectorXcd::Zero(2 * (N + 1));
      const auto j = sph_bessel_j_all(2 * N + 1, rho * Li);
      double sign = 1.0;
      for (int n = 0; n <= N; ++n, sign = -sign) row(n) = rho * sign * j[2 * n];
      sj_block(row, N + 1, Mii, rho, Li);
      rows.push_back(row);
      rhs.push_back(-rho * std::cos(rho * Li) - Mii * std::sin(rho * Li));
    }
  } else if (cfg.use_type2 == SolverConfig::Type2::none) {
    const int nxt = (pos + 1) % m1;
    const double Ln = sheaf_lengths[nxt];
    const int cn = sheaf_cols[nxt];
    for (int k = 0; k < K; ++k) {
      const cplx rho = w.rho[k];
      const cplx Mii = w.M[k](ci, ci);
      const cplx Min = w.M[k](ci, cn);
      Eigen::VectorXcd row = Eigen::VectorXcd::Zero(3 * (N + 1));
      const auto j = sph_bessel_j_all(2 * N + 1, rho * Li);
      double sign = 1.0;
      for (int n = 0; n <= N; ++n, sign = -sign) row(n) = rho * sign * j[2 * n];
      sj_block(row, N + 1, Mii, rho, Li);
      sj_block(row, 2 * (N + 1), -Min, rho, Ln);
      rows.push_back(row);
      rhs.push_back(Min * std::sin(rho * Ln) - rho * std::cos(rho * Li) -
                    Mii * std::sin(rho * Li));
    }
  } else {
    // unknowns [g_i | s_1 .. s_m1]
    const int cols = (m1 + 1) * (N + 1);
    auto s_offset = [&](int t) { return (1 + t) * (N + 1); };
    for (int k = 0; k < K; ++k) {
      const cplx rho = w.rho[k];
      {
        const int nxt = (pos + 1) % m1;
        const cplx Mii = w.M[k](ci, ci);
        const cplx Min = w.M[k](ci, sheaf_cols[nxt]);
        Eigen::VectorXcd row = Eigen::VectorXcd::Zero(cols);
        const auto j = sph_bessel_j_all(2 * N + 1, rho * Li);
        double sign = 1.0;
        for (int n = 0; n <= N; ++n, sign = -sign) row(n) = rho * sign * j[2 * n];
        sj_block(row, s_offset(pos), Mii, rho, Li);
        sj_block(row, s_offset(nxt), -Min, rho, sheaf_lengths[nxt]);
        rows.push_back(row);
        rhs.push_back(Min * std::sin(rho * sheaf_lengths[nxt]) - rho * std::cos(rho * Li) -
                      Mii * std::sin(rho * Li));
      }
      for (int t = 0; t < m1; ++t) {
        const int u = (t + 1) % m1;
        if (t == pos || u == pos) continue;
        const cplx Mit = w.M[k](ci, sheaf_cols[t]);
        const cplx Miu = w.M[k](ci, sheaf_cols[u]);
        Eigen::VectorXcd row = Eigen::VectorXcd::Zero(cols);
        sj_block(row, s_offset(t), Mit, rho, sheaf_lengths[t]);
        sj_block(row, s_offset(u), -Miu, rho, sheaf_lengths[u]);
        rows.push_back(row);
        rhs.push_back(Miu * std::sin(rho * sheaf_lengths[u]) - Mit * std::sin(rho * sheaf_lengths[t]));
      }
    }
  }

  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  append_complex_rows(rows, rhs, A, b);
  const auto sol = solve_lsq(A, b, cfg.sv_rel_cutoff);
  require(sol.rank == A.cols(), "RankDeficient",
          "endpoint system rank " + std::to_string(sol.rank) + " < " +
              std::to_string(A.cols()) + " (cond " + std::to_string(sol.cond) + ")");

  EndpointCoeffs out;
  out.residual = sol.residual;
  out.cond = sol.cond;
  out.g = sol.x.segment(0, N + 1);
  if (m1 == 1) {
    out.s = sol.x.segment(N + 1, N + 1);
  } else if (cfg.use_type2 == SolverConfig::Type2::none) {
    out.s = sol.x.segment(N + 1, N + 1);
    out.s_next = sol.x.segment(2 * (N + 1), N + 1);
  } else {
    out.s = sol.x.segment((1 + pos) * (N + 1), N + 1);
    out.s_next = sol.x.segment((1 + (pos + 1) % m1) * (N + 1), N + 1);
  }
  return out;
}

namespace {

// Brackets sign changes of F on (lo, hi] and refines each root by bisection
// with a short secant polish.
std::vector<double> scan_roots(const std::function<double(double)>& F, double lo, double hi,
                               double step, int want) {
  std::vector<double> roots;
  double xa = lo, fa = F(xa);
  for (double xb = lo + step; xb <= hi + 0.5 * step && static_cast<int>(roots.size()) < want;
       xb += step) {
    double fb = F(std::min(xb, hi));
    if (fa == 0.0) roots.push_back(xa);
    if (fa * fb < 0.0) {
      double a = xa, b = std::min(xb, hi), va = fa, vb = fb;
      for (int it = 0; it < 80 && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
        const double c = 0.5 * (a + b), vc = F(c);
        if (vc == 0.0) {
          a = b = c;
          break;
        }
        if (va * vc < 0.0) {
          b = c;
          vb = vc;
        } else {
          a = c;
          va = vc;
        }
      }
      double r = 0.5 * (a + b);
      for (int it = 0; it < 2; ++it) {  // secant polish inside the bracket
        const double fr = F(r);
        const double denom = (vb - va);
        if (denom == 0.0) break;
        double rn = r - fr * (b - a) / denom;
        if (rn <= a || rn >= b) break;
        r = rn;
      }
      roots.push_back(r);
    }
    xa = std::min(xb, hi);
    fa = fb;
  }
  return roots;
}

}  // namespace

Spectra extract_spectra(std::span<const double> g_end, std::span<const double> s_end,
                        double L, const SolverConfig& cfg) {
  require(!g_end.empty() && !s_end.empty(), "BadConfig", "extract_spectra: empty coefficients");
  auto SN = [&](double r) { return eval_S_series(cplx(r, 0.0), L, s_end).real(); };
  auto phiN = [&](double r) { return eval_phi_series(cplx(r, 0.0), L, g_end).real(); };
  auto SN_neg = [&](double tau) { return eval_S_series(cplx(0.0, tau), L, s_end).real(); };
  auto phiN_neg = [&](double tau) { return eval_phi_series(cplx(0.0, tau), L, g_end).real(); };

  const double step = M_PI / (8.0 * L);
  Spectra out;
  // negative-eigenvalue probe on rho = i tau (lambda = -tau^2), largest first
  auto neg_mu = scan_roots(SN_neg, 1e-4, cfg.neg_tau_max, 0.05, 4);
  auto neg_nu = scan_roots(phiN_neg, 1e-4, cfg.neg_tau_max, 0.05, 4);
  for (auto it = neg_mu.rbegin(); it != neg_mu.rend(); ++it) out.mu.push_back(cplx(0.0, *it));
  for (auto it = neg_nu.rbegin(); it != neg_nu.rend(); ++it) out.nu.push_back(cplx(0.0, *it));

  const int need_mu = cfg.K_D - static_cast<int>(out.mu.size());
  const int need_nu = cfg.K_N - static_cast<int>(out.nu.size());
  auto pos_mu = scan_roots(SN, 0.25 * step, (cfg.K_D + 2) * M_PI / L, step, need_mu);
  auto pos_nu = scan_roots(phiN, 0.25 * step, (cfg.K_N + 2) * M_PI / L, step, need_nu);
  for (double r : pos_mu) out.mu.push_back(cplx(r, 0.0));
  for (double r : pos_nu) out.nu.push_back(cplx(r, 0.0));

  require(static_cast<int>(out.mu.size()) >= cfg.K_D, "RootCountShort",
          "found " + std::to_string(out.mu.size()) + " Dirichlet-Dirichlet roots, wanted " +
              std::to_string(cfg.K_D));
  require(static_cast<int>(out.nu.size()) >= cfg.K_N, "RootCountShort",
          "found " + std::to_string(out.nu.size()) + " Neumann-Dirichlet roots, wanted " +
              std::to_string(cfg.K_N));
  out.mu.resize(cfg.K_D);
  out.nu.resize(cfg.K_N);
  return out;
}

Eigen::VectorXd solve_t0(std::span<const cplx> mu, double L, const SolverConfig& cfg) {
  const int N = cfg.N;
  require(static_cast<int>(mu.size()) >= N + 1, "InsufficientSamples",
          "solve_t0: need at least N+1 Dirichlet roots");
  std::vector<Eigen::VectorXcd> rows;
  std::vector<cplx> rhs;
  for (const cplx& m : mu) {
    Eigen::VectorXcd row(N + 1);
    const auto j = sph_bessel_j_all(2 * N + 1, m * L);
    double sign = 1.0;
    for (int n = 0; n <= N; ++n, sign = -sign) row(n) = sign * j[2 * n + 1];
    rows.push_back(row);
    rhs.push_back(-std::sin(m * L));
  }
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  append_complex_rows(rows, rhs, A, b);
  const auto sol = solve_lsq(A, b, cfg.sv_rel_cutoff);
  require(sol.rank == N + 1, "RankDeficient",
          "t0 system rank " + std::to_string(sol.rank) + " < " + std::to_string(N + 1));
  return sol.x;
}

std::vector<double> multipliers(std::span<const cplx> nu, const Eigen::VectorXd& t0, double L) {
  std::vector<double> beta(nu.size());
  std::span<const double> tspan(t0.data(), static_cast<size_t>(t0.size()));
  for (size_t k = 0; k < nu.size(); ++k) {
    const cplx inv = eval_T_series(nu[k], 0.0, L, tspan);
    require(std::abs(inv) >= 1e-12, "DegenerateMultiplier",
            "T_N(nu_k, 0) ~ 0 at k = " + std::to_string(k));
    beta[k] = 1.0 / inv.real();
  }
  return beta;
}

InteriorSolution interior_solve(std::span<const cplx> nu, std::span<const double> beta,
                                double L, const SolverConfig& cfg,
                                std::optional<double> g0_at_L, std::optional<double> t0_at_0) {
  const int Nc = cfg.nc();
  const int KN = static_cast<int>(nu.size());
  require(KN >= 2 * (Nc + 1), "InsufficientSamples",
          "interior_solve: K_N >= 2(Nc+1) required");
  require(beta.size() == nu.size(), "BadConfig", "interior_solve: beta/nu mismatch");

  const int M = cfg.xm_points;
  InteriorSolution out;
  out.x.resize(M + 2);
  out.g.setZero(Nc + 1, M + 2);
  out.t.setZero(Nc + 1, M + 2);
  out.x[0] = 0.0;
  out.x[M + 1] = L;

  for (int mi = 1; mi <= M; ++mi) {
    const double x = L * mi / static_cast<double>(M + 1);
    out.x[mi] = x;
    std::vector<Eigen::VectorXcd> rows;
    std::vector<cplx> rhs;
    for (int k = 0; k < KN; ++k) {
      const cplx v = nu[k];
      Eigen::VectorXcd row(2 * (Nc + 1));
      const auto ja = sph_bessel_j_all(2 * Nc + 1, v * x);
      const cplx wb = v * (x - L);
      double sign = 1.0;
      for (int n = 0; n <= Nc; ++n, sign = -sign) {
        row(n) = sign * ja[2 * n];
        // (beta/nu) j_{2n+1}(nu (x-L)) = beta (x-L) [j_{2n+1}(w)/w], w = nu (x-L)
        row(Nc + 1 + n) = -beta[k] * sign * (x - L) * sph_bessel_j_over_z(2 * n + 1, wb);
      }
      rows.push_back(row);
      rhs.push_back(beta[k] * (x - L) * sinc(wb) - std::cos(v * x));
    }
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    append_complex_rows(rows, rhs, A, b);
    const auto sol = solve_lsq(A, b, cfg.sv_rel_cutoff);
    out.max_residual = std::max(out.max_residual, sol.residual);
    out.max_cond = std::max(out.max_cond, sol.cond);
    out.g.col(mi) = sol.x.segment(0, Nc + 1);
    out.t.col(mi) = sol.x.segment(Nc + 1, Nc + 1);
  }

  // analytic boundary values: every g_n vanishes at 0, every t_n at L
  out.g.col(0).setZero();
  out.t.col(M + 1).setZero();
  out.t.col(0) = out.t.col(1);  // higher t_n(0) are not used downstream
  if (t0_at_0) out.t(0, 0) = *t0_at_0;
  out.g.col(M + 1) = out.g.col(M);
  if (g0_at_L) out.g(0, M + 1) = *g0_at_L;
  return out;
}

EndpointTables endpoint_functions(const ChebFit& g0_fit, const ChebFit& t0_fit, double L,
                                  std::span<const cplx> rho, const SolverConfig& cfg) {
  const int G = round_grid_size(cfg.grid_G);
  const ChebFit g0p = g0_fit.derivative();
  const ChebFit g0pp = g0p.derivative();
  const ChebFit t0p = t0_fit.derivative();

  std::vector<double> phi0(G), phi0_p(G), T0(G), T0_p(G), q(G);
  for (int i = 0; i < G; ++i) {
    const double x = L * i / static_cast<double>(G - 1);
    const double g0 = g0_fit(x), t0 = t0_fit(x);
    phi0[i] = g0 + 1.0;
    phi0_p[i] = g0p(x);
    T0[i] = (x - L) * (t0 / 3.0 + 1.0);
    T0_p[i] = (t0 / 3.0 + 1.0) + (x - L) * t0p(x) / 3.0;
    require(std::abs(phi0[i]) > 1e-6, "DenominatorNearZero",
            "endpoint_functions: phi(0,x) vanishes near x = " + std::to_string(x));
    q[i] = g0pp(x) / phi0[i];
  }
  const auto st = build_nonvanishing_f(phi0, phi0_p, T0, T0_p, q, L);
  const auto coeffs = coefficients_from_f(st, cfg.n_peel());

  EndpointTables out;
  out.phi.resize(rho.size());
  out.S.resize(rho.size());
  out.phi_p.resize(rho.size());
  out.S_p.resize(rho.size());
  for (size_t k = 0; k < rho.size(); ++k) {
    out.phi[k] = coeffs.phi(rho[k], L);
    out.S[k] = coeffs.S(rho[k], L);
    out.phi_p[k] = coeffs.phi_prime(rho[k], L);
    out.S_p[k] = coeffs.S_prime(rho[k], L);
    out.wronskian_err = std::max(
        out.wronskian_err,
        std::abs(out.phi[k] * out.S_p[k] - out.phi_p[k] * out.S[k] - 1.0));
  }
  return out;
}

EdgeInverseResult solve_local_edge(const WeylSamples& w, std::span<const int> sheaf_cols,
                                   std::span<const double> sheaf_lengths, int pos,
                                   const SolverConfig& cfg, bool with_tables) {
  EdgeInverseResult out;
  const double L = sheaf_lengths[pos];
  out.endpoint = solve_endpoint_coeffs(w, sheaf_cols, sheaf_lengths, pos, cfg);
  std::span<const double> g_end(out.endpoint.g.data(), static_cast<size_t>(out.endpoint.g.size()));
  std::span<const double> s_end(out.endpoint.s.data(), static_cast<size_t>(out.endpoint.s.size()));
  out.spectra = extract_spectra(g_end, s_end, L, cfg);
  const Eigen::VectorXd t0 = solve_t0(out.spectra.mu, L, cfg);
  out.beta = multipliers(out.spectra.nu, t0, L);
  out.interior = interior_solve(out.spectra.nu, out.beta, L, cfg, out.endpoint.g(0), t0(0));

  Eigen::VectorXd g0row = out.interior.g.row(0);
  std::span<const double> xi(out.interior.x.data(), out.interior.x.size());
  std::span<const double> g0span(g0row.data(), static_cast<size_t>(g0row.size()));
  // the endpoint value from step 1 pins the fit where the interior system
  // loses leverage
  const PointConstraint right{L, out.endpoint.g(0), 0};
  auto rec = recover_q_from_g0(xi, g0span, L, cfg.max_fit_degree, cfg.fixed_fit_degree,
                               std::span<const PointConstraint>(&right, 1));
  out.x = rec.x;
  out.q = rec.q;
  out.g0_fit = rec.g0_fit;

  Eigen::VectorXd t0row = out.interior.t.row(0);
  std::span<const double> t0span(t0row.data(), static_cast<size_t>(t0row.size()));
  const PointConstraint left{0.0, t0(0), 0};
  const int tdeg = cfg.fixed_fit_degree >= 0
                       ? cfg.fixed_fit_degree
                       : ChebFit::fit_adaptive(xi, t0span, L, cfg.max_fit_degree).degree();
  out.t0_fit = ChebFit(xi, t0span, L, tdeg, std::span<const PointConstraint>(&left, 1));

  if (with_tables)
    out.tables = endpoint_functions(out.g0_fit, out.t0_fit, L,
                                    std::span<const cplx>(w.rho.data(), w.rho.size()), cfg);
  return out;
}

}  // namespace treeweyl
