#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "treeweyl/quadrature.hpp"
#include "treeweyl/sheaf_inverse.hpp"

using namespace treeweyl;

namespace {

// Pure-initial-condition coefficient sets: for the nonnegative preset
// potentials phi(0,.) never vanishes, so f can be taken real with h = 0 and
// the even/odd beta entries are exactly the g_n / s_n coefficient functions.
NsbfCoeffs pure_coeffs(const QFunc& q, double L, int N, int G = 2001) {
  G = round_grid_size(G);
  auto l0 = lambda0_solutions(q, L, G);
  RecurrenceState st;
  st.L = L;
  st.x = l0.x;
  st.f.resize(G);
  st.f_p.resize(G);
  for (int i = 0; i < G; ++i) {
    st.f[i] = l0.phi0[i];
    st.f_p[i] = l0.phi0_p[i];
  }
  st.h = 0.0;
  st.q.resize(G);
  for (int i = 0; i < G; ++i) st.q[i] = q(l0.x[i]);
  st.Q = cumulative_integral(st.q, L / (G - 1));
  return coefficients_from_f(st, N);
}

std::vector<double> g_at_L(const NsbfCoeffs& c) {
  std::vector<double> g(c.N + 1);
  for (int n = 0; n <= c.N; ++n) g[n] = 2.0 * c.beta[2 * n].back().real();
  return g;
}

TreeGraph star3(const std::string& preset, double L1 = 1.0, double L2 = 1.0, double L3 = 1.0) {
  auto len = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const std::string txt = R"({"vertices":[1,2,3,0],"edges":[
    {"a":1,"b":0,"length":)" + len(L1) + R"(,"potential":{"preset":")" + preset + R"("}},
    {"a":2,"b":0,"length":)" + len(L2) + R"(,"potential":{"preset":")" + preset + R"("}},
    {"a":3,"b":0,"length":)" + len(L3) + R"(,"potential":{"preset":")" + preset + R"("}}],
    "leaf_order":[1,2,3]})";
  return parse_graph_json(txt, 501);
}

WeylSamples star_samples(const TreeGraph& g, int K) {
  RhoGridSpec spec;
  spec.K = K;
  return sample_weyl(g, spec);
}

}  // namespace

TEST_CASE("zero-potential star yields vanishing endpoint coefficients") {
  auto g = star3("zero");
  auto w = star_samples(g, 40);
  SolverConfig cfg;
  cfg.N = 4;
  const int cols[] = {0, 1, 2};
  const double lens[] = {1.0, 1.0, 1.0};
  auto ec = solve_endpoint_coeffs(w, cols, lens, 0, cfg);
  for (int n = 0; n <= 4; ++n) {
    CHECK(std::abs(ec.g(n)) < 1e-8);
    CHECK(std::abs(ec.s(n)) < 1e-8);
    CHECK(std::abs(ec.s_next(n)) < 1e-8);
  }
  CHECK(ec.residual < 1e-9);
}

TEST_CASE("constant-potential star: endpoint s-coefficients match the forward recurrence") {
  auto g = star3("one");
  auto w = star_samples(g, 60);
  SolverConfig cfg;
  cfg.N = 9;
  const int cols[] = {0, 1, 2};
  const double lens[] = {1.0, 1.0, 1.0};
  auto ec = solve_endpoint_coeffs(w, cols, lens, 0, cfg);
  auto cf = forward_nsbf_coefficients(potential_presets().at("one"), 1.0, 9);
  auto s_true = cf.s_at(1.0);
  auto cp = pure_coeffs(potential_presets().at("one"), 1.0, 9);
  auto g_true = g_at_L(cp);
  for (int n = 0; n <= 9; ++n) {
    CHECK(std::abs(ec.s(n) - s_true[n]) < 1e-6);
    CHECK(std::abs(ec.g(n) - g_true[n]) < 1e-6);
  }
}

TEST_CASE("insufficient samples are rejected up front") {
  auto g = star3("zero");
  auto w = star_samples(g, 10);
  SolverConfig cfg;
  cfg.N = 9;  // needs K >= 30
  const int cols[] = {0, 1, 2};
  const double lens[] = {1.0, 1.0, 1.0};
  CHECK_THROWS_WITH_AS(solve_endpoint_coeffs(w, cols, lens, 0, cfg),
                       doctest::Contains("InsufficientSamples"), Error);
}

TEST_CASE("spectra of the zero and constant potentials") {
  SolverConfig cfg;
  cfg.N = 6;
  cfg.K_D = cfg.K_N = 25;
  const std::vector<double> zeros(7, 0.0);
  auto sp = extract_spectra(zeros, zeros, 1.0, cfg);
  for (int k = 1; k <= 25; ++k) {
    CHECK(sp.mu[k - 1].real() == doctest::Approx(k * M_PI).epsilon(1e-12));
    CHECK(sp.nu[k - 1].real() == doctest::Approx((k - 0.5) * M_PI).epsilon(1e-12));
  }

  auto c1 = pure_coeffs(potential_presets().at("one"), 1.0, 9);
  auto s_end = c1.s_at(1.0);
  auto sp1 = extract_spectra(g_at_L(c1), s_end, 1.0, cfg);
  for (int k = 1; k <= 25; ++k) {
    const double mu_exact = std::sqrt(k * k * M_PI * M_PI + 1.0);
    CHECK(std::abs(sp1.mu[k - 1].real() - mu_exact) < 1e-9);
  }
  // interlacing nu_k < mu_k < nu_{k+1}
  for (int k = 0; k + 1 < 25; ++k) {
    CHECK(sp1.nu[k].real() < sp1.mu[k].real());
    CHECK(sp1.mu[k].real() < sp1.nu[k + 1].real());
  }
}

TEST_CASE("gaussian bump spectra against the published eigenvalues") {
  // Dirichlet-Dirichlet eigenvalues of exp(-(x-1/2)^2) on [0,1]; zeros of the
  // truncated S series approximate them uniformly well up to index 201
  auto c = pure_coeffs(potential_presets().at("q2"), 1.0, 9);
  SolverConfig cfg;
  cfg.N = 9;
  cfg.K_D = cfg.K_N = 201;
  auto sp = extract_spectra(g_at_L(c), c.s_at(1.0), 1.0, cfg);
  const struct {
    int k;
    double lambda;
  } table[] = {{1, 10.8381543818},
               {11, 1195.1450218516},
               {51, 25671.7636244},
               {101, 100680.7570614},
               {201, 398742.8099714}};
  for (const auto& row : table) {
    const double lam = (sp.mu[row.k - 1] * sp.mu[row.k - 1]).real();
    CHECK(std::abs(lam - row.lambda) < 1e-5);
  }
  // self-consistency: the series vanishes at every accepted root
  auto s_end = c.s_at(1.0);
  for (const auto& mu : sp.mu)
    CHECK(std::abs(eval_S_series(mu, 1.0, s_end)) < 1e-8);
}

TEST_CASE("t0 solve and multiplier constants") {
  SolverConfig cfg;
  cfg.N = 7;
  cfg.K_D = cfg.K_N = 40;

  // zero potential: mu_k = k pi, t_n(0) = 0, beta_k = (-1)^k nu_k
  std::vector<cplx> mu, nu;
  for (int k = 1; k <= 40; ++k) {
    mu.push_back(cplx(k * M_PI, 0.0));
    nu.push_back(cplx((k - 0.5) * M_PI, 0.0));
  }
  auto t0 = solve_t0(mu, 1.0, cfg);
  for (int n = 0; n <= 7; ++n) CHECK(std::abs(t0(n)) < 1e-10);
  auto beta = multipliers(nu, t0, 1.0);
  for (int k = 1; k <= 40; ++k) {
    const double expect = (k % 2 == 0 ? 1.0 : -1.0) * (k - 0.5) * M_PI;
    CHECK(beta[k - 1] == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("constant potential t0 against a spectral projection of the closed form") {
  // T(rho,0) = -sin(rt)/rt with rt = sqrt(rho^2-1); project the closed form
  // on the odd-order basis over a dense real rho sample (independent of the
  // mu-based production path)
  SolverConfig cfg;
  cfg.N = 7;
  const double L = 1.0;
  const int S = 240;
  // sum_n (-1)^n t_n(0) j_{2n+1}(rho L) = -rho T(rho,0) - sin(rho L)
  Eigen::MatrixXd A(S, cfg.N + 1);
  Eigen::VectorXd b(S);
  for (int i = 0; i < S; ++i) {
    const double rho = 0.5 + 120.0 * i / (S - 1);
    const cplx rt = std::sqrt(cplx(rho * rho - 1.0, 0.0));
    const cplx Texact = -std::sin(rt * L) / rt;
    double sign = 1.0;
    for (int n = 0; n <= cfg.N; ++n, sign = -sign)
      A(i, n) = sign * sph_bessel_j(2 * n + 1, cplx(rho * L, 0.0)).real();
    b(i) = (-rho * Texact).real() - std::sin(rho * L);
  }
  Eigen::VectorXd oracle = A.householderQr().solve(b);

  std::vector<cplx> mu;
  for (int k = 1; k <= 40; ++k) mu.push_back(cplx(std::sqrt(k * k * M_PI * M_PI + 1.0), 0.0));
  cfg.K_D = 40;
  auto t0 = solve_t0(mu, L, cfg);
  for (int n = 0; n <= 5; ++n) CHECK(std::abs(t0(n) - oracle(n)) < 1e-6);

  // residual self-check at the roots used
  std::span<const double> tspan(t0.data(), static_cast<size_t>(t0.size()));
  for (const auto& m : mu) CHECK(std::abs(eval_T_series(m, 0.0, L, tspan)) < 1e-8);
}

TEST_CASE("multipliers satisfy phi = beta T for an oscillatory potential") {
  const auto& q4 = potential_presets().at("q4");
  const double L = M_PI / 3.0;
  SolverConfig cfg;
  cfg.N = 9;
  cfg.K_D = cfg.K_N = 60;
  auto c = pure_coeffs(q4, L, 9);
  auto sp = extract_spectra(g_at_L(c), c.s_at(L), L, cfg);
  auto t0 = solve_t0(sp.mu, L, cfg);
  auto beta = multipliers(sp.nu, t0, L);
  for (int k : {0, 4, 19, 42}) {
    const cplx nu = sp.nu[k];
    auto grids = integrate_fundamental_grids(q4, L, nu, 2401);
    const cplx phi_half = grids.phi[1200];
    const cplx T_half =
        grids.phi.back() * grids.S[1200] - grids.S.back() * grids.phi[1200];
    CHECK(std::abs(phi_half - beta[k] * T_half) / std::abs(phi_half) < 1e-4);
  }
}

TEST_CASE("interior solve recovers g0 for zero, constant and exponential potentials") {
  SolverConfig cfg;
  cfg.N = 9;
  cfg.Nc = 9;
  cfg.K_N = 100;
  cfg.xm_points = 120;

  // exact zero-potential inputs
  std::vector<cplx> nu;
  std::vector<double> beta;
  for (int k = 1; k <= 100; ++k) {
    nu.push_back(cplx((k - 0.5) * M_PI, 0.0));
    beta.push_back((k % 2 == 0 ? 1.0 : -1.0) * (k - 0.5) * M_PI);
  }
  auto sol = interior_solve(nu, beta, 1.0, cfg);
  for (int c = 0; c < sol.g.cols(); ++c) {
    CHECK(std::abs(sol.g(0, c)) < 1e-8);
    CHECK(std::abs(sol.t(0, c)) < 1e-8);
  }

  // constant potential via the full production chain from exact coefficients
  auto c1 = pure_coeffs(potential_presets().at("one"), 1.0, 9);
  auto sp = extract_spectra(g_at_L(c1), c1.s_at(1.0), 1.0, cfg);
  auto t0 = solve_t0(sp.mu, 1.0, cfg);
  auto b1 = multipliers(sp.nu, t0, 1.0);
  auto sol1 = interior_solve(sp.nu, b1, 1.0, cfg, std::cosh(1.0) - 1.0);
  for (int c = 0; c < sol1.g.cols(); ++c)
    CHECK(std::abs(sol1.g(0, c) - (std::cosh(sol1.x[c]) - 1.0)) < 1e-5);

  // exponential potential against the lambda = 0 integration
  const auto& q7 = potential_presets().at("q7");
  const double L = 1.2;
  auto c7 = pure_coeffs(q7, L, 14);
  SolverConfig cfg14 = cfg;
  cfg14.N = 14;
  cfg14.Nc = 9;
  auto sp7 = extract_spectra(g_at_L(c7), c7.s_at(L), L, cfg14);
  auto t07 = solve_t0(sp7.mu, L, cfg14);
  auto b7 = multipliers(sp7.nu, t07, L);
  auto l0 = lambda0_solutions(q7, L, 2001);
  auto sol7 = interior_solve(sp7.nu, b7, L, cfg14, l0.phi0.back() - 1.0);
  // the truncated basis sampled at the nu_k carries a near-null direction
  // with an O(1e-3) component of the true solution; the bias it leaves in
  // g_0 is insensitive to K_N, Nc and the cutoff, grows towards x = L, and
  // sets the accuracy floor of the recovered potentials
  for (int c = 0; c < sol7.g.cols(); ++c) {
    const size_t i = static_cast<size_t>(sol7.x[c] / L * 2000 + 0.5);
    const double tol = sol7.x[c] <= 0.95 * L ? 1e-3 : 2e-3;
    CHECK(std::abs(sol7.g(0, c) - (l0.phi0[i] - 1.0)) < tol);
  }
}

TEST_CASE("endpoint functions from exact first coefficients") {
  SolverConfig cfg;
  std::vector<double> xs(301);
  for (int i = 0; i < 301; ++i) xs[i] = i / 300.0;

  // zero potential: g0 = 0, t0 = 0
  std::vector<double> z(301, 0.0);
  ChebFit g0(xs, z, 1.0, 4), t0(xs, z, 1.0, 4);
  std::vector<cplx> rho = {cplx(2.0, 0.1), cplx(40.0, 0.1)};
  auto tab = endpoint_functions(g0, t0, 1.0, rho, cfg);
  for (size_t k = 0; k < rho.size(); ++k) {
    CHECK(std::abs(tab.phi[k] - std::cos(rho[k])) < 1e-10);
    CHECK(std::abs(tab.S[k] - std::sin(rho[k]) / rho[k]) < 1e-10);
    CHECK(std::abs(tab.phi_p[k] + rho[k] * std::sin(rho[k])) < 1e-9);
    CHECK(std::abs(tab.S_p[k] - std::cos(rho[k])) < 1e-10);
  }
  CHECK(tab.wronskian_err < 1e-9);

  // constant potential: g0 = cosh - 1, t0 = 3(sinh(x-L)/(x-L) - 1)
  std::vector<double> gv(301), tv(301);
  for (int i = 0; i < 301; ++i) {
    gv[i] = std::cosh(xs[i]) - 1.0;
    const double d = xs[i] - 1.0;
    tv[i] = std::abs(d) > 1e-8 ? 3.0 * (std::sinh(d) / d - 1.0) : d * d / 2.0 * 1.0;
  }
  ChebFit g1(xs, gv, 1.0, 20), t1(xs, tv, 1.0, 20);
  auto tab1 = endpoint_functions(g1, t1, 1.0, rho, cfg);
  for (size_t k = 0; k < rho.size(); ++k) {
    const cplx rt = std::sqrt(rho[k] * rho[k] - 1.0);
    CHECK(std::abs(tab1.phi[k] - std::cos(rt)) < 1e-6);
    CHECK(std::abs(tab1.S[k] - std::sin(rt) / rt) < 1e-6);
    CHECK(std::abs(tab1.S_p[k] - std::cos(rt)) < 1e-6);
  }
}

TEST_CASE("doubling the sample count does not hurt the endpoint coefficients") {
  auto g = star3("one");
  SolverConfig cfg;
  cfg.N = 9;
  const int cols[] = {0, 1, 2};
  const double lens[] = {1.0, 1.0, 1.0};
  auto cf = forward_nsbf_coefficients(potential_presets().at("one"), 1.0, 9);
  auto s_true = cf.s_at(1.0);
  double prev = 1e300;
  for (int K : {30, 60, 120}) {
    auto w = star_samples(g, K);
    auto ec = solve_endpoint_coeffs(w, cols, lens, 0, cfg);
    double err = 0.0;
    for (int n = 0; n <= 9; ++n) err = std::max(err, std::abs(ec.s(n) - s_true[n]));
    CHECK(err <= prev * 1.05 + 1e-12);
    prev = err;
  }
}
