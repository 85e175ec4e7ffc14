#include "treeweyl/nsbf.hpp"

#include <algorithm>
#include <cmath>

#include "treeweyl/quadrature.hpp"

namespace treeweyl {

namespace {

// 4-point Lagrange interpolation on a uniform grid.
template <class T>
T interp_uniform(const std::vector<T>& y, double L, double x) {
  const int n = static_cast<int>(y.size());
  const double h = L / static_cast<double>(n - 1);
  double s = x / h;
  int i = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, n - 4);
  const double t = s - static_cast<double>(i);
  const double t0 = t, t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
  return y[i] * (-t1 * t2 * t3 / 6.0) + y[i + 1] * (t0 * t2 * t3 / 2.0) +
         y[i + 2] * (-t0 * t1 * t3 / 2.0) + y[i + 3] * (t0 * t1 * t2 / 6.0);
}

}  // namespace

cplx eval_phi_series(cplx rho, double x, std::span<const double> g) {
  const cplx w = rho * x;
  cplx sum = std::cos(w);
  if (g.empty()) return sum;
  const auto j = sph_bessel_j_all(2 * static_cast<int>(g.size()) - 2, w);
  double sign = 1.0;
  for (size_t n = 0; n < g.size(); ++n, sign = -sign) sum += sign * g[n] * j[2 * n];
  return sum;
}

cplx eval_S_series(cplx rho, double x, std::span<const double> s) {
  const cplx w = rho * x;
  cplx sum = x * sinc(w);
  if (s.empty()) return sum;
  double sign = 1.0;
  for (size_t n = 0; n < s.size(); ++n, sign = -sign)
    sum += sign * s[n] * (x * sph_bessel_j_over_z(2 * static_cast<int>(n) + 1, w));
  return sum;
}

cplx eval_phi_prime_series(cplx rho, double x, double Q, std::span<const double> gamma) {
  const cplx w = rho * x;
  cplx sum = -rho * std::sin(w) + std::cos(w) * (Q / 2.0);
  if (gamma.empty()) return sum;
  const auto j = sph_bessel_j_all(2 * static_cast<int>(gamma.size()) - 2, w);
  double sign = 1.0;
  for (size_t n = 0; n < gamma.size(); ++n, sign = -sign) sum += sign * gamma[n] * j[2 * n];
  return sum;
}

cplx eval_S_prime_series(cplx rho, double x, double Q, std::span<const double> sigma) {
  const cplx w = rho * x;
  cplx sum = std::cos(w) + x * sinc(w) * (Q / 2.0);
  double sign = 1.0;
  for (size_t n = 0; n < sigma.size(); ++n, sign = -sign)
    sum += sign * sigma[n] * (x * sph_bessel_j_over_z(2 * static_cast<int>(n) + 1, w));
  return sum;
}

cplx eval_T_series(cplx rho, double x, double L, std::span<const double> t) {
  require(x >= -1e-12 && x <= L * (1.0 + 1e-12), "XOutOfRange",
          "eval_T_series: x outside [0, L]");
  const double d = x - L;
  const cplx w = rho * d;
  cplx sum = d * sinc(w);
  double sign = 1.0;
  for (size_t n = 0; n < t.size(); ++n, sign = -sign)
    sum += sign * t[n] * (d * sph_bessel_j_over_z(2 * static_cast<int>(n) + 1, w));
  return sum;
}

Lambda0Solutions lambda0_solutions(const QFunc& q, double L, int G) {
  G = round_grid_size(G);
  const auto grids = integrate_fundamental_grids(q, L, cplx(0.0, 0.0), G);
  Lambda0Solutions out;
  out.x = grids.x;
  out.phi0.resize(G);
  out.phi0_p.resize(G);
  out.T0.resize(G);
  out.T0_p.resize(G);
  const double phiL = grids.phi.back().real();
  const double SL = grids.S.back().real();
  for (int i = 0; i < G; ++i) {
    out.phi0[i] = grids.phi[i].real();
    out.phi0_p[i] = grids.phi_p[i].real();
    // T = phi(L) S - S(L) phi vanishes at L with unit slope
    out.T0[i] = phiL * grids.S[i].real() - SL * grids.phi[i].real();
    out.T0_p[i] = phiL * grids.S_p[i].real() - SL * grids.phi_p[i].real();
  }
  return out;
}

RecurrenceState build_nonvanishing_f(const std::vector<double>& phi0,
                                     const std::vector<double>& phi0_p,
                                     const std::vector<double>& T0,
                                     const std::vector<double>& T0_p,
                                     const std::vector<double>& q, double L) {
  const size_t G = phi0.size();
  require(G >= 66 && (G - 1) % 5 == 0, "BadGrid",
          "build_nonvanishing_f: grid size must be 5k+1, >= 66");
  require(phi0_p.size() == G && T0.size() == G && T0_p.size() == G && q.size() == G,
          "BadGrid", "build_nonvanishing_f: grid size mismatch");
  // solver noise tolerance: the normalization below restores f(0) = 1 exactly
  require(std::abs(phi0.front() - 1.0) < 1e-3, "BadGrid",
          "build_nonvanishing_f: phi(0,0) must be ~1");
  const double hg = L / static_cast<double>(G - 1);

  double phimax = 0.0;
  for (double v : phi0) phimax = std::max(phimax, std::abs(v));
  const bool zero_is_nd_eig = std::abs(phi0.back()) < 1e-8 * (1.0 + phimax);

  std::vector<double> sec = T0, sec_p = T0_p;
  if (zero_is_nd_eig) {
    // T(0,.) is then a multiple of phi(0,.); take instead the solution of the
    // backward Cauchy problem y(L)=1, y'(L)=0, integrated on the reflected
    // edge to keep the marching direction uniform.
    std::vector<double> qr(q.rbegin(), q.rend());
    SampledPotential qref(qr, L);
    auto grids = integrate_fundamental_grids([&qref](double x) { return qref(x); }, L,
                                             cplx(0.0, 0.0), static_cast<int>(G));
    for (size_t i = 0; i < G; ++i) {
      sec[i] = grids.phi[G - 1 - i].real();
      sec_p[i] = -grids.phi_p[G - 1 - i].real();
    }
  }

  RecurrenceState st;
  st.L = L;
  st.x.resize(G);
  st.f.resize(G);
  st.f_p.resize(G);
  const cplx c(phi0.front(), sec.front());  // f_raw(0); divide out so that f(0) = 1
  for (size_t i = 0; i < G; ++i) {
    st.x[i] = hg * static_cast<double>(i);
    st.f[i] = cplx(phi0[i], sec[i]) / c;
    st.f_p[i] = cplx(phi0_p[i], sec_p[i]) / c;
  }
  st.h = (-25.0 * st.f[0] + 48.0 * st.f[1] - 36.0 * st.f[2] + 16.0 * st.f[3] -
          3.0 * st.f[4]) /
         (12.0 * hg);
  st.q = q;
  st.Q = cumulative_integral(q, hg);

  double fmin = 1e300, fmax = 0.0;
  for (const cplx& v : st.f) {
    fmin = std::min(fmin, std::abs(v));
    fmax = std::max(fmax, std::abs(v));
  }
  require(fmin > 1e-12 * fmax, "VanishingF",
          "nonvanishing solution has near-zero modulus (min |f| = " + std::to_string(fmin) + ")");
  return st;
}

NsbfCoeffs coefficients_from_f(const RecurrenceState& st, int N) {
  const size_t G = st.x.size();
  require(G >= 66 && (G - 1) % 5 == 0, "BadGrid", "coefficients_from_f: bad grid");
  require(N >= 0 && 2 * N <= kMaxBesselOrder, "BadConfig",
          "coefficients_from_f: N too large");
  const double hg = st.L / static_cast<double>(G - 1);
  const int nmax = 2 * N + 1;

  NsbfCoeffs out;
  out.L = st.L;
  out.h = st.h;
  out.N = N;
  out.x = st.x;
  out.Q = st.Q;
  out.beta.assign(nmax + 1, std::vector<cplx>(G));
  out.xi.assign(nmax + 1, std::vector<cplx>(G));

  std::vector<cplx> beta_m1(G, cplx(0.5, 0.0));  // beta_{-1}
  std::vector<cplx> xi_m1(G);                    // xi_{-1} = Q/4
  for (size_t i = 0; i < G; ++i) xi_m1[i] = cplx(st.Q[i] / 4.0, 0.0);
  for (size_t i = 0; i < G; ++i) {
    out.beta[0][i] = (st.f[i] - 1.0) / 2.0;
    out.xi[0][i] = (st.f_p[i] - st.h) / 2.0 - st.Q[i] / 4.0;
  }

  // values below this x are replaced by extrapolation: the x^{-n} scaling
  // makes the quadrature-noise-to-signal ratio explode near the origin
  const double x_cut = 1e-3 * st.L;
  size_t j_ext = 1;
  while (j_ext < G && st.x[j_ext] < x_cut) ++j_ext;
  j_ext = std::min(j_ext + 1, G - 3);

  std::vector<cplx> integrand(G), eta(G), theta(G);
  for (int n = 1; n <= nmax; ++n) {
    const auto& bprev = (n >= 2) ? out.beta[n - 2] : beta_m1;
    const auto& xprev = (n >= 2) ? out.xi[n - 2] : xi_m1;
    const double cn = (n == 1) ? 1.0 : 2.0 * (2.0 * n - 1.0);
    const double fac = (2.0 * n + 1.0) / (2.0 * n - 3.0);

    if (n == 1) {
      for (size_t i = 0; i < G; ++i) integrand[i] = 0.5 * st.f_p[i];
    } else {
      for (size_t i = 0; i < G; ++i) {
        const double t = st.x[i];
        integrand[i] = (t * st.f_p[i] + static_cast<double>(n - 1) * st.f[i]) * bprev[i] *
                       std::pow(t, n - 2);
      }
    }
    eta = cumulative_integral(integrand, hg);
    for (size_t i = 0; i < G; ++i) {
      const double t = st.x[i];
      integrand[i] = (eta[i] - st.f[i] * bprev[i] * std::pow(t, n - 1)) / (st.f[i] * st.f[i]);
    }
    theta = cumulative_integral(integrand, hg);

    auto& bn = out.beta[n];
    auto& xn = out.xi[n];
    bn[0] = 0.0;
    xn[0] = 0.0;
    for (size_t i = 1; i < G; ++i) {
      const double t = st.x[i];
      const double tpow = std::pow(t, n);
      bn[i] = fac * (bprev[i] + cn / tpow * st.f[i] * theta[i]);
      xn[i] = fac * (xprev[i] + cn / tpow * (st.f_p[i] * theta[i] + eta[i] / st.f[i]) -
                     (cn - 2.0 * n + 1.0) / t * bprev[i]);
    }
    // quadratic extrapolation over the patched prefix
    for (size_t i = 1; i < j_ext; ++i) {
      const double t = st.x[i];
      auto extrap = [&](const std::vector<cplx>& y) {
        const double x0 = st.x[j_ext], x1 = st.x[j_ext + 1], x2 = st.x[j_ext + 2];
        const double l0 = (t - x1) * (t - x2) / ((x0 - x1) * (x0 - x2));
        const double l1 = (t - x0) * (t - x2) / ((x1 - x0) * (x1 - x2));
        const double l2 = (t - x0) * (t - x1) / ((x2 - x0) * (x2 - x1));
        return l0 * y[j_ext] + l1 * y[j_ext + 1] + l2 * y[j_ext + 2];
      };
      bn[i] = extrap(bn);
      xn[i] = extrap(xn);
    }
  }
  return out;
}

namespace {

void check_x(double x, double L) {
  require(x >= -1e-12 && x <= L * (1.0 + 1e-12) + 1e-12, "XOutOfRange",
          "series evaluation: x outside [0, L]");
}

}  // namespace

std::vector<double> NsbfCoeffs::s_at(double xv) const {
  check_x(xv, L);
  std::vector<double> s(N + 1);
  for (int n = 0; n <= N; ++n) s[n] = 2.0 * interp_uniform(beta[2 * n + 1], L, xv).real();
  return s;
}

std::vector<double> NsbfCoeffs::sigma_at(double xv) const {
  check_x(xv, L);
  std::vector<double> s(N + 1);
  for (int n = 0; n <= N; ++n) s[n] = 2.0 * interp_uniform(xi[2 * n + 1], L, xv).real();
  return s;
}

double NsbfCoeffs::Q_at(double xv) const { return interp_uniform(Q, L, xv); }

cplx NsbfCoeffs::phi_h(cplx rho, double xv) const {
  check_x(xv, L);
  const cplx w = rho * xv;
  const auto j = sph_bessel_j_all(2 * N, w);
  cplx sum = std::cos(w);
  double sign = 1.0;
  for (int n = 0; n <= N; ++n, sign = -sign)
    sum += 2.0 * sign * interp_uniform(beta[2 * n], L, xv) * j[2 * n];
  return sum;
}

cplx NsbfCoeffs::phi_h_prime(cplx rho, double xv) const {
  check_x(xv, L);
  const cplx w = rho * xv;
  const auto j = sph_bessel_j_all(2 * N, w);
  cplx sum = -rho * std::sin(w) + std::cos(w) * (Q_at(xv) / 2.0 + h);
  double sign = 1.0;
  for (int n = 0; n <= N; ++n, sign = -sign)
    sum += 2.0 * sign * interp_uniform(xi[2 * n], L, xv) * j[2 * n];
  return sum;
}

cplx NsbfCoeffs::S(cplx rho, double xv) const {
  check_x(xv, L);
  const cplx w = rho * xv;
  cplx sum = xv * sinc(w);
  double sign = 1.0;
  for (int n = 0; n <= N; ++n, sign = -sign)
    sum += 2.0 * sign * interp_uniform(beta[2 * n + 1], L, xv) *
           (xv * sph_bessel_j_over_z(2 * n + 1, w));
  return sum;
}

cplx NsbfCoeffs::S_prime(cplx rho, double xv) const {
  check_x(xv, L);
  const cplx w = rho * xv;
  cplx sum = std::cos(w) + xv * sinc(w) * (Q_at(xv) / 2.0);
  double sign = 1.0;
  for (int n = 0; n <= N; ++n, sign = -sign)
    sum += 2.0 * sign * interp_uniform(xi[2 * n + 1], L, xv) *
           (xv * sph_bessel_j_over_z(2 * n + 1, w));
  return sum;
}

NsbfCoeffs forward_nsbf_coefficients(const QFunc& q, double L, int N, int G) {
  G = round_grid_size(G);
  const auto l0 = lambda0_solutions(q, L, G);
  std::vector<double> qs(G);
  for (int i = 0; i < G; ++i) qs[i] = q(l0.x[i]);
  const auto st = build_nonvanishing_f(l0.phi0, l0.phi0_p, l0.T0, l0.T0_p, qs, L);
  return coefficients_from_f(st, N);
}

namespace {

// One-sided polynomial fit over a boundary window. The second derivative of
// a global least-squares fit is least trustworthy exactly at the interval
// ends; a low-order local fit with the known endpoint data wins there.
ChebFit boundary_fit(std::span<const double> x, std::span<const double> g0, double lo,
                     double hi, std::span<const PointConstraint> cons) {
  std::vector<double> xs, ys;
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] >= lo - 1e-12 && x[i] <= hi + 1e-12) {
      xs.push_back(x[i] - lo);
      ys.push_back(g0[i]);
    }
  std::vector<PointConstraint> shifted(cons.begin(), cons.end());
  for (auto& c : shifted) c.x -= lo;
  const int deg = std::min<int>(static_cast<int>(xs.size()) >= 60 ? 7 : 5,
                                static_cast<int>(xs.size()) - 2);
  return ChebFit(xs, ys, hi - lo, deg, shifted);
}

}  // namespace

RecoveredPotential recover_q_from_g0(std::span<const double> x, std::span<const double> g0,
                                     double L, int max_degree, int fixed_degree,
                                     std::span<const PointConstraint> extra) {
  require(x.size() == g0.size() && x.size() >= 16, "BadGrid",
          "recover_q_from_g0: need a dense grid");
  RecoveredPotential out;
  // g0 = phi(0,.) - 1 always starts flat: phi(0,0) = 1, phi'(0,0) = 0
  std::vector<PointConstraint> cons = {{0.0, 0.0, 0}, {0.0, 0.0, 1}};
  cons.insert(cons.end(), extra.begin(), extra.end());
  const int deg =
      fixed_degree >= 0 ? fixed_degree : ChebFit::fit_adaptive(x, g0, L, max_degree).degree();
  out.g0_fit = ChebFit(x, g0, L, deg, cons);
  const ChebFit d2 = out.g0_fit.derivative().derivative();

  const double W = 0.16 * L;
  std::vector<PointConstraint> lcons = {{0.0, 0.0, 0}, {0.0, 0.0, 1}};
  ChebFit lfit = boundary_fit(x, g0, 0.0, W, lcons);
  std::vector<PointConstraint> rcons;
  for (const auto& c : extra)
    if (std::abs(c.x - L) < 1e-12) rcons.push_back(c);
  ChebFit rfit = boundary_fit(x, g0, L - W, L, rcons);
  const ChebFit ld2 = lfit.derivative().derivative();
  const ChebFit rd2 = rfit.derivative().derivative();

  // denominator check on a denser grid than the samples
  const int nchk = 4 * static_cast<int>(x.size());
  for (int i = 0; i <= nchk; ++i) {
    const double xv = L * i / static_cast<double>(nchk);
    require(std::abs(out.g0_fit(xv) + 1.0) > 1e-6, "DenominatorNearZero",
            "recover_q_from_g0: g0 + 1 vanishes near x = " + std::to_string(xv));
  }

  auto blend = [](double t) {  // 1 -> 0 smoothstep on [0,1]
    t = std::clamp(t, 0.0, 1.0);
    return 1.0 - t * t * (3.0 - 2.0 * t);
  };
  out.x.assign(x.begin(), x.end());
  out.q.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double xv = x[i];
    const double den = out.g0_fit(xv) + 1.0;
    double num = d2(xv);
    const double wl = blend((xv - 0.4 * W) / (0.5 * W));
    const double wr = blend((L - xv - 0.4 * W) / (0.5 * W));
    num = wl * ld2(xv) + wr * rd2(xv - (L - W)) + (1.0 - wl - wr) * num;
    out.q[i] = num / den;
  }
  return out;
}

}  // namespace treeweyl
