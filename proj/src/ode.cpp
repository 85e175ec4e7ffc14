#include "treeweyl/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace treeweyl {

SampledPotential::SampledPotential(std::vector<double> samples, double L)
    : q_(std::move(samples)), L_(L) {
  require(q_.size() >= 4, "BadGrid", "SampledPotential: need at least 4 samples");
  require(L > 0.0, "BadGrid", "SampledPotential: nonpositive length");
  h_ = L_ / static_cast<double>(q_.size() - 1);
}

double SampledPotential::operator()(double x) const {
  const int n = static_cast<int>(q_.size());
  double s = x / h_;
  int i = static_cast<int>(std::floor(s)) - 1;  // window [i, i+3]
  i = std::clamp(i, 0, n - 4);
  const double t = s - static_cast<double>(i);
  // Lagrange basis on local nodes 0,1,2,3
  const double t0 = t, t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
  const double l0 = -t1 * t2 * t3 / 6.0;
  const double l1 = t0 * t2 * t3 / 2.0;
  const double l2 = -t0 * t1 * t3 / 2.0;
  const double l3 = t0 * t1 * t2 / 6.0;
  return l0 * q_[i] + l1 * q_[i + 1] + l2 * q_[i + 2] + l3 * q_[i + 3];
}

namespace {

// 12-stage 8th order explicit Runge-Kutta core (Hairer, Norsett & Wanner,
// DOP853), used here with a fixed step. State is the fundamental pair
// y = (phi, phi', S, S').
struct Rk8Tableau {
  static constexpr double c2 = 0.526001519587677318785587544488E-01,
                          c3 = 0.789002279381515978178381316732E-01,
                          c4 = 0.118350341907227396726757197510E+00,
                          c5 = 0.281649658092772603273242802490E+00,
                          c6 = 0.333333333333333333333333333333E+00, c7 = 0.25E+00,
                          c8 = 0.307692307692307692307692307692E+00,
                          c9 = 0.651282051282051282051282051282E+00, c10 = 0.6E+00,
                          c11 = 0.857142857142857142857142857142E+00;
  static constexpr double b1 = 5.42937341165687622380535766363E-2,
                          b6 = 4.45031289275240888144113950566E0,
                          b7 = 1.89151789931450038304281599044E0,
                          b8 = -5.8012039600105847814672114227E0,
                          b9 = 3.1116436695781989440891606237E-1,
                          b10 = -1.52160949662516078556178806805E-1,
                          b11 = 2.01365400804030348374776537501E-1,
                          b12 = 4.47106157277725905176885569043E-2;
  static constexpr double a21 = 5.26001519587677318785587544488E-2,
                          a31 = 1.97250569845378994544595329183E-2,
                          a32 = 5.91751709536136983633785987549E-2,
                          a41 = 2.95875854768068491816892993775E-2,
                          a43 = 8.87627564304205475450678981324E-2,
                          a51 = 2.41365134159266685502369798665E-1,
                          a53 = -8.84549479328286085344864962717E-1,
                          a54 = 9.24834003261792003115737966543E-1,
                          a61 = 3.7037037037037037037037037037E-2,
                          a64 = 1.70828608729473871279604482173E-1,
                          a65 = 1.25467687566822425016691814123E-1,
                          a71 = 3.7109375E-2, a74 = 1.70252211019544039314978060272E-1,
                          a75 = 6.02165389804559606850219397283E-2, a76 = -1.7578125E-2,
                          a81 = 3.70920001185047927108779319836E-2,
                          a84 = 1.70383925712239993810214054705E-1,
                          a85 = 1.07262030446373284651809199168E-1,
                          a86 = -1.53194377486244017527936158236E-2,
                          a87 = 8.27378916381402288758473766002E-3,
                          a91 = 6.24110958716075717114429577812E-1,
                          a94 = -3.36089262944694129406857109825E0,
                          a95 = -8.68219346841726006818189891453E-1,
                          a96 = 2.75920996994467083049415600797E1,
                          a97 = 2.01540675504778934086186788979E1,
                          a98 = -4.34898841810699588477366255144E1,
                          a101 = 4.77662536438264365890433908527E-1,
                          a104 = -2.48811461997166764192642586468E0,
                          a105 = -5.90290826836842996371446475743E-1,
                          a106 = 2.12300514481811942347288949897E1,
                          a107 = 1.52792336328824235832596922938E1,
                          a108 = -3.32882109689848629194453265587E1,
                          a109 = -2.03312017085086261358222928593E-2,
                          a111 = -9.3714243008598732571704021658E-1,
                          a114 = 5.18637242884406370830023853209E0,
                          a115 = 1.09143734899672957818500254654E0,
                          a116 = -8.14978701074692612513997267357E0,
                          a117 = -1.85200656599969598641566180701E1,
                          a118 = 2.27394870993505042818970056734E1,
                          a119 = 2.49360555267965238987089396762E0,
                          a1110 = -3.0467644718982195003823669022E0,
                          a121 = 2.27331014751653820792359768449E0,
                          a124 = -1.05344954667372501984066689879E1,
                          a125 = -2.00087205822486249909675718444E0,
                          a126 = -1.79589318631187989172765950534E1,
                          a127 = 2.79488845294199600508499808837E1,
                          a128 = -2.85899827713502369474065508674E0,
                          a129 = -8.87285693353062954433549289258E0,
                          a1210 = 1.23605671757943030647266201528E1,
                          a1211 = 6.43392746015763530355970484046E-1;
};

using State = std::array<cplx, 4>;

inline State rhs(const QFunc& q, cplx rho2, double x, const State& y) {
  const cplx w = cplx(q(x), 0.0) - rho2;
  return {y[1], w * y[0], y[3], w * y[2]};
}

inline State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (const auto& [a, k] : terms)
    for (int i = 0; i < 4; ++i) out[i] += h * a * (*k)[i];
  return out;
}

State rk8_step(const QFunc& q, cplx rho2, double x, double h, const State& y) {
  using T = Rk8Tableau;
  const State k1 = rhs(q, rho2, x, y);
  const State k2 = rhs(q, rho2, x + T::c2 * h, axpy(y, h, {{T::a21, &k1}}));
  const State k3 = rhs(q, rho2, x + T::c3 * h, axpy(y, h, {{T::a31, &k1}, {T::a32, &k2}}));
  const State k4 = rhs(q, rho2, x + T::c4 * h, axpy(y, h, {{T::a41, &k1}, {T::a43, &k3}}));
  const State k5 = rhs(q, rho2, x + T::c5 * h,
                       axpy(y, h, {{T::a51, &k1}, {T::a53, &k3}, {T::a54, &k4}}));
  const State k6 = rhs(q, rho2, x + T::c6 * h,
                       axpy(y, h, {{T::a61, &k1}, {T::a64, &k4}, {T::a65, &k5}}));
  const State k7 = rhs(q, rho2, x + T::c7 * h,
                       axpy(y, h, {{T::a71, &k1}, {T::a74, &k4}, {T::a75, &k5}, {T::a76, &k6}}));
  const State k8 = rhs(q, rho2, x + T::c8 * h,
                       axpy(y, h, {{T::a81, &k1}, {T::a84, &k4}, {T::a85, &k5}, {T::a86, &k6},
                                   {T::a87, &k7}}));
  const State k9 = rhs(q, rho2, x + T::c9 * h,
                       axpy(y, h, {{T::a91, &k1}, {T::a94, &k4}, {T::a95, &k5}, {T::a96, &k6},
                                   {T::a97, &k7}, {T::a98, &k8}}));
  const State k10 = rhs(q, rho2, x + T::c10 * h,
                        axpy(y, h, {{T::a101, &k1}, {T::a104, &k4}, {T::a105, &k5},
                                    {T::a106, &k6}, {T::a107, &k7}, {T::a108, &k8},
                                    {T::a109, &k9}}));
  const State k11 = rhs(q, rho2, x + T::c11 * h,
                        axpy(y, h, {{T::a111, &k1}, {T::a114, &k4}, {T::a115, &k5},
                                    {T::a116, &k6}, {T::a117, &k7}, {T::a118, &k8},
                                    {T::a119, &k9}, {T::a1110, &k10}}));
  const State k12 = rhs(q, rho2, x + h,
                        axpy(y, h, {{T::a121, &k1}, {T::a124, &k4}, {T::a125, &k5},
                                    {T::a126, &k6}, {T::a127, &k7}, {T::a128, &k8},
                                    {T::a129, &k9}, {T::a1210, &k10}, {T::a1211, &k11}}));
  return axpy(y, h,
              {{T::b1, &k1},
               {T::b6, &k6},
               {T::b7, &k7},
               {T::b8, &k8},
               {T::b9, &k9},
               {T::b10, &k10},
               {T::b11, &k11},
               {T::b12, &k12}});
}

}  // namespace

int recommended_steps(double abs_rho, double L) {
  return std::max(2000, static_cast<int>(std::ceil(8.0 * abs_rho * L)));
}

Fundamentals integrate_fundamentals(const QFunc& q, double L, cplx rho, int nsteps) {
  require(nsteps >= 8, "BadGrid", "integrate_fundamentals: too few steps");
  const cplx rho2 = rho * rho;
  const double h = L / static_cast<double>(nsteps);
  State y{1.0, 0.0, 0.0, 1.0};
  for (int i = 0; i < nsteps; ++i) y = rk8_step(q, rho2, i * h, h, y);
  return {y[0], y[1], y[2], y[3]};
}

FundamentalGrids integrate_fundamental_grids(const QFunc& q, double L, cplx rho, int G) {
  require(G >= 9, "BadGrid", "integrate_fundamental_grids: grid too small");
  const cplx rho2 = rho * rho;
  const int n = G - 1;
  const double h = L / static_cast<double>(n);
  FundamentalGrids out;
  out.x.resize(G);
  out.phi.resize(G);
  out.phi_p.resize(G);
  out.S.resize(G);
  out.S_p.resize(G);
  State y{1.0, 0.0, 0.0, 1.0};
  for (int i = 0; i <= n; ++i) {
    out.x[i] = i * h;
    out.phi[i] = y[0];
    out.phi_p[i] = y[1];
    out.S[i] = y[2];
    out.S_p[i] = y[3];
    if (i < n) y = rk8_step(q, rho2, i * h, h, y);
  }
  return out;
}

}  // namespace treeweyl
