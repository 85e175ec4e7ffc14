#include "treeweyl/chebfit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace treeweyl {

namespace {

Eigen::MatrixXd cheb_vandermonde(std::span<const double> x, double L, int degree) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd V(n, degree + 1);
  for (int i = 0; i < n; ++i) {
    const double u = 2.0 * x[i] / L - 1.0;
    V(i, 0) = 1.0;
    if (degree >= 1) V(i, 1) = u;
    for (int k = 2; k <= degree; ++k) V(i, k) = 2.0 * u * V(i, k - 1) - V(i, k - 2);
  }
  return V;
}

}  // namespace

ChebFit::ChebFit(std::span<const double> x, std::span<const double> y, double L, int degree,
                 std::span<const PointConstraint> constraints) {
  require(x.size() == y.size() && x.size() > static_cast<size_t>(degree), "BadGrid",
          "ChebFit: need more samples than coefficients");
  require(L > 0.0, "BadGrid", "ChebFit: nonpositive domain length");
  L_ = L;
  const int n = static_cast<int>(x.size());
  const int nc = static_cast<int>(constraints.size());
  Eigen::MatrixXd V(n + nc, degree + 1);
  Eigen::VectorXd b(n + nc);
  V.topRows(n) = cheb_vandermonde(x, L, degree);
  b.head(n) = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  const double w = 1e6 * std::sqrt(static_cast<double>(n));
  std::vector<double> T(degree + 1), U(degree + 1);
  for (int ci = 0; ci < nc; ++ci) {
    const auto& pc = constraints[ci];
    const double u = 2.0 * pc.x / L - 1.0;
    T[0] = 1.0;
    U[0] = 1.0;
    if (degree >= 1) {
      T[1] = u;
      U[1] = 2.0 * u;
    }
    for (int k = 2; k <= degree; ++k) {
      T[k] = 2.0 * u * T[k - 1] - T[k - 2];
      U[k] = 2.0 * u * U[k - 1] - U[k - 2];
    }
    for (int k = 0; k <= degree; ++k) {
      const double dTk = k == 0 ? 0.0 : k * U[k - 1];  // T_k' = k U_{k-1}
      V(n + ci, k) = w * (pc.deriv_order == 0 ? T[k] : dTk * (2.0 / L));
    }
    b(n + ci) = w * pc.value;
  }
  Eigen::VectorXd c = V.householderQr().solve(b);
  coef_.assign(c.data(), c.data() + c.size());
  rms_residual_ =
      std::sqrt((V.topRows(n) * c - b.head(n)).squaredNorm() / static_cast<double>(n));
}

ChebFit ChebFit::fit_adaptive(std::span<const double> x, std::span<const double> y,
                              double L, int max_degree) {
  const int n = static_cast<int>(x.size());
  int dmax = std::min(max_degree, n - 2);
  if (dmax < 4) dmax = std::min(4, n - 2);
  Eigen::MatrixXd V = cheb_vandermonde(x, L, dmax);
  Eigen::Map<const Eigen::VectorXd> b(y.data(), n);

  // One unpivoted QR gives the residuals of every nested degree: with columns
  // in degree order, resid(d) = ||(Q^T b)[d+1:]||.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
  Eigen::VectorXd qtb = qr.householderQ().transpose() * b;
  auto resid = [&](int d) {
    double s = 0.0;
    for (int i = d + 1; i < n; ++i) s += qtb[i] * qtb[i];
    return std::sqrt(s);
  };
  const double floor = 1e-13 * b.norm() + 1e-300;
  const double target = std::max(2.0 * resid(dmax), floor);
  int best = dmax;
  for (int d = 4; d <= dmax; d += 2) {
    if (resid(d) <= target) {
      best = d;
      break;
    }
  }
  return ChebFit(x, y, L, best);
}

double ChebFit::operator()(double x) const {
  const double u = 2.0 * x / L_ - 1.0;
  // Clenshaw recurrence
  double b1 = 0.0, b2 = 0.0;
  for (int k = static_cast<int>(coef_.size()) - 1; k >= 1; --k) {
    const double tmp = 2.0 * u * b1 - b2 + coef_[k];
    b2 = b1;
    b1 = tmp;
  }
  return u * b1 - b2 + coef_[0];
}

std::vector<double> ChebFit::eval(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = (*this)(x[i]);
  return out;
}

ChebFit ChebFit::derivative() const {
  const int n = degree();
  ChebFit d;
  d.L_ = L_;
  d.coef_.assign(std::max(n, 1), 0.0);
  std::vector<double> b(n + 2, 0.0);
  for (int k = n; k >= 1; --k) b[k - 1] = b[k + 1] + 2.0 * k * coef_[k];
  b[0] *= 0.5;
  for (int k = 0; k < std::max(n, 1); ++k) d.coef_[k] = b[k] * (2.0 / L_);
  return d;
}

}  // namespace treeweyl
