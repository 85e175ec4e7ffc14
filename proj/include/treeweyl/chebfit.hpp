#pragma once

#include <span>
#include <vector>

#include "treeweyl/common.hpp"

namespace treeweyl {

// Known value or slope at a single point, enforced (with a large weight)
// next to the least-squares data.
struct PointConstraint {
  double x = 0.0;
  double value = 0.0;
  int deriv_order = 0;  // 0 = value, 1 = first derivative
};

// Least-squares Chebyshev polynomial fit on [0, L]. Used to project sampled
// coefficient functions onto a smooth basis before analytic differentiation.
class ChebFit {
 public:
  ChebFit() = default;
  ChebFit(std::span<const double> x, std::span<const double> y, double L, int degree,
          std::span<const PointConstraint> constraints = {});

  // Picks the smallest degree (in steps of 2) whose fit residual is within a
  // factor of the best achievable over [4, max_degree]. Keeps noisy data from
  // being chased with a high-degree polynomial whose derivatives blow up.
  static ChebFit fit_adaptive(std::span<const double> x, std::span<const double> y,
                              double L, int max_degree);

  double operator()(double x) const;
  std::vector<double> eval(std::span<const double> x) const;
  ChebFit derivative() const;

  int degree() const { return static_cast<int>(coef_.size()) - 1; }
  double domain_length() const { return L_; }
  double rms_residual() const { return rms_residual_; }
  const std::vector<double>& coefficients() const { return coef_; }

 private:
  double L_ = 1.0;
  std::vector<double> coef_;  // Chebyshev T_k coefficients on u = 2x/L - 1
  double rms_residual_ = 0.0;
};

}  // namespace treeweyl
