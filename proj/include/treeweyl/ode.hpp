#pragma once

#include <functional>
#include <vector>

#include "treeweyl/common.hpp"

namespace treeweyl {

using QFunc = std::function<double(double)>;

// Cubic (4-point Lagrange) interpolation of potential samples on a uniform
// grid over [0, L].
class SampledPotential {
 public:
  SampledPotential(std::vector<double> samples, double L);
  double operator()(double x) const;
  const std::vector<double>& samples() const { return q_; }
  double length() const { return L_; }

 private:
  std::vector<double> q_;
  double L_;
  double h_;
};

// Values of the fundamental pair at x = L: phi(rho,0)=1, phi'(rho,0)=0 and
// S(rho,0)=0, S'(rho,0)=1 for -y'' + q y = rho^2 y.
struct Fundamentals {
  cplx phi, phi_p, S, S_p;
};

// Step count giving ~1e-10 relative accuracy of the fixed-step 8th order
// scheme for |rho| up to a few hundred.
int recommended_steps(double abs_rho, double L);

Fundamentals integrate_fundamentals(const QFunc& q, double L, cplx rho, int nsteps);

// Same integration, values stored at every node of a uniform G-point grid.
struct FundamentalGrids {
  std::vector<double> x;
  std::vector<cplx> phi, phi_p, S, S_p;
};
FundamentalGrids integrate_fundamental_grids(const QFunc& q, double L, cplx rho, int G);

// Solution from the right endpoint: T(rho,L)=0, T'(rho,L)=1, via the
// Wronskian identity T = phi(L) S - S(L) phi.
inline cplx T_from_fundamentals(const Fundamentals& fl, cplx phi_x, cplx S_x) {
  return fl.phi * S_x - fl.S * phi_x;
}

}  // namespace treeweyl
