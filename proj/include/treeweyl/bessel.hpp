#pragma once

#include <vector>

#include "treeweyl/common.hpp"

namespace treeweyl {

// Largest spherical Bessel order the evaluator accepts. The series
// representations never need more than 2*Nmax+1 with Nmax around 21.
inline constexpr int kMaxBesselOrder = 128;

// Spherical Bessel function j_n(z) of the first kind for complex argument.
// Upward recurrence where it is stable (|z| > n), Maclaurin series otherwise.
// Relative accuracy ~1e-13 for |z| <= 2000, |Im z| <= 10.
cplx sph_bessel_j(int order, cplx z);

// j_n(z)/z with the removable singularity at z = 0 handled (order >= 1).
cplx sph_bessel_j_over_z(int order, cplx z);

// sin(z)/z with the removable singularity handled.
cplx sinc(cplx z);

// j_0(z), ..., j_nmax(z) in one pass.
std::vector<cplx> sph_bessel_j_all(int nmax, cplx z);

}  // namespace treeweyl
