#include "treeweyl/bessel.hpp"

#include <cmath>

namespace treeweyl {

namespace {

// j_n(z) = z^n/(2n+1)!! * sum_k c_k,  c_0 = 1,
// c_k = c_{k-1} * (-z^2/2) / (k (2n+2k+1)).
// Converges for any z; used in the regime |z| <= n where upward recurrence
// would be unstable.
cplx maclaurin_jn(int n, cplx z) {
  const cplx z2 = -0.5 * z * z;
  cplx term(1.0, 0.0);
  cplx sum(1.0, 0.0);
  for (int k = 1; k <= 400; ++k) {
    term *= z2 / (static_cast<double>(k) * static_cast<double>(2 * n + 2 * k + 1));
    sum += term;
    if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
  }
  cplx pref(1.0, 0.0);
  for (int m = 1; m <= n; ++m) pref *= z / static_cast<double>(2 * m + 1);
  return pref * sum;
}

cplx j0(cplx z) {
  if (std::abs(z) < 1e-8) return maclaurin_jn(0, z);
  return std::sin(z) / z;
}

cplx j1(cplx z) {
  if (std::abs(z) < 1e-2) return maclaurin_jn(1, z);
  return std::sin(z) / (z * z) - std::cos(z) / z;
}

// Downward (Miller) recurrence, normalized against j0 or j1. Covers the band
// order/2 < |z| <= order where the Maclaurin series cancels badly.
cplx miller_jn(int n, cplx z) {
  const int start = n + 20 + static_cast<int>(std::sqrt(40.0 * n));
  cplx jp(0.0, 0.0), jc(1e-280, 0.0);
  cplx val(0.0, 0.0), v0(0.0, 0.0), v1(0.0, 0.0);
  for (int k = start; k >= 0; --k) {
    const cplx jm = static_cast<double>(2 * k + 3) / z * jc - jp;
    jp = jc;
    jc = jm;
    if (k == n) val = jc;
    if (k == 1) v1 = jc;
    if (k == 0) v0 = jc;
    if (std::abs(jc) > 1e250) {
      const double s = 1e-250;
      jp *= s;
      jc *= s;
      val *= s;
      v0 *= s;
      v1 *= s;
    }
  }
  if (std::abs(v0) >= std::abs(v1)) return val * (j0(z) / v0);
  return val * (j1(z) / v1);
}

}  // namespace

cplx sph_bessel_j(int order, cplx z) {
  require(order >= 0 && order <= kMaxBesselOrder, "OrderTooLarge",
          "sph_bessel_j: order " + std::to_string(order) + " outside [0, " +
              std::to_string(kMaxBesselOrder) + "]");
  if (order == 0) return j0(z);
  if (order == 1) return j1(z);
  if (std::abs(z) > order) {
    cplx jm = j0(z), jc = j1(z);
    for (int k = 1; k < order; ++k) {
      cplx jn = static_cast<double>(2 * k + 1) / z * jc - jm;
      jm = jc;
      jc = jn;
    }
    return jc;
  }
  if (std::abs(z) > 0.5 * order) return miller_jn(order, z);
  return maclaurin_jn(order, z);
}

cplx sinc(cplx z) {
  if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

cplx sph_bessel_j_over_z(int order, cplx z) {
  require(order >= 1 && order <= kMaxBesselOrder, "OrderTooLarge",
          "sph_bessel_j_over_z: order outside [1, 64]");
  if (std::abs(z) > 1e-6) return sph_bessel_j(order, z) / z;
  // j_n(z)/z = z^{n-1}/(2n+1)!! * (1 + O(z^2))
  const cplx z2 = -0.5 * z * z;
  cplx pref(1.0, 0.0);
  for (int m = 1; m <= order; ++m) pref /= static_cast<double>(2 * m + 1);
  for (int m = 1; m < order; ++m) pref *= z;
  return pref * (1.0 + z2 / static_cast<double>(2 * order + 3));
}

std::vector<cplx> sph_bessel_j_all(int nmax, cplx z) {
  require(nmax >= 0 && nmax <= kMaxBesselOrder, "OrderTooLarge",
          "sph_bessel_j_all: nmax outside [0, 64]");
  std::vector<cplx> out(static_cast<size_t>(nmax) + 1);
  out[0] = j0(z);
  if (nmax == 0) return out;
  out[1] = j1(z);
  // Upward recurrence is stable while the order stays below |z|.
  const int stable = std::min(nmax, static_cast<int>(std::abs(z)));
  for (int k = 1; k < stable; ++k)
    out[k + 1] = static_cast<double>(2 * k + 1) / z * out[k] - out[k - 1];
  for (int k = std::max(2, stable + 1); k <= nmax; ++k)
    out[k] = std::abs(z) > 0.5 * k ? miller_jn(k, z) : maclaurin_jn(k, z);
  return out;
}

}  // namespace treeweyl
