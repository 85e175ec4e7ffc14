#include "treeweyl/peel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace treeweyl {

PeelResult peel(const PeelInput& in) {
  require(in.samples != nullptr, "BadConfig", "peel: missing samples");
  const WeylSamples& w = *in.samples;
  const int m = w.m();
  const int m1 = static_cast<int>(in.sheaf_cols.size());
  const int K = w.K();
  require(m1 >= 1 && m1 < m, "BadConfig", "peel: sheaf must leave at least one other leaf");
  require(static_cast<int>(in.tables.size()) == m1, "BadConfig",
          "peel: one endpoint table per sheaf edge required");
  for (const auto* t : in.tables)
    require(t && static_cast<int>(t->phi.size()) == K, "BadConfig",
            "peel: endpoint tables must cover every sample");

  std::vector<int> rest;
  {
    std::set<int> sheaf(in.sheaf_cols.begin(), in.sheaf_cols.end());
    require(static_cast<int>(sheaf.size()) == m1, "BadConfig", "peel: duplicate sheaf column");
    for (int i = 0; i < m; ++i)
      if (!sheaf.count(i)) rest.push_back(i);
  }

  // Pivot = sheaf edge with the largest average |w_11(rho, gamma_0)|; every
  // formula divides by that value, so pick the best-conditioned candidate.
  int pivot = 0;
  double best = -1.0;
  for (int p = 0; p < m1; ++p) {
    const int cp = in.sheaf_cols[p];
    double acc = 0.0;
    for (int k = 0; k < K; ++k)
      acc += std::abs(in.tables[p]->phi[k] + w.M[k](cp, cp) * in.tables[p]->S[k]);
    if (acc > best) {
      best = acc;
      pivot = p;
    }
  }
  const int cp = in.sheaf_cols[pivot];
  const auto& tp = *in.tables[pivot];

  PeelResult out;
  out.pivot = pivot;
  out.reduced.leaf_vertices.clear();
  const int mr = m - m1 + 1;
  for (int k = 0; k < K; ++k) {
    const cplx Mpp = w.M[k](cp, cp);
    const cplx denom = tp.phi[k] + Mpp * tp.S[k];
    const double scale = std::abs(tp.phi[k]) + std::abs(Mpp * tp.S[k]);
    if (std::abs(denom) <= in.drop_threshold * scale) {
      out.dropped.push_back(k);
      continue;
    }

    Eigen::MatrixXcd R(mr, mr);
    // row 0: derivative of the normalized pivot solution at gamma_0
    cplx num = tp.phi_p[k] + Mpp * tp.S_p[k];
    for (int j = 0; j < m1; ++j) {
      if (j == pivot) continue;
      num += w.M[k](cp, in.sheaf_cols[j]) * in.tables[j]->S_p[k];
    }
    const cplx M00 = num / denom;
    R(0, 0) = M00;
    for (int t = 0; t < mr - 1; ++t) R(0, t + 1) = w.M[k](cp, rest[t]) / denom;
    for (int t = 0; t < mr - 1; ++t) {
      const int ct = rest[t];
      cplx d0 = 0.0;  // derivative of w_i at gamma_0 along the stem
      for (int j = 0; j < m1; ++j)
        d0 += w.M[k](ct, in.sheaf_cols[j]) * in.tables[j]->S_p[k];
      const cplx wi_at_v0 = w.M[k](ct, cp) * tp.S[k];
      R(t + 1, 0) = d0 - wi_at_v0 * M00;
      for (int u = 0; u < mr - 1; ++u)
        R(t + 1, u + 1) = w.M[k](ct, rest[u]) - wi_at_v0 * R(0, u + 1);
    }
    out.reduced.rho.push_back(w.rho[k]);
    out.reduced.M.push_back(std::move(R));
  }
  require(out.reduced.K() > 0, "SmallDenominator",
          "peel: every sample dropped by the denominator threshold");
  return out;
}

}  // namespace treeweyl
