#pragma once

#include "treeweyl/sheaf_inverse.hpp"
#include "treeweyl/weyl.hpp"

namespace treeweyl {

// Input of one peeling step: Weyl samples of the current tree, the matrix
// columns of the sheaf's leaf edges, and per-edge endpoint tables
// phi_j(rho_k, L_j), S_j, phi_j', S_j' aligned with the sample list.
struct PeelInput {
  const WeylSamples* samples = nullptr;
  std::vector<int> sheaf_cols;
  std::vector<const EndpointTables*> tables;
  double drop_threshold = 1e-12;
};

struct PeelResult {
  WeylSamples reduced;        // rows/cols ordered [gamma_0, surviving leaves]
  std::vector<int> dropped;   // sample indices lost to small denominators
  int pivot = 0;              // index into sheaf_cols used as edge "1"
};

// Closed-form recomputation of the Weyl matrix after removing the sheaf's
// leaf edges; gamma_0 (the abscission vertex) takes row/column 0.
// Errors: SmallDenominator only if every sample is dropped.
PeelResult peel(const PeelInput& in);

}  // namespace treeweyl
