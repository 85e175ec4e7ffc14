#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "treeweyl/graph.hpp"

namespace treeweyl {

// rho_k = 10^alpha_k + i*im_offset, alpha_k drawn uniformly on
// [alpha_min, alpha_max] from a fixed seed, sorted ascending.
struct RhoGridSpec {
  int K = 180;
  double alpha_min = 0.0;
  double alpha_max = 2.0;
  double im_offset = 0.1;
  std::uint64_t seed = 1;
};

std::vector<cplx> rule_rho_grid(const RhoGridSpec& spec);

// Weyl matrices M(rho_k^2); row/column i corresponds to position i in the
// leaf ordering of the graph the samples were computed on.
struct WeylSamples {
  std::vector<int> leaf_vertices;  // may be empty when read from a file
  std::vector<cplx> rho;
  std::vector<Eigen::MatrixXcd> M;

  int K() const { return static_cast<int>(rho.size()); }
  int m() const { return M.empty() ? 0 : static_cast<int>(M.front().rows()); }
};

// Full solve at one spectral point: the m Weyl solutions in the per-edge
// fundamental basis w_i = a phi_j + b S_j, and the Weyl matrix read off at
// the leaves. Errors: SingularSystem when rho^2 sits on the real spectrum.
struct WeylAssembly {
  Eigen::MatrixXcd M;       // m x m
  Eigen::MatrixXcd coeffs;  // 2P x m, rows (a_0, b_0, a_1, b_1, ...)
  std::vector<Fundamentals> edge_fund;  // per edge, in its a-frame
};

WeylAssembly assemble_weyl_full(const TreeGraph& g, cplx rho);
Eigen::MatrixXcd assemble_weyl(const TreeGraph& g, cplx rho);

// Residuals of the vertex conditions over all Weyl solutions; both should be
// at rounding level. Used as self-checks in the tests.
struct WeylResiduals {
  double kirchhoff;  // max |sum of outward derivatives| / max |w'|
  double leaf_data;  // max |w_i(gamma_j) - delta_ij|
};
WeylResiduals weyl_residuals(const TreeGraph& g, cplx rho);

// Evaluates assemble_weyl over the grid; parallel over spectral points.
WeylSamples sample_weyl(const TreeGraph& g, const RhoGridSpec& spec, int threads = 0);
WeylSamples sample_weyl(const TreeGraph& g, std::vector<cplx> rho, int threads = 0);

// CSV schema: header `k, re_rho, im_rho, i, j, re_M, im_M`, one row per
// (k,i,j), k-major then i then j, 17 significant digits (round-trip exact).
// Comment lines starting with '#' precede the header (peeling provenance).
void write_weyl_csv(const std::string& path, const WeylSamples& s,
                    const std::vector<std::string>& comments = {});
WeylSamples read_weyl_csv(const std::string& path);

}  // namespace treeweyl
