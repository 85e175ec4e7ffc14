#pragma once

#include <string>
#include <vector>

#include "treeweyl/peel.hpp"

namespace treeweyl {

// Per-edge recovery product of an inverse run, in the frame of the stored
// edge orientation (x = 0 at endpoint 'a' of the graph file).
struct RecoveredEdge {
  int edge_id = -1;
  int leaf_vertex = -1;  // leaf the local problem was anchored at
  double length = 0.0;
  std::vector<double> x, q;
};

struct InverseRun {
  std::vector<RecoveredEdge> edges;
  std::vector<std::pair<int, Spectra>> spectra;  // edge id -> recovered roots
  std::string report_json;                       // deterministic run report
};

// Forward problem entry point: samples the Weyl matrix of a fully specified
// graph on the rule grid and (optionally) writes the CSV.
WeylSamples run_forward(const TreeGraph& g, const RhoGridSpec& spec,
                        const std::string& out_csv = "", int threads = 0);

// Inverse pipeline: find sheaf -> local inverse on its leaf edges -> peel ->
// reduce, finishing with the local inverse on the terminal star. The graph
// supplies topology and lengths only; potentials in it are ignored.
InverseRun run_inverse(const TreeGraph& topology, const WeylSamples& samples,
                       const SolverConfig& cfg, const std::string& out_dir = "");

// Error table between a recovered directory and a reference graph file.
struct EdgeErrors {
  int edge_id = -1;
  double max_abs = 0.0;
  double max_rel = 0.0;  // over the region |q_ref| > 0.1 max|q_ref|
};
std::vector<EdgeErrors> compare_recovered(const std::string& recovered_dir,
                                          const TreeGraph& reference,
                                          const std::string& out_csv = "");

// Helpers shared with the CLI and tests.
std::string recovered_edge_filename(int edge_id);
void write_recovered_edge_csv(const std::string& path, const RecoveredEdge& e);
RecoveredEdge read_recovered_edge_csv(const std::string& path, int edge_id);

}  // namespace treeweyl
