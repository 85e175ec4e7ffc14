#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "treeweyl/common.hpp"
#include "treeweyl/ode.hpp"

namespace treeweyl {

// One edge of the metric tree, identified with [0, L]; x = 0 sits at vertex a.
// Potential data is optional: inverse runs know only lengths and topology.
struct EdgeData {
  int id = -1;  // position in the input edge list, stable across reductions
  int a = -1, b = -1;
  double length = 0.0;
  std::vector<double> q;        // samples on a uniform grid over [0, L]
  QFunc exact;                  // closed form when built from a preset
  std::string preset;

  bool has_potential() const { return !q.empty(); }
  int other_vertex(int v) const { return v == a ? b : a; }
  // Potential as a callable in the frame with x = 0 at `origin` (a or b).
  QFunc potential_from(int origin) const;
  std::vector<double> samples_from(int origin) const;
};

struct TreeGraph {
  std::vector<int> vertices;
  std::vector<EdgeData> edges;
  std::vector<int> leaf_order;  // vertex ids of the degree-1 vertices

  // derived by validate_tree
  std::map<int, std::vector<int>> incident;  // vertex id -> edge indices

  int edge_count() const { return static_cast<int>(edges.size()); }
  int leaf_count() const { return static_cast<int>(leaf_order.size()); }
  int degree(int v) const;
  bool is_leaf(int v) const { return degree(v) == 1; }
  // Index into `edges` of the unique edge incident to a leaf vertex.
  int leaf_edge(int leaf_vertex) const;
  int leaf_position(int leaf_vertex) const;
  const EdgeData* edge_by_id(int id) const;
};

// Checks the tree invariants (P edges, P+1 vertices, connected, positive
// lengths, m >= 2, leaf_order consistent) and builds the derived tables.
// Errors: CycleDetected, Disconnected, NonPositiveLength, TooFewLeaves,
// BadLeafOrder.
TreeGraph validate_tree(TreeGraph g);

// Star-shaped subtree whose edges, except possibly the stem, end in leaves.
struct Sheaf {
  int v0 = -1;                    // abscission vertex
  std::vector<int> leaf_edges;    // indices into TreeGraph::edges
  std::optional<int> stem_edge;   // absent only for the terminal star
  int m1 = 0;
};

struct StarTerminal {
  int center = -1;
  std::vector<int> edges;
};

// Finds a sheaf (>= 2 leaf edges at the abscission vertex, at most one other
// edge), smallest vertex id winning ties, or reports the terminal star.
// Errors: NoInternalVertex (single edge), NoSheafFound (only degree-2 chains
// remain; merge the chained edges and retry).
std::variant<Sheaf, StarTerminal> find_sheaf(const TreeGraph& g);

// Removes the sheaf's leaf edges; v0 becomes leaf gamma_0 and is placed first
// in the new leaf ordering, all surviving leaves keep their relative order.
TreeGraph reduce(const TreeGraph& g, const Sheaf& sheaf);

// Built-in potentials usable in graph files as {"preset": name}.
const std::map<std::string, QFunc>& potential_presets();

// Graph file I/O. Schema:
//   {"vertices":[ids],
//    "edges":[{"a":id,"b":id,"length":x,
//              "potential":{"preset":name}|{"samples":[...]}}, ...],
//    "leaf_order":[ids]}
// "potential" may be omitted (topology-only file). Leaf edges must list their
// leaf as "a" (x = 0 at the leaf). grid_G controls preset sampling density.
TreeGraph load_graph_json(const std::string& path, int grid_G = 2001);
TreeGraph parse_graph_json(const std::string& text, int grid_G = 2001);

}  // namespace treeweyl
