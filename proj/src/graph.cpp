#include "treeweyl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>

#include "json.hpp"

namespace treeweyl {

QFunc EdgeData::potential_from(int origin) const {
  require(has_potential() || exact, "NoPotential",
          "edge " + std::to_string(id) + " carries no potential data");
  const double L = length;
  if (exact) {
    if (origin == a) return exact;
    QFunc f = exact;
    return [f, L](double x) { return f(L - x); };
  }
  auto sp = std::make_shared<SampledPotential>(samples_from(origin), L);
  return [sp](double x) { return (*sp)(x); };
}

std::vector<double> EdgeData::samples_from(int origin) const {
  require(origin == a || origin == b, "BadVertex", "samples_from: vertex not on edge");
  std::vector<double> s = q;
  if (origin == b) std::reverse(s.begin(), s.end());
  return s;
}

int TreeGraph::degree(int v) const {
  auto it = incident.find(v);
  return it == incident.end() ? 0 : static_cast<int>(it->second.size());
}

int TreeGraph::leaf_edge(int leaf_vertex) const {
  auto it = incident.find(leaf_vertex);
  require(it != incident.end() && it->second.size() == 1, "BadVertex",
          "vertex " + std::to_string(leaf_vertex) + " is not a leaf");
  return it->second.front();
}

int TreeGraph::leaf_position(int leaf_vertex) const {
  for (size_t i = 0; i < leaf_order.size(); ++i)
    if (leaf_order[i] == leaf_vertex) return static_cast<int>(i);
  fail("BadVertex", "vertex " + std::to_string(leaf_vertex) + " not in leaf order");
}

const EdgeData* TreeGraph::edge_by_id(int id) const {
  for (const auto& e : edges)
    if (e.id == id) return &e;
  return nullptr;
}

TreeGraph validate_tree(TreeGraph g) {
  const int P = g.edge_count();
  require(P >= 1, "TooFewLeaves", "graph has no edges");
  require(static_cast<int>(g.vertices.size()) == P + 1, "CycleDetected",
          "tree needs P+1 vertices for P edges; got " + std::to_string(g.vertices.size()) +
              " vertices, " + std::to_string(P) + " edges");

  std::set<int> vset(g.vertices.begin(), g.vertices.end());
  require(static_cast<int>(vset.size()) == P + 1, "CycleDetected", "duplicate vertex ids");

  g.incident.clear();
  for (int i = 0; i < P; ++i) {
    auto& e = g.edges[i];
    require(e.a != e.b, "CycleDetected", "edge " + std::to_string(e.id) + " is a self-loop");
    require(vset.count(e.a) && vset.count(e.b), "Disconnected",
            "edge " + std::to_string(e.id) + " references unknown vertex");
    require(std::isfinite(e.length) && e.length > 0.0, "NonPositiveLength",
            "edge " + std::to_string(e.id) + " has length " + std::to_string(e.length));
    g.incident[e.a].push_back(i);
    g.incident[e.b].push_back(i);
  }

  // connectivity; with P edges on P+1 distinct vertices this also rules out cycles
  std::set<int> seen;
  std::queue<int> bfs;
  bfs.push(g.vertices.front());
  seen.insert(g.vertices.front());
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    for (int ei : g.incident[v]) {
      int u = g.edges[ei].other_vertex(v);
      if (seen.insert(u).second) bfs.push(u);
    }
  }
  require(seen.size() == vset.size(), "Disconnected",
          "graph splits into components; reached " + std::to_string(seen.size()) + " of " +
              std::to_string(vset.size()) + " vertices");

  std::vector<int> leaves;
  for (int v : g.vertices)
    if (g.degree(v) == 1) leaves.push_back(v);
  require(leaves.size() >= 2, "TooFewLeaves", "tree must have at least 2 leaves");

  if (g.leaf_order.empty()) {
    g.leaf_order = leaves;
  } else {
    std::set<int> a(leaves.begin(), leaves.end());
    std::set<int> b(g.leaf_order.begin(), g.leaf_order.end());
    require(a == b && g.leaf_order.size() == leaves.size(), "BadLeafOrder",
            "leaf_order must list exactly the degree-1 vertices");
  }
  return g;
}

std::variant<Sheaf, StarTerminal> find_sheaf(const TreeGraph& g) {
  std::vector<int> internal;
  for (int v : g.vertices)
    if (g.degree(v) >= 2) internal.push_back(v);
  require(!internal.empty(), "NoInternalVertex",
          "single-edge graph; treat it as a one-edge star");
  std::sort(internal.begin(), internal.end());

  if (internal.size() == 1) {
    StarTerminal star;
    star.center = internal.front();
    star.edges = g.incident.at(star.center);
    return star;
  }

  auto is_leaf_edge = [&](int ei) {
    const auto& e = g.edges[ei];
    return g.is_leaf(e.a) || g.is_leaf(e.b);
  };

  for (int v : internal) {
    Sheaf s;
    s.v0 = v;
    for (int ei : g.incident.at(v)) {
      if (is_leaf_edge(ei))
        s.leaf_edges.push_back(ei);
      else if (!s.stem_edge)
        s.stem_edge = ei;
      else {
        s.leaf_edges.clear();
        break;
      }
    }
    s.m1 = static_cast<int>(s.leaf_edges.size());
    if (s.m1 >= 2 && s.stem_edge) return s;
  }
  fail("NoSheafFound",
       "no abscission vertex with >= 2 leaf edges; merge degree-2 chains first");
}

TreeGraph reduce(const TreeGraph& g, const Sheaf& sheaf) {
  require(sheaf.v0 >= 0 && g.degree(sheaf.v0) >= 2, "SheafMismatch",
          "abscission vertex not internal in this graph");
  std::set<int> removed(sheaf.leaf_edges.begin(), sheaf.leaf_edges.end());
  std::set<int> dropped_leaves;
  for (int ei : removed) {
    require(ei >= 0 && ei < g.edge_count(), "SheafMismatch", "sheaf edge index out of range");
    const auto& e = g.edges[ei];
    require(e.a == sheaf.v0 || e.b == sheaf.v0, "SheafMismatch",
            "sheaf edge not incident to the abscission vertex");
    int leaf = e.other_vertex(sheaf.v0);
    require(g.is_leaf(leaf), "SheafMismatch", "sheaf edge does not end in a leaf");
    dropped_leaves.insert(leaf);
  }

  TreeGraph out;
  for (int v : g.vertices)
    if (!dropped_leaves.count(v)) out.vertices.push_back(v);
  for (int i = 0; i < g.edge_count(); ++i)
    if (!removed.count(i)) out.edges.push_back(g.edges[i]);
  out.leaf_order.push_back(sheaf.v0);  // gamma_0 comes first
  for (int v : g.leaf_order)
    if (!dropped_leaves.count(v)) out.leaf_order.push_back(v);
  return validate_tree(std::move(out));
}

const std::map<std::string, QFunc>& potential_presets() {
  static const std::map<std::string, QFunc> presets = {
      {"zero", [](double) { return 0.0; }},
      {"one", [](double) { return 1.0; }},
      {"q0", [](double x) { return std::cyl_bessel_j(0.0, 9.0 * x) + 1.0; }},
      {"q1", [](double x) { return std::abs(x - 1.0) + 1.0; }},
      {"q2", [](double x) { return std::exp(-(x - 0.5) * (x - 0.5)); }},
      {"q3", [](double x) { return std::sin(8.0 * x) + 2.0 * M_PI / 3.0; }},
      {"q4", [](double x) { return std::cos(9.0 * x * x) + 2.0; }},
      {"q5", [](double x) { return 1.0 / (x + 0.1); }},
      {"q6", [](double x) { return 1.0 / ((x + 0.1) * (x + 0.1)); }},
      {"q7", [](double x) { return std::exp(x); }},
      {"q8",
       [](double x) {
         if (x < 0.25) return -35.2 * x * x + 17.6 * x;
         if (x < 0.75) return 35.2 * x * x - 35.2 * x + 8.8;
         return -35.2 * x * x + 52.8 * x - 17.6;
       }},
  };
  return presets;
}

namespace {

TreeGraph graph_from_json(const nlohmann::json& j, int grid_G) {
  require(grid_G >= 64, "BadGrid", "potential grid must have G >= 64 points");
  TreeGraph g;
  require(j.contains("vertices") && j.contains("edges"), "BadGraphFile",
          "graph file needs 'vertices' and 'edges'");
  for (const auto& v : j.at("vertices")) g.vertices.push_back(v.get<int>());
  int idx = 0;
  for (const auto& je : j.at("edges")) {
    EdgeData e;
    e.id = idx++;
    e.a = je.at("a").get<int>();
    e.b = je.at("b").get<int>();
    e.length = je.at("length").get<double>();
    if (je.contains("potential")) {
      const auto& jp = je.at("potential");
      if (jp.contains("preset")) {
        e.preset = jp.at("preset").get<std::string>();
        auto it = potential_presets().find(e.preset);
        require(it != potential_presets().end(), "UnknownPreset",
                "unknown potential preset '" + e.preset + "'");
        e.exact = it->second;
        e.q.resize(grid_G);
        for (int i = 0; i < grid_G; ++i)
          e.q[i] = e.exact(e.length * i / static_cast<double>(grid_G - 1));
      } else if (jp.contains("samples")) {
        e.q = jp.at("samples").get<std::vector<double>>();
        require(static_cast<int>(e.q.size()) >= 64, "BadGrid",
                "edge " + std::to_string(e.id) + ": need >= 64 potential samples");
      } else {
        fail("BadGraphFile", "potential must give 'preset' or 'samples'");
      }
    }
    g.edges.push_back(std::move(e));
  }
  if (j.contains("leaf_order"))
    for (const auto& v : j.at("leaf_order")) g.leaf_order.push_back(v.get<int>());

  g = validate_tree(std::move(g));
  // File contract: a leaf edge is written leaf-first, so its samples start at
  // the leaf (x = 0 there).
  for (const auto& e : g.edges) {
    if (g.is_leaf(e.b) && !g.is_leaf(e.a))
      fail("BadLeafOrientation", "edge " + std::to_string(e.id) +
                                     ": leaf endpoint must be listed as 'a'");
  }
  return g;
}

}  // namespace

TreeGraph load_graph_json(const std::string& path, int grid_G) {
  std::ifstream in(path);
  require(in.good(), "FileNotFound", "cannot open graph file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail("BadGraphFile", std::string("json parse error: ") + e.what());
  }
  return graph_from_json(j, grid_G);
}

TreeGraph parse_graph_json(const std::string& text, int grid_G) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail("BadGraphFile", std::string("json parse error: ") + e.what());
  }
  return graph_from_json(j, grid_G);
}

}  // namespace treeweyl
