#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "support/test_helpers.hpp"
#include "treeweyl/peel.hpp"

using namespace treeweyl;

namespace {

// Exact endpoint tables phi_j(rho_k, L_j), S_j, and derivatives from direct
// integration of the known potentials, leaf-at-zero frame.
EndpointTables exact_tables(const TreeGraph& g, int edge_idx, int leaf,
                            std::span<const cplx> rho) {
  const auto& e = g.edges[edge_idx];
  const QFunc q = e.potential_from(leaf);
  EndpointTables t;
  for (const cplx& r : rho) {
    auto f = integrate_fundamentals(q, e.length, r, recommended_steps(std::abs(r), e.length));
    t.phi.push_back(f.phi);
    t.S.push_back(f.S);
    t.phi_p.push_back(f.phi_p);
    t.S_p.push_back(f.S_p);
  }
  return t;
}

PeelResult peel_with_exact_tables(const TreeGraph& g, const Sheaf& sheaf,
                                  const WeylSamples& w,
                                  std::vector<EndpointTables>& storage) {
  storage.clear();
  storage.reserve(sheaf.leaf_edges.size());
  PeelInput in;
  in.samples = &w;
  for (int ei : sheaf.leaf_edges) {
    const int leaf = g.edges[ei].other_vertex(sheaf.v0);
    in.sheaf_cols.push_back(g.leaf_position(leaf));
    storage.push_back(exact_tables(g, ei, leaf, w.rho));
  }
  for (const auto& t : storage) in.tables.push_back(&t);
  return peel(in);
}

double rel_err(const Eigen::MatrixXcd& got, const Eigen::MatrixXcd& want) {
  return (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("peeling two edges of a symmetric star leaves the single-interval matrix") {
  auto g = parse_graph_json(R"({"vertices":[1,2,3,0],"edges":[
    {"a":1,"b":0,"length":1.0,"potential":{"preset":"zero"}},
    {"a":2,"b":0,"length":1.0,"potential":{"preset":"zero"}},
    {"a":3,"b":0,"length":1.0,"potential":{"preset":"zero"}}],
    "leaf_order":[1,2,3]})", 201);
  RhoGridSpec spec;
  spec.K = 12;
  auto w = sample_weyl(g, spec);

  Sheaf sheaf;  // peel e_1, e_2; the remaining edge e_3 becomes the interval
  sheaf.v0 = 0;
  sheaf.leaf_edges = {0, 1};
  sheaf.stem_edge = 2;
  sheaf.m1 = 2;
  std::vector<EndpointTables> storage;
  auto out = peel_with_exact_tables(g, sheaf, w, storage);
  CHECK(out.dropped.empty());
  for (int k = 0; k < out.reduced.K(); ++k) {
    const cplx rho = out.reduced.rho[k];
    const auto& R = out.reduced.M[k];
    REQUIRE(R.rows() == 2);
    const cplx cot = std::cos(rho) / std::sin(rho);
    CHECK(std::abs(R(0, 0) + rho * cot) < 1e-9 * std::abs(rho * cot));
    CHECK(std::abs(R(1, 1) + rho * cot) < 1e-9 * std::abs(rho * cot));
    CHECK(std::abs(R(0, 1) - rho / std::sin(rho)) < 1e-9 * std::abs(rho / std::sin(rho)));
    CHECK(std::abs(R(1, 0) - R(0, 1)) < 1e-9 * std::abs(R(0, 1)));
  }
}

TEST_CASE("peeling the large example once matches assembly on the remainder") {
  auto g = load_graph_json(TREEWEYL_DATA_DIR "/example2.json", 501);
  RhoGridSpec spec;
  spec.K = 180;
  auto w = sample_weyl(g, spec);
  auto sheaf = std::get<Sheaf>(find_sheaf(g));
  CHECK(sheaf.m1 == 9);
  std::vector<EndpointTables> storage;
  auto out = peel_with_exact_tables(g, sheaf, w, storage);
  CHECK(out.dropped.empty());
  auto reduced_graph = reduce(g, sheaf);
  for (int k = 0; k < out.reduced.K(); ++k) {
    auto direct = assemble_weyl(reduced_graph, out.reduced.rho[k]);
    CHECK(rel_err(out.reduced.M[k], direct) < 1e-8);
  }
}

TEST_CASE("reduction to the stem edge gives a symmetric 2x2 matrix") {
  // 4-star with distinct potentials, peel all but one edge
  auto g = parse_graph_json(R"({"vertices":[1,2,3,4,0],"edges":[
    {"a":1,"b":0,"length":1.0,"potential":{"preset":"q2"}},
    {"a":2,"b":0,"length":1.2,"potential":{"preset":"q7"}},
    {"a":3,"b":0,"length":0.9,"potential":{"preset":"q3"}},
    {"a":4,"b":0,"length":1.1,"potential":{"preset":"q4"}}],
    "leaf_order":[1,2,3,4]})", 501);
  RhoGridSpec spec;
  spec.K = 20;
  auto w = sample_weyl(g, spec);
  Sheaf sheaf;
  sheaf.v0 = 0;
  sheaf.leaf_edges = {0, 1, 2};
  sheaf.stem_edge = 3;
  sheaf.m1 = 3;
  std::vector<EndpointTables> storage;
  auto out = peel_with_exact_tables(g, sheaf, w, storage);
  for (int k = 0; k < out.reduced.K(); ++k) {
    REQUIRE(out.reduced.M[k].rows() == 2);
    const double scale = out.reduced.M[k].cwiseAbs().maxCoeff();
    CHECK(std::abs(out.reduced.M[k](0, 1) - out.reduced.M[k](1, 0)) / scale < 1e-6);
  }
}

TEST_CASE("peel is a pointwise map: permuting the samples commutes") {
  auto g = testing::random_tree(3, 12);
  RhoGridSpec spec;
  spec.K = 8;
  auto w = sample_weyl(g, spec);
  auto sheaf = std::get<Sheaf>(find_sheaf(g));
  std::vector<EndpointTables> storage;
  auto fwd = peel_with_exact_tables(g, sheaf, w, storage);

  WeylSamples wp;
  wp.leaf_vertices = w.leaf_vertices;
  std::vector<int> perm = {3, 0, 7, 1, 5, 2, 6, 4};
  for (int k : perm) {
    wp.rho.push_back(w.rho[k]);
    wp.M.push_back(w.M[k]);
  }
  std::vector<EndpointTables> storage_p;
  storage_p.resize(storage.size());
  for (size_t t = 0; t < storage.size(); ++t)
    for (int k : perm) {
      storage_p[t].phi.push_back(storage[t].phi[k]);
      storage_p[t].S.push_back(storage[t].S[k]);
      storage_p[t].phi_p.push_back(storage[t].phi_p[k]);
      storage_p[t].S_p.push_back(storage[t].S_p[k]);
    }
  PeelInput in;
  in.samples = &wp;
  for (int ei : sheaf.leaf_edges)
    in.sheaf_cols.push_back(g.leaf_position(g.edges[ei].other_vertex(sheaf.v0)));
  for (const auto& t : storage_p) in.tables.push_back(&t);
  auto out_p = peel(in);
  for (size_t k = 0; k < perm.size(); ++k)
    CHECK((out_p.reduced.M[k] - fwd.reduced.M[perm[k]]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("random trees: peel with exact tables equals assembly on the reduced tree") {
  for (std::uint64_t seed : {101u, 202u}) {
    auto g = testing::random_tree(seed, 14);
    RhoGridSpec spec;
    spec.K = 10;
    auto w = sample_weyl(g, spec);
    auto sheaf = std::get<Sheaf>(find_sheaf(g));
    std::vector<EndpointTables> storage;
    auto out = peel_with_exact_tables(g, sheaf, w, storage);
    auto rg = reduce(g, sheaf);
    for (int k = 0; k < out.reduced.K(); ++k)
      CHECK(rel_err(out.reduced.M[k], assemble_weyl(rg, out.reduced.rho[k])) < 1e-7);
  }
}
