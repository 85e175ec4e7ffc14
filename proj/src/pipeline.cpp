#include "treeweyl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace treeweyl {

namespace fs = std::filesystem;
using nlohmann::json;

WeylSamples run_forward(const TreeGraph& g, const RhoGridSpec& spec,
                        const std::string& out_csv, int threads) {
  for (const auto& e : g.edges)
    require(e.has_potential(), "NoPotential",
            "forward run needs a potential on every edge; edge " + std::to_string(e.id) +
                " has none");
  WeylSamples s = sample_weyl(g, spec, threads);
  if (!out_csv.empty()) write_weyl_csv(out_csv, s);
  return s;
}

namespace {

// Recovered q lives on the leaf-at-zero frame of the current leaf; re-express
// it in the stored frame (x = 0 at endpoint 'a').
RecoveredEdge to_storage_frame(const EdgeData& e, int leaf_vertex, const std::vector<double>& x,
                               const std::vector<double>& q) {
  RecoveredEdge out;
  out.edge_id = e.id;
  out.leaf_vertex = leaf_vertex;
  out.length = e.length;
  if (leaf_vertex == e.a) {
    out.x = x;
    out.q = q;
  } else {
    const size_t n = x.size();
    out.x.resize(n);
    out.q.resize(n);
    for (size_t i = 0; i < n; ++i) {
      out.x[i] = e.length - x[n - 1 - i];
      out.q[i] = q[n - 1 - i];
    }
  }
  return out;
}

json edge_record(const EdgeData& e, int leaf_vertex, const EdgeInverseResult& r) {
  json j;
  j["edge_id"] = e.id;
  j["leaf_vertex"] = leaf_vertex;
  j["length"] = e.length;
  j["endpoint_residual"] = r.endpoint.residual;
  j["endpoint_cond"] = r.endpoint.cond;
  j["mu_count"] = r.spectra.mu.size();
  j["nu_count"] = r.spectra.nu.size();
  j["interior_max_residual"] = r.interior.max_residual;
  j["interior_max_cond"] = r.interior.max_cond;
  j["g0_fit_degree"] = r.g0_fit.degree();
  if (!r.tables.phi.empty()) j["wronskian_err_at_L"] = r.tables.wronskian_err;
  return j;
}

json config_record(const SolverConfig& cfg) {
  json j;
  j["N"] = cfg.N;
  j["Nc"] = cfg.nc();
  j["K_D"] = cfg.K_D;
  j["K_N"] = cfg.K_N;
  j["xm_points"] = cfg.xm_points;
  j["use_type2"] = cfg.use_type2 == SolverConfig::Type2::all ? "all" : "none";
  j["sv_rel_cutoff"] = cfg.sv_rel_cutoff;
  j["drop_threshold"] = cfg.drop_threshold;
  j["grid_G"] = cfg.grid_G;
  j["N_peel"] = cfg.n_peel();
  return j;
}

}  // namespace

std::string recovered_edge_filename(int edge_id) {
  return "q_edge_" + std::to_string(edge_id) + ".csv";
}

void write_recovered_edge_csv(const std::string& path, const RecoveredEdge& e) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  require(f != nullptr, "FileNotFound", "cannot write '" + path + "'");
  std::fprintf(f, "x, q_recovered\n");
  for (size_t i = 0; i < e.x.size(); ++i)
    std::fprintf(f, "%.17g,%.17g\n", e.x[i], e.q[i]);
  std::fclose(f);
}

RecoveredEdge read_recovered_edge_csv(const std::string& path, int edge_id) {
  std::ifstream in(path);
  require(in.good(), "FileNotFound", "cannot open '" + path + "'");
  RecoveredEdge e;
  e.edge_id = edge_id;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    double x, q;
    if (std::sscanf(line.c_str(), "%lg %lg", &x, &q) == 2) {
      e.x.push_back(x);
      e.q.push_back(q);
    }
  }
  require(!e.x.empty(), "BadRecoveredFile", "no samples in '" + path + "'");
  return e;
}

InverseRun run_inverse(const TreeGraph& topology, const WeylSamples& samples,
                       const SolverConfig& cfg, const std::string& out_dir) {
  require(samples.m() == topology.leaf_count(), "BadWeylFile",
          "Weyl matrix dimension " + std::to_string(samples.m()) +
              " does not match the leaf count " + std::to_string(topology.leaf_count()));

  InverseRun run;
  json report;
  report["config"] = config_record(cfg);
  report["iterations"] = json::array();

  TreeGraph cur = topology;
  WeylSamples cur_samples = samples;
  cur_samples.leaf_vertices = cur.leaf_order;

  auto finish_report = [&](const std::string& error) {
    if (!error.empty()) report["error"] = error;
    json ids = json::array();
    for (const auto& e : run.edges) ids.push_back(e.edge_id);
    report["edges_recovered"] = ids;
    run.report_json = report.dump(2) + "\n";
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream(fs::path(out_dir) / "report.json") << run.report_json;
      for (const auto& e : run.edges)
        write_recovered_edge_csv((fs::path(out_dir) / recovered_edge_filename(e.edge_id)).string(), e);
    }
  };

  try {
    while (true) {
      // terminal star (or single remaining edge): every edge solved locally
      std::vector<int> work_edges;
      Sheaf sheaf;
      int center = -1;
      bool is_star = false;
      if (cur.edge_count() == 1) {
        is_star = true;
        work_edges = {0};
      } else {
        auto found = find_sheaf(cur);
        if (std::holds_alternative<StarTerminal>(found)) {
          is_star = true;
          center = std::get<StarTerminal>(found).center;
          work_edges = std::get<StarTerminal>(found).edges;
        } else {
          sheaf = std::get<Sheaf>(found);
          work_edges = sheaf.leaf_edges;
        }
      }

      std::vector<int> cols;
      std::vector<int> leaf_of_edge;
      std::vector<double> lengths;
      for (int ei : work_edges) {
        const auto& e = cur.edges[ei];
        int leaf;
        if (cur.edge_count() == 1)
          leaf = e.a;  // single interval: anchor at the stored origin
        else
          leaf = e.other_vertex(is_star ? center : sheaf.v0);
        leaf_of_edge.push_back(leaf);
        cols.push_back(cur.leaf_position(leaf));
        lengths.push_back(e.length);
      }

      json iter;
      iter["type"] = is_star ? "star" : "sheaf";
      iter["vertex"] = is_star ? center : sheaf.v0;
      iter["samples_in"] = cur_samples.K();
      iter["edges"] = json::array();

      std::vector<EdgeInverseResult> results(work_edges.size());
      for (size_t p = 0; p < work_edges.size(); ++p) {
        results[p] = solve_local_edge(cur_samples, cols, lengths, static_cast<int>(p), cfg,
                                      /*with_tables=*/!is_star);
        const auto& e = cur.edges[work_edges[p]];
        run.edges.push_back(to_storage_frame(e, leaf_of_edge[p], results[p].x, results[p].q));
        run.spectra.emplace_back(e.id, results[p].spectra);
        iter["edges"].push_back(edge_record(e, leaf_of_edge[p], results[p]));
      }

      if (is_star) {
        report["iterations"].push_back(iter);
        break;
      }

      PeelInput pin;
      pin.samples = &cur_samples;
      pin.sheaf_cols = cols;
      pin.drop_threshold = cfg.drop_threshold;
      for (const auto& r : results) pin.tables.push_back(&r.tables);
      PeelResult peeled = peel(pin);
      iter["pivot_col"] = cols[peeled.pivot];
      iter["dropped_rho"] = peeled.dropped;
      report["iterations"].push_back(iter);

      cur = reduce(cur, sheaf);
      cur_samples = std::move(peeled.reduced);
      cur_samples.leaf_vertices = cur.leaf_order;
    }
  } catch (const Error& err) {
    finish_report(err.what());
    throw;
  }
  finish_report("");
  return run;
}

std::vector<EdgeErrors> compare_recovered(const std::string& recovered_dir,
                                          const TreeGraph& reference,
                                          const std::string& out_csv) {
  std::vector<EdgeErrors> table;
  std::vector<std::string> curve_paths;
  for (const auto& e : reference.edges) {
    const fs::path p = fs::path(recovered_dir) / recovered_edge_filename(e.id);
    require(fs::exists(p), "EdgeSetMismatch",
            "missing recovered file for edge " + std::to_string(e.id));
    require(e.has_potential() || e.exact, "NoPotential",
            "reference graph lacks a potential on edge " + std::to_string(e.id));
    RecoveredEdge rec = read_recovered_edge_csv(p.string(), e.id);
    const QFunc qref = e.potential_from(e.a);

    double qmax = 0.0;
    for (double x : rec.x) qmax = std::max(qmax, std::abs(qref(x)));
    EdgeErrors err;
    err.edge_id = e.id;
    std::vector<double> refv(rec.x.size());
    for (size_t i = 0; i < rec.x.size(); ++i) {
      refv[i] = qref(rec.x[i]);
      const double d = std::abs(rec.q[i] - refv[i]);
      err.max_abs = std::max(err.max_abs, d);
      if (std::abs(refv[i]) > 0.1 * qmax) err.max_rel = std::max(err.max_rel, d / std::abs(refv[i]));
    }
    table.push_back(err);

    if (!out_csv.empty()) {
      const fs::path cp = fs::path(recovered_dir) / ("cmp_edge_" + std::to_string(e.id) + ".csv");
      std::FILE* f = std::fopen(cp.string().c_str(), "w");
      require(f != nullptr, "FileNotFound", "cannot write '" + cp.string() + "'");
      std::fprintf(f, "x, q_reference, q_recovered, abs_error\n");
      for (size_t i = 0; i < rec.x.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", rec.x[i], refv[i], rec.q[i],
                     std::abs(rec.q[i] - refv[i]));
      std::fclose(f);
    }
  }
  if (!out_csv.empty()) {
    std::FILE* f = std::fopen(out_csv.c_str(), "w");
    require(f != nullptr, "FileNotFound", "cannot write '" + out_csv + "'");
    std::fprintf(f, "edge_id, max_abs_err, max_rel_err\n");
    for (const auto& e : table)
      std::fprintf(f, "%d,%.17g,%.17g\n", e.edge_id, e.max_abs, e.max_rel);
    std::fclose(f);
  }
  return table;
}

}  // namespace treeweyl
