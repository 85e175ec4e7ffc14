#include "treeweyl/weyl.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

namespace treeweyl {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<cplx> rule_rho_grid(const RhoGridSpec& spec) {
  require(spec.K >= 1, "BadConfig", "rho grid needs K >= 1");
  require(spec.im_offset > 0.0, "BadConfig", "im_offset must be positive (rho^2 not real)");
  std::uint64_t state = spec.seed;
  std::vector<double> alpha(spec.K);
  for (int k = 0; k < spec.K; ++k) {
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    alpha[k] = spec.alpha_min + (spec.alpha_max - spec.alpha_min) * u;
  }
  std::sort(alpha.begin(), alpha.end());
  std::vector<cplx> rho(spec.K);
  for (int k = 0; k < spec.K; ++k) rho[k] = cplx(std::pow(10.0, alpha[k]), spec.im_offset);
  return rho;
}

WeylAssembly assemble_weyl_full(const TreeGraph& g, cplx rho) {
  require(std::abs((rho * rho).imag()) > 0.0, "BadConfig",
          "assemble_weyl: rho^2 must not be real");
  const int P = g.edge_count();
  const int m = g.leaf_count();
  WeylAssembly out;
  out.edge_fund.resize(P);
  for (int i = 0; i < P; ++i) {
    const auto& e = g.edges[i];
    out.edge_fund[i] = integrate_fundamentals(e.potential_from(e.a), e.length, rho,
                                              recommended_steps(std::abs(rho), e.length));
  }

  // Unknowns (a_j, b_j) per edge; rows: leaf values, then continuity and
  // Kirchhoff at the internal vertices in ascending id order.
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2 * P, 2 * P);
  auto value_coeffs = [&](int ei, int v, cplx& ca, cplx& cb) {
    if (v == g.edges[ei].a) {
      ca = 1.0;
      cb = 0.0;
    } else {
      ca = out.edge_fund[ei].phi;
      cb = out.edge_fund[ei].S;
    }
  };
  auto outward_deriv_coeffs = [&](int ei, int v, cplx& ca, cplx& cb) {
    if (v == g.edges[ei].a) {
      ca = 0.0;
      cb = 1.0;
    } else {
      ca = -out.edge_fund[ei].phi_p;
      cb = -out.edge_fund[ei].S_p;
    }
  };

  int row = 0;
  std::vector<int> leaf_rows;  // row index of each leaf's value equation
  for (int v : g.leaf_order) {
    const int ei = g.leaf_edge(v);
    cplx ca, cb;
    value_coeffs(ei, v, ca, cb);
    A(row, 2 * ei) = ca;
    A(row, 2 * ei + 1) = cb;
    leaf_rows.push_back(row);
    ++row;
  }
  std::vector<int> internal;
  for (int v : g.vertices)
    if (g.degree(v) >= 2) internal.push_back(v);
  std::sort(internal.begin(), internal.end());
  for (int v : internal) {
    const auto& inc = g.incident.at(v);
    for (size_t t = 1; t < inc.size(); ++t) {
      cplx ca0, cb0, ca1, cb1;
      value_coeffs(inc[0], v, ca0, cb0);
      value_coeffs(inc[t], v, ca1, cb1);
      A(row, 2 * inc[0]) = ca0;
      A(row, 2 * inc[0] + 1) = cb0;
      A(row, 2 * inc[t]) -= ca1;
      A(row, 2 * inc[t] + 1) -= cb1;
      ++row;
    }
    for (int ei : inc) {
      cplx ca, cb;
      outward_deriv_coeffs(ei, v, ca, cb);
      A(row, 2 * ei) += ca;
      A(row, 2 * ei + 1) += cb;
    }
    ++row;
  }
  require(row == 2 * P, "Internal", "assemble_weyl: equation count mismatch");

  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(2 * P, m);
  for (int i = 0; i < m; ++i) rhs(leaf_rows[i], i) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  require(lu.isInvertible(), "SingularSystem",
          "assemble_weyl: vertex system singular at rho = (" +
              std::to_string(rho.real()) + ", " + std::to_string(rho.imag()) + ")");
  out.coeffs = lu.solve(rhs);

  out.M.resize(m, m);
  for (int j = 0; j < m; ++j) {
    const int v = g.leaf_order[j];
    const int ei = g.leaf_edge(v);
    for (int i = 0; i < m; ++i) {
      const cplx a = out.coeffs(2 * ei, i), b = out.coeffs(2 * ei + 1, i);
      // derivative at the leaf taken into the graph
      if (v == g.edges[ei].a)
        out.M(i, j) = b;
      else
        out.M(i, j) = -(a * out.edge_fund[ei].phi_p + b * out.edge_fund[ei].S_p);
    }
  }
  return out;
}

Eigen::MatrixXcd assemble_weyl(const TreeGraph& g, cplx rho) {
  return assemble_weyl_full(g, rho).M;
}

WeylResiduals weyl_residuals(const TreeGraph& g, cplx rho) {
  const auto full = assemble_weyl_full(g, rho);
  const int m = g.leaf_count();
  WeylResiduals r{0.0, 0.0};
  double dscale = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int v : g.vertices) {
      if (g.degree(v) < 2) continue;
      cplx sum = 0.0;
      for (int ei : g.incident.at(v)) {
        const cplx a = full.coeffs(2 * ei, i), b = full.coeffs(2 * ei + 1, i);
        if (v == g.edges[ei].a)
          sum += b;
        else
          sum += -(a * full.edge_fund[ei].phi_p + b * full.edge_fund[ei].S_p);
        dscale = std::max(dscale, std::abs(b));
        dscale = std::max(dscale, std::abs(a * full.edge_fund[ei].phi_p + b * full.edge_fund[ei].S_p));
      }
      r.kirchhoff = std::max(r.kirchhoff, std::abs(sum));
    }
    for (int j = 0; j < m; ++j) {
      const int v = g.leaf_order[j];
      const int ei = g.leaf_edge(v);
      const cplx a = full.coeffs(2 * ei, i), b = full.coeffs(2 * ei + 1, i);
      cplx val = (v == g.edges[ei].a) ? a : a * full.edge_fund[ei].phi + b * full.edge_fund[ei].S;
      r.leaf_data = std::max(r.leaf_data, std::abs(val - (i == j ? 1.0 : 0.0)));
    }
  }
  if (dscale > 0.0) r.kirchhoff /= dscale;
  return r;
}

WeylSamples sample_weyl(const TreeGraph& g, std::vector<cplx> rho, int threads) {
  WeylSamples out;
  out.leaf_vertices = g.leaf_order;
  out.rho = std::move(rho);
  out.M.resize(out.rho.size());
  const int K = out.K();
  int nthreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::clamp(nthreads, 1, std::max(1, K));
  std::vector<std::future<void>> jobs;
  std::atomic<int> next{0};
  for (int t = 0; t < nthreads; ++t) {
    jobs.push_back(std::async(std::launch::async, [&]() {
      for (int k = next.fetch_add(1); k < K; k = next.fetch_add(1))
        out.M[k] = assemble_weyl(g, out.rho[k]);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

WeylSamples sample_weyl(const TreeGraph& g, const RhoGridSpec& spec, int threads) {
  return sample_weyl(g, rule_rho_grid(spec), threads);
}

void write_weyl_csv(const std::string& path, const WeylSamples& s,
                    const std::vector<std::string>& comments) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  require(f != nullptr, "FileNotFound", "cannot write '" + path + "'");
  for (const auto& c : comments) std::fprintf(f, "# %s\n", c.c_str());
  std::fprintf(f, "k, re_rho, im_rho, i, j, re_M, im_M\n");
  const int m = s.m();
  for (int k = 0; k < s.K(); ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        std::fprintf(f, "%d,%.17g,%.17g,%d,%d,%.17g,%.17g\n", k, s.rho[k].real(),
                     s.rho[k].imag(), i, j, s.M[k](i, j).real(), s.M[k](i, j).imag());
  std::fclose(f);
}

WeylSamples read_weyl_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "FileNotFound", "cannot open weyl file '" + path + "'");
  WeylSamples s;
  std::string line;
  bool header_seen = false;
  int m = 0;
  std::vector<std::tuple<int, int, int, cplx, cplx>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {  // header row
      header_seen = true;
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int k, i, j;
    double rr, ri, mr, mi;
    require(static_cast<bool>(ss >> k >> rr >> ri >> i >> j >> mr >> mi), "BadWeylFile",
            "malformed row: " + line);
    rows.emplace_back(k, i, j, cplx(rr, ri), cplx(mr, mi));
    m = std::max(m, std::max(i, j) + 1);
  }
  require(!rows.empty(), "BadWeylFile", "no samples in '" + path + "'");
  int K = 0;
  for (const auto& r : rows) K = std::max(K, std::get<0>(r) + 1);
  require(static_cast<size_t>(K) * m * m == rows.size(), "BadWeylFile",
          "expected K*m*m rows; file is incomplete");
  s.rho.assign(K, cplx(0, 0));
  s.M.assign(K, Eigen::MatrixXcd::Zero(m, m));
  for (const auto& [k, i, j, rho, mij] : rows) {
    s.rho[k] = rho;
    s.M[k](i, j) = mij;
  }
  return s;
}

}  // namespace treeweyl
