#pragma once

// Reference implementations used only by the tests. They share no code with
// the library's contraction, TT evaluation, or gradient paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tncap/structure.hpp"
#include "tncap/tensor.hpp"

namespace oracle {

using tncap::DenseTensor;
using tncap::Edge;
using tncap::TensorNetworkStructure;

inline std::size_t row_major(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& dims) {
  std::size_t off = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) off = off * dims[k] + idx[k];
  return off;
}

/// Sum over every joint assignment of edge indices of the product of core
/// entries. Output modes are the singleton edges in declaration order.
inline std::vector<double> brute_force_contract(const TensorNetworkStructure& g,
                                                const std::map<std::string, std::vector<double>>& cores) {
  const auto& edges = g.edges();
  std::vector<std::size_t> edim(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) edim[e] = static_cast<std::size_t>(edges[e].dim);

  std::vector<std::size_t> outputs, out_dims;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edges[e].endpoints.size() == 1) {
      outputs.push_back(e);
      out_dims.push_back(edim[e]);
    }
  std::size_t out_size = 1;
  for (auto d : out_dims) out_size *= d;

  // incident edges of each vertex in declaration order
  std::vector<std::vector<std::size_t>> inc(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    for (std::size_t e = 0; e < edges.size(); ++e)
      for (const auto& end : edges[e].endpoints)
        if (end == g.vertices()[v]) {
          inc[v].push_back(e);
          break;
        }

  std::vector<double> out(out_size, 0.0);
  std::vector<std::size_t> assign(edges.size(), 0);
  while (true) {
    double prod = 1.0;
    for (std::size_t v = 0; v < g.vertex_count() && prod != 0.0; ++v) {
      std::vector<std::size_t> idx, dims;
      for (auto e : inc[v]) {
        idx.push_back(assign[e]);
        dims.push_back(edim[e]);
      }
      prod *= cores.at(g.vertices()[v])[row_major(idx, dims)];
    }
    std::vector<std::size_t> oidx;
    for (auto e : outputs) oidx.push_back(assign[e]);
    out[row_major(oidx, out_dims)] += prod;

    std::size_t k = edges.size();
    while (k > 0) {
      --k;
      if (++assign[k] < edim[k]) break;
      assign[k] = 0;
      if (k == 0) return out;
    }
    if (edges.empty()) return out;
  }
}

/// Number of joint index assignments brute_force_contract visits.
inline double brute_force_cost(const TensorNetworkStructure& g) {
  double c = 1;
  for (const auto& e : g.edges()) c *= static_cast<double>(e.dim);
  return c;
}

/// Explicit TT sum: W[i1..ip] = sum over bonds of G1[i1,a1] G2[a1,i2,a2] ... Gp[a_{p-1},ip].
/// cores[k] is stored as (r_{k-1}, d_k, r_k) row-major with r_0 = r_p = 1.
struct TTCores {
  std::vector<std::size_t> d, r;  // r has p+1 entries
  std::vector<std::vector<double>> g;
};

inline std::vector<double> tt_full(const TTCores& tt) {
  const std::size_t p = tt.d.size();
  std::size_t total = 1;
  for (auto d : tt.d) total *= d;
  std::vector<double> out(total, 0.0);
  std::vector<std::size_t> i(p, 0), a(p + 1, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    // decode flat into i (row-major)
    std::size_t rest = flat;
    for (std::size_t k = p; k-- > 0;) {
      i[k] = rest % tt.d[k];
      rest /= tt.d[k];
    }
    double sum = 0;
    std::function<void(std::size_t, double)> rec = [&](std::size_t k, double acc) {
      if (k == p) {
        sum += acc;
        return;
      }
      for (std::size_t b = 0; b < tt.r[k + 1]; ++b) {
        a[k + 1] = b;
        const double v = tt.g[k][(a[k] * tt.d[k] + i[k]) * tt.r[k + 1] + b];
        rec(k + 1, acc * v);
      }
    };
    a[0] = 0;
    rec(0, 1.0);
    out[flat] = sum;
  }
  return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Mean logistic loss log(1 + exp(-y f)) of a TT over a batch, evaluated densely.
inline double tt_logistic_loss(const TTCores& tt, const std::vector<std::vector<double>>& xs, const std::vector<int>& ys) {
  const auto w = tt_full(tt);
  double s = 0;
  for (std::size_t b = 0; b < xs.size(); ++b) s += std::log1p(std::exp(-ys[b] * dot(w, xs[b])));
  return s / static_cast<double>(xs.size());
}

/// Random structure with at most 6 vertices and edge dims at most 4, output
/// size at most 1e4 and a bounded brute-force cost.
inline TensorNetworkStructure random_structure(std::mt19937_64& rng, bool force_hyperedge = false,
                                               double max_cost = 2.0e5) {
  std::uniform_int_distribution<int> nv_dist(1, 6), dim(1, 4), coin(0, 1), three(0, 2);
  while (true) {
    const int nv = nv_dist(rng);
    std::vector<std::string> vs;
    for (int i = 0; i < nv; ++i) vs.push_back("n" + std::to_string(i));
    std::vector<Edge> edges;
    for (int i = 0; i < nv; ++i) {
      const int outs = three(rng) == 0 ? 0 : 1 + (three(rng) == 0);
      for (int k = 0; k < outs; ++k) edges.push_back({{vs[i]}, dim(rng)});
    }
    // random tree plus extras, sometimes left disconnected
    for (int i = 1; i < nv; ++i)
      if (three(rng) != 0) {
        std::uniform_int_distribution<int> parent(0, i - 1);
        edges.push_back({{vs[parent(rng)], vs[i]}, dim(rng)});
      }
    if (nv >= 2 && coin(rng)) {
      std::uniform_int_distribution<int> pick(0, nv - 1);
      int a = pick(rng), b = pick(rng);
      if (a != b) edges.push_back({{vs[a], vs[b]}, dim(rng)});
    }
    if (nv >= 3 && (force_hyperedge || three(rng) == 0)) {
      std::vector<std::string> ends;
      for (int i = 0; i < nv; ++i)
        if (coin(rng) || ends.size() < 3) ends.push_back(vs[i]);
      if (ends.size() >= 3) edges.push_back({ends, dim(rng)});
    }
    if (force_hyperedge && !std::any_of(edges.begin(), edges.end(), [](const Edge& e) { return e.endpoints.size() > 2; }))
      continue;
    // shuffle declaration order
    std::shuffle(edges.begin(), edges.end(), rng);
    TensorNetworkStructure g(vs, edges);
    bool isolated = false;
    for (const auto& v : vs)
      if (g.incident_edges(v).empty()) isolated = true;
    if (isolated) continue;
    double out = 1;
    for (const auto& e : edges)
      if (e.endpoints.size() == 1) out *= static_cast<double>(e.dim);
    if (out > 1e4 || brute_force_cost(g) > max_cost) continue;
    return g;
  }
}

inline std::vector<double> random_values(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

/// Core sizes of `g`, computed from incident edge dims.
inline std::size_t core_size(const TensorNetworkStructure& g, const std::string& v) {
  std::size_t s = 1;
  for (const auto& e : g.edges())
    for (const auto& end : e.endpoints)
      if (end == v) {
        s *= static_cast<std::size_t>(e.dim);
        break;
      }
  return s;
}

inline bool rel_close(double a, double b, double rel, double abs_floor = 1e-12) {
  return std::fabs(a - b) <= rel * std::max({std::fabs(a), std::fabs(b), abs_floor});
}

}  // namespace oracle
