#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tncap/contract.hpp"
#include "tncap/error.hpp"
#include "tncap/structure.hpp"
#include "tncap/tensor.hpp"

namespace tncap {

/// Tensor train with every core stored as (r_{k-1}, d_k, r_k), r_0 = r_p = 1.
struct TensorTrain {
  std::vector<DenseTensor> cores;

  std::size_t order() const { return cores.size(); }
  std::size_t mode_dim(std::size_t k) const { return cores[k].shape()[1]; }
  std::size_t left_rank(std::size_t k) const { return cores[k].shape()[0]; }
  std::size_t right_rank(std::size_t k) const { return cores[k].shape()[2]; }

  Shape output_shape() const {
    Shape s;
    for (std::size_t k = 0; k < order(); ++k) s.push_back(mode_dim(k));
    return s;
  }
  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& c : cores) n += c.size();
    return n;
  }
};

namespace detail {

struct ChainLayout {
  // Per vertex: axes that bring its core into (left, phys, right) order, and
  // whether the left/right bond exists.
  std::vector<std::vector<std::size_t>> axes;
  std::vector<bool> has_left, has_right;
};

inline ChainLayout chain_layout(const TensorNetworkStructure& g) {
  validate(g);
  const auto& V = g.vertices();
  const std::size_t p = V.size();
  auto fail = [](const std::string& why) -> ChainLayout {
    throw Error(ErrorKind::unsupported_structure, "tt", "structure is not a tensor train: " + why);
  };
  const auto singles = g.singleton_edges();
  if (singles.size() != p) return fail("needs one dangling leg per vertex");
  std::size_t bonds = 0;
  for (const auto& e : g.edges()) {
    if (e.is_hyperedge()) return fail("hyperedge present");
    if (e.endpoints.size() == 2) ++bonds;
  }
  if (p > 0 && bonds != p - 1) return fail("needs exactly p-1 bonds");

  ChainLayout layout;
  for (std::size_t k = 0; k < p; ++k) {
    const auto inc = g.incident_edges(V[k]);
    std::vector<std::size_t> axes;
    std::ptrdiff_t left = -1, phys = -1, right = -1;
    for (std::size_t m = 0; m < inc.size(); ++m) {
      const Edge& e = g.edges()[inc[m]];
      if (e.is_singleton()) {
        if (inc[m] != singles[k]) return fail("dangling legs out of vertex order");
        phys = static_cast<std::ptrdiff_t>(m);
        continue;
      }
      const VertexId& other = e.endpoints[0] == V[k] ? e.endpoints[1] : e.endpoints[0];
      if (k > 0 && other == V[k - 1])
        left = static_cast<std::ptrdiff_t>(m);
      else if (k + 1 < p && other == V[k + 1])
        right = static_cast<std::ptrdiff_t>(m);
      else
        return fail("bond between non-adjacent vertices " + V[k] + ", " + other);
    }
    if (phys < 0 || (k > 0 && left < 0) || (k + 1 < p && right < 0)) return fail("broken chain at " + V[k]);
    if (left >= 0) axes.push_back(static_cast<std::size_t>(left));
    axes.push_back(static_cast<std::size_t>(phys));
    if (right >= 0) axes.push_back(static_cast<std::size_t>(right));
    layout.axes.push_back(std::move(axes));
    layout.has_left.push_back(left >= 0);
    layout.has_right.push_back(right >= 0);
  }
  return layout;
}

}  // namespace detail

/// Reads a CoreAssignment over a TT-shaped structure (a chain in vertex
/// declaration order, one dangling leg per vertex) into canonical form.
inline TensorTrain to_tensor_train(const TensorNetworkStructure& g, const CoreAssignment& cores) {
  const auto layout = detail::chain_layout(g);
  check_cores(g, cores);
  TensorTrain tt;
  for (std::size_t k = 0; k < g.vertex_count(); ++k) {
    DenseTensor c = permute(cores.at(g.vertices()[k]), layout.axes[k]);
    Shape s = c.shape();
    if (!layout.has_left[k]) s.insert(s.begin(), 1);
    if (!layout.has_right[k]) s.push_back(1);
    std::vector<double> data(c.data().begin(), c.data().end());
    tt.cores.emplace_back(std::move(s), std::move(data));
  }
  return tt;
}

/// Inverse of to_tensor_train for the same structure.
inline CoreAssignment to_core_assignment(const TensorNetworkStructure& g, const TensorTrain& tt) {
  const auto layout = detail::chain_layout(g);
  CoreAssignment out;
  for (std::size_t k = 0; k < g.vertex_count(); ++k) {
    const DenseTensor& c = tt.cores.at(k);
    Shape s;
    if (layout.has_left[k]) s.push_back(c.shape()[0]);
    s.push_back(c.shape()[1]);
    if (layout.has_right[k]) s.push_back(c.shape()[2]);
    DenseTensor canonical(s, std::vector<double>(c.data().begin(), c.data().end()));
    // permute back: canonical mode j sits at original position axes[j]
    const auto& axes = layout.axes[k];
    std::vector<std::size_t> inverse(axes.size());
    for (std::size_t j = 0; j < axes.size(); ++j) inverse[axes[j]] = j;
    out.emplace(g.vertices()[k], permute(canonical, inverse));
  }
  check_cores(g, out);
  return out;
}

/// Left-to-right sweep: workspace[k] holds x contracted with cores 0..k-1,
/// laid out as (r_{k-1}, d_k, ..., d_p). workspace[p] is the scalar <W, x>.
inline void tt_left_sweep(const TensorTrain& tt, std::span<const double> x, std::vector<std::vector<double>>& workspace) {
  const std::size_t p = tt.order();
  workspace.resize(p + 1);
  workspace[0].assign(x.begin(), x.end());
  std::size_t rest = x.size();
  for (std::size_t k = 0; k < p; ++k) {
    const std::size_t ra = tt.left_rank(k), d = tt.mode_dim(k), rb = tt.right_rank(k);
    rest /= d;
    const auto g = tt.cores[k].data();
    const std::vector<double>& z = workspace[k];
    std::vector<double>& next = workspace[k + 1];
    next.assign(rb * rest, 0.0);
    for (std::size_t a = 0; a < ra; ++a)
      for (std::size_t i = 0; i < d; ++i) {
        const double* zrow = &z[(a * d + i) * rest];
        for (std::size_t b = 0; b < rb; ++b) {
          const double w = g[(a * d + i) * rb + b];
          double* out = &next[b * rest];
          for (std::size_t t = 0; t < rest; ++t) out[t] += w * zrow[t];
        }
      }
  }
}

inline double tt_inner_product(const TensorTrain& tt, std::span<const double> x) {
  if (x.size() != shape_size(tt.output_shape()))
    throw Error(ErrorKind::shape_mismatch, shape_string(tt.output_shape()),
                "input has " + std::to_string(x.size()) + " entries");
  std::vector<std::vector<double>> ws;
  tt_left_sweep(tt, x, ws);
  return ws.back()[0];
}

/// <W, x> for W = TN(tt, cores), without materializing W.
inline double tt_inner_product(const TensorNetworkStructure& g, const CoreAssignment& cores, const DenseTensor& x) {
  TensorTrain tt = to_tensor_train(g, cores);
  if (x.shape() != tt.output_shape())
    throw Error(ErrorKind::shape_mismatch, shape_string(x.shape()) + " vs " + shape_string(tt.output_shape()),
                "input shape differs from the TT output shape");
  return tt_inner_product(tt, x.data());
}

}  // namespace tncap
