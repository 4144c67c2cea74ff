#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tncap/error.hpp"
#include "tncap/structure.hpp"
#include "tncap/tensor.hpp"

namespace tncap {

/// Core tensor per vertex: {T^v}. The modes of each core follow the
/// declaration order of the vertex's incident edges.
using CoreAssignment = std::map<VertexId, DenseTensor>;

inline void check_cores(const TensorNetworkStructure& g, const CoreAssignment& cores) {
  for (const auto& [id, core] : cores)
    if (!g.vertex_index(id)) throw Error(ErrorKind::shape_mismatch, id, "core given for a vertex not in the structure");
  for (const auto& v : g.vertices()) {
    auto it = cores.find(v);
    if (it == cores.end()) throw Error(ErrorKind::shape_mismatch, v, "missing core");
    const Shape want = g.core_shape(v);
    const Shape& got = it->second.shape();
    if (got.size() != want.size())
      throw Error(ErrorKind::shape_mismatch, v,
                  "core has order " + std::to_string(got.size()) + ", expected " + std::to_string(want.size()));
    for (std::size_t k = 0; k < want.size(); ++k)
      if (got[k] != want[k])
        throw Error(ErrorKind::shape_mismatch, v + " mode " + std::to_string(k),
                    "dim " + std::to_string(got[k]) + ", expected " + std::to_string(want[k]));
  }
}

enum class ContractionOrder {
  greedy,       ///< pairwise, always merging the pair with the smallest result
  declaration,  ///< pairwise, folding vertices in declaration order
  exhaustive,   ///< one sum over every edge index at once
};

namespace detail {

/// A partial contraction result whose modes are labeled by edge indices.
struct LabeledTensor {
  DenseTensor tensor;
  std::vector<std::size_t> labels;
};

struct ContractionState {
  const TensorNetworkStructure* g;
  std::vector<LabeledTensor> pending;

  std::size_t dim(std::size_t edge) const { return static_cast<std::size_t>(g->edges()[edge].dim); }

  // An edge is summed once no tensor outside {a, b} still carries it.
  bool summable(std::size_t edge, std::size_t a, std::size_t b) const {
    if (g->edges()[edge].is_singleton()) return false;
    for (std::size_t t = 0; t < pending.size(); ++t) {
      if (t == a || t == b) continue;
      const auto& l = pending[t].labels;
      if (std::find(l.begin(), l.end(), edge) != l.end()) return false;
    }
    return true;
  }

  void plan(std::size_t a, std::size_t b, std::vector<std::size_t>& kept, std::vector<std::size_t>& summed) const {
    kept.clear();
    summed.clear();
    const auto& la = pending[a].labels;
    const auto& lb = pending[b].labels;
    auto in = [](const std::vector<std::size_t>& l, std::size_t e) { return std::find(l.begin(), l.end(), e) != l.end(); };
    for (auto e : la) {
      if (in(lb, e) && summable(e, a, b))
        summed.push_back(e);
      else
        kept.push_back(e);
    }
    for (auto e : lb)
      if (!in(la, e)) kept.push_back(e);
  }

  double result_size(std::size_t a, std::size_t b) const {
    std::vector<std::size_t> kept, summed;
    plan(a, b, kept, summed);
    double size = 1.0;
    for (auto e : kept) size *= static_cast<double>(dim(e));
    return size;
  }

  bool share_label(std::size_t a, std::size_t b) const {
    for (auto e : pending[a].labels)
      for (auto f : pending[b].labels)
        if (e == f) return true;
    return false;
  }

  /// Replaces pending[a] and pending[b] by their contraction.
  void merge(std::size_t a, std::size_t b) {
    std::vector<std::size_t> kept, summed;
    plan(a, b, kept, summed);
    const LabeledTensor& A = pending[a];
    const LabeledTensor& B = pending[b];
    auto stride_in = [](const LabeledTensor& t, std::size_t edge) -> std::size_t {
      auto strides = strides_of(t.tensor.shape());
      for (std::size_t k = 0; k < t.labels.size(); ++k)
        if (t.labels[k] == edge) return strides[k];
      return 0;
    };

    Shape kept_shape, summed_shape;
    std::vector<std::size_t> ka, kb, sa, sb;
    for (auto e : kept) {
      kept_shape.push_back(dim(e));
      ka.push_back(stride_in(A, e));
      kb.push_back(stride_in(B, e));
    }
    for (auto e : summed) {
      summed_shape.push_back(dim(e));
      sa.push_back(stride_in(A, e));
      sb.push_back(stride_in(B, e));
    }

    // Offsets of every summed multi-index, computed once.
    const std::size_t inner = shape_size(summed_shape);
    std::vector<std::size_t> inner_a(inner), inner_b(inner);
    {
      MultiIndex idx(summed_shape.size(), 0);
      for (std::size_t s = 0; s < inner; ++s) {
        std::size_t oa = 0, ob = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
          oa += idx[k] * sa[k];
          ob += idx[k] * sb[k];
        }
        inner_a[s] = oa;
        inner_b[s] = ob;
        next_index(idx, summed_shape);
      }
    }

    DenseTensor out(kept_shape);
    const auto da = A.tensor.data();
    const auto db = B.tensor.data();
    MultiIndex idx(kept_shape.size(), 0);
    std::size_t flat = 0;
    do {
      std::size_t oa = 0, ob = 0;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        oa += idx[k] * ka[k];
        ob += idx[k] * kb[k];
      }
      double acc = 0.0;
      for (std::size_t s = 0; s < inner; ++s) acc += da[oa + inner_a[s]] * db[ob + inner_b[s]];
      out[flat++] = acc;
    } while (next_index(idx, kept_shape));

    LabeledTensor merged{std::move(out), std::move(kept)};
    if (a > b) std::swap(a, b);
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(b));
    pending[a] = std::move(merged);
  }
};

inline std::pair<std::size_t, std::size_t> greedy_pick(const ContractionState& st) {
  std::pair<std::size_t, std::size_t> best{0, 1};
  double best_size = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t a = 0; a < st.pending.size(); ++a)
    for (std::size_t b = a + 1; b < st.pending.size(); ++b) {
      if (!st.share_label(a, b)) continue;
      double size = st.result_size(a, b);
      if (size < best_size) {
        best_size = size;
        best = {a, b};
        found = true;
      }
    }
  if (found) return best;
  // Disconnected components: outer product of the two smallest tensors.
  std::vector<std::size_t> order(st.pending.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto x, auto y) { return st.pending[x].tensor.size() < st.pending[y].tensor.size(); });
  return {std::min(order[0], order[1]), std::max(order[0], order[1])};
}

inline DenseTensor to_output_order(const TensorNetworkStructure& g, const LabeledTensor& t) {
  const auto singles = g.singleton_edges();
  std::vector<std::size_t> axes;
  for (auto e : singles) {
    auto it = std::find(t.labels.begin(), t.labels.end(), e);
    axes.push_back(static_cast<std::size_t>(it - t.labels.begin()));
  }
  return permute(t.tensor, axes);
}

inline DenseTensor contract_exhaustive(const TensorNetworkStructure& g, const CoreAssignment& cores) {
  const auto& edges = g.edges();
  Shape all;
  for (const auto& e : edges) all.push_back(static_cast<std::size_t>(e.dim));
  std::vector<const DenseTensor*> core_ptr;
  std::vector<std::vector<std::size_t>> incident;
  for (const auto& v : g.vertices()) {
    core_ptr.push_back(&cores.at(v));
    incident.push_back(g.incident_edges(v));
  }
  const auto singles = g.singleton_edges();
  DenseTensor out(g.output_shape());
  MultiIndex idx(all.size(), 0);
  do {
    double prod = 1.0;
    for (std::size_t v = 0; v < core_ptr.size() && prod != 0.0; ++v) {
      std::size_t off = 0;
      const auto& shape = core_ptr[v]->shape();
      for (std::size_t k = 0; k < incident[v].size(); ++k) off = off * shape[k] + idx[incident[v][k]];
      prod *= (*core_ptr[v])[off];
    }
    std::size_t off = 0;
    for (auto e : singles) off = off * all[e] + idx[e];
    out[off] += prod;
  } while (next_index(idx, all));
  return out;
}

}  // namespace detail

/// TN(G, {T^v}): the tensor obtained by summing the product of all core
/// entries over every bond and hyperedge index. The result has the
/// structure's output shape (order 0 when there are no dangling legs).
inline DenseTensor contract(const TensorNetworkStructure& g, const CoreAssignment& cores,
                            ContractionOrder order = ContractionOrder::greedy) {
  validate(g);
  check_cores(g, cores);
  if (order == ContractionOrder::exhaustive) return detail::contract_exhaustive(g, cores);

  detail::ContractionState st{&g, {}};
  for (const auto& v : g.vertices()) st.pending.push_back({cores.at(v), g.incident_edges(v)});
  while (st.pending.size() > 1) {
    auto [a, b] = order == ContractionOrder::greedy ? detail::greedy_pick(st) : std::pair<std::size_t, std::size_t>{0, 1};
    st.merge(a, b);
  }
  return detail::to_output_order(g, st.pending.front());
}

/// Scales every entry of `core` by `alpha`.
inline DenseTensor scaled(DenseTensor core, double alpha) {
  for (auto& x : core.data()) x *= alpha;
  return core;
}

}  // namespace tncap
