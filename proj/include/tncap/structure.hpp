#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tncap/error.hpp"

namespace tncap {

using VertexId = std::string;

/// An edge of a tensor network structure. One endpoint makes a dangling leg
/// (an output mode), two a bond, three or more a hyperedge whose single
/// summation index is shared by every incident core.
struct Edge {
  std::vector<VertexId> endpoints;
  std::int64_t dim = 1;

  bool is_singleton() const { return endpoints.size() == 1; }
  bool is_hyperedge() const { return endpoints.size() >= 3; }
  bool operator==(const Edge&) const = default;
};

/// Labeled (hyper)graph G = (V, E, dim). Immutable once built.
///
/// Edge order is significant: the singleton edges, in declaration order, are
/// the output modes, and the modes of the core attached to a vertex follow the
/// declaration order of its incident edges.
class TensorNetworkStructure {
 public:
  TensorNetworkStructure() = default;
  TensorNetworkStructure(std::vector<VertexId> vertices, std::vector<Edge> edges)
      : vertices_(std::move(vertices)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < vertices_.size(); ++i) index_.emplace(vertices_[i], i);
  }

  const std::vector<VertexId>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t vertex_count() const { return vertices_.size(); }

  std::optional<std::size_t> vertex_index(const VertexId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Indices of the edges incident to `vertex`, in declaration order.
  std::vector<std::size_t> incident_edges(const VertexId& vertex) const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& ends = edges_[e].endpoints;
      if (std::find(ends.begin(), ends.end(), vertex) != ends.end()) out.push_back(e);
    }
    return out;
  }

  /// Shape the core of `vertex` must have.
  std::vector<std::size_t> core_shape(const VertexId& vertex) const {
    std::vector<std::size_t> shape;
    for (auto e : incident_edges(vertex)) shape.push_back(static_cast<std::size_t>(edges_[e].dim));
    return shape;
  }

  std::vector<std::size_t> singleton_edges() const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (edges_[e].is_singleton()) out.push_back(e);
    return out;
  }

  std::vector<std::size_t> output_shape() const {
    std::vector<std::size_t> shape;
    for (auto e : singleton_edges()) shape.push_back(static_cast<std::size_t>(edges_[e].dim));
    return shape;
  }

  bool operator==(const TensorNetworkStructure& other) const {
    return vertices_ == other.vertices_ && edges_ == other.edges_;
  }

 private:
  std::vector<VertexId> vertices_;
  std::vector<Edge> edges_;
  std::map<VertexId, std::size_t> index_;
};

struct StructureSummary {
  std::size_t vertex_count = 0;
  std::uint64_t param_count = 0;
  std::vector<std::size_t> output_shape;
  std::size_t dangling_count = 0;
};

/// Throws tncap::Error unless every structural invariant holds.
inline void validate(const TensorNetworkStructure& g) {
  {
    std::set<VertexId> seen;
    for (const auto& v : g.vertices())
      if (!seen.insert(v).second)
        throw Error(ErrorKind::duplicate_endpoint, v, "vertex declared twice");
  }
  std::vector<bool> touched(g.vertex_count(), false);
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const Edge& edge = g.edges()[e];
    const std::string where = "edges[" + std::to_string(e) + "]";
    if (edge.endpoints.empty()) throw Error(ErrorKind::empty_edge, where, "edge has no endpoints");
    if (edge.dim < 1)
      throw Error(ErrorKind::non_positive_dim, where, "dim " + std::to_string(edge.dim) + " < 1");
    std::set<VertexId> ends;
    for (const auto& v : edge.endpoints) {
      auto idx = g.vertex_index(v);
      if (!idx) throw Error(ErrorKind::dangling_reference, v, where + " references an undeclared vertex");
      if (!ends.insert(v).second)
        throw Error(ErrorKind::duplicate_endpoint, v, where + " lists the vertex twice");
      touched[*idx] = true;
    }
  }
  for (std::size_t i = 0; i < g.vertex_count(); ++i)
    if (!touched[i]) throw Error(ErrorKind::isolated_vertex, g.vertices()[i], "vertex has no incident edge");
}

/// N_G: the sum over vertices of the product of incident edge dims.
inline std::uint64_t param_count(const TensorNetworkStructure& g) {
  validate(g);
  std::uint64_t total = 0;
  for (const auto& v : g.vertices()) {
    std::uint64_t size = 1;
    for (auto d : g.core_shape(v)) size *= d;
    total += size;
  }
  return total;
}

inline StructureSummary summarize(const TensorNetworkStructure& g) {
  StructureSummary s;
  s.vertex_count = g.vertex_count();
  s.param_count = param_count(g);
  s.output_shape = g.output_shape();
  s.dangling_count = s.output_shape.size();
  return s;
}

// ---------------------------------------------------------------------------
// Standard families

enum class Family { matrix, rank_one, cp, tucker, tt, tr, hierarchical_tucker, peps_grid };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::matrix: return "matrix";
    case Family::rank_one: return "rank_one";
    case Family::cp: return "cp";
    case Family::tucker: return "tucker";
    case Family::tt: return "tt";
    case Family::tr: return "tr";
    case Family::hierarchical_tucker: return "hierarchical_tucker";
    case Family::peps_grid: return "peps_grid";
  }
  return "unknown";
}

inline Family parse_family(std::string_view name) {
  for (Family f : {Family::matrix, Family::rank_one, Family::cp, Family::tucker, Family::tt, Family::tr,
                   Family::hierarchical_tucker, Family::peps_grid})
    if (to_string(f) == name) return f;
  throw Error(ErrorKind::unknown_family, std::string(name), "unknown structure family");
}

/// Either one uniform rank or one rank per internal edge of the family.
/// `grid_rows` is only read by peps_grid (0 means square grid).
struct RankDescriptor {
  std::vector<std::int64_t> ranks;
  std::size_t grid_rows = 0;

  static RankDescriptor uniform(std::int64_t r) { return {{r}, 0}; }
};

namespace detail {

inline std::string vname(std::string_view prefix, std::size_t i) { return std::string(prefix) + std::to_string(i); }

/// Expands a rank descriptor to `count` per-edge ranks.
inline std::vector<std::int64_t> expand_ranks(const RankDescriptor& rank, std::size_t count, Family family) {
  if (rank.ranks.size() == 1) return std::vector<std::int64_t>(count, rank.ranks.front());
  if (rank.ranks.size() == count && count > 0) return rank.ranks;
  throw Error(ErrorKind::unsupported_rank_shape, std::string(to_string(family)),
              "expected 1 or " + std::to_string(count) + " ranks, got " + std::to_string(rank.ranks.size()));
}

inline void require_modes(Family family, std::size_t p, std::size_t min_modes) {
  if (p < min_modes)
    throw Error(ErrorKind::unsupported_rank_shape, std::string(to_string(family)),
                "needs at least " + std::to_string(min_modes) + " modes, got " + std::to_string(p));
}

inline void ht_split(std::size_t lo, std::size_t hi, const std::string& parent, std::int64_t r,
                     const std::vector<std::int64_t>& dims, std::vector<VertexId>& vertices, std::vector<Edge>& edges,
                     std::size_t& counter) {
  if (hi - lo == 1) {
    VertexId leaf = vname("u", lo + 1);
    vertices.push_back(leaf);
    edges.push_back({{leaf}, dims[lo]});
    if (!parent.empty()) edges.push_back({{leaf, parent}, r});
    return;
  }
  VertexId node = vname("h", ++counter);
  vertices.push_back(node);
  if (!parent.empty()) edges.push_back({{node, parent}, r});
  std::size_t mid = lo + (hi - lo + 1) / 2;
  ht_split(lo, mid, node, r, dims, vertices, edges, counter);
  ht_split(mid, hi, node, r, dims, vertices, edges, counter);
}

}  // namespace detail

/// Two vertices joined by a rank-r bond: d1 x d2 matrices of rank at most r.
inline TensorNetworkStructure build_matrix(std::int64_t d1, std::int64_t d2, std::int64_t r) {
  TensorNetworkStructure g({"v1", "v2"}, {{{"v1"}, d1}, {{"v1", "v2"}, r}, {{"v2"}, d2}});
  validate(g);
  return g;
}

/// Builds the structure of `family` over the mode dims `dims`.
///
/// Core mode conventions: TT cores are (left, phys, right) with the boundary
/// cores dropping the missing bond; CP and Tucker factor cores are
/// (phys, rank); the Tucker core vertex "c" is (r_1, ..., r_p).
inline TensorNetworkStructure build_family(Family family, const std::vector<std::int64_t>& dims,
                                           const RankDescriptor& rank) {
  using detail::vname;
  const std::size_t p = dims.size();
  if (p == 0) throw Error(ErrorKind::unsupported_rank_shape, std::string(to_string(family)), "dims must be non-empty");
  if (rank.ranks.empty() && family != Family::rank_one)
    throw Error(ErrorKind::unsupported_rank_shape, std::string(to_string(family)), "rank descriptor is empty");

  std::vector<VertexId> vertices;
  std::vector<Edge> edges;
  switch (family) {
    case Family::matrix: {
      if (p != 2)
        throw Error(ErrorKind::unsupported_rank_shape, "matrix", "matrix takes exactly two dims");
      auto r = detail::expand_ranks(rank, 1, family);
      return build_matrix(dims[0], dims[1], r[0]);
    }
    case Family::rank_one: {
      for (std::size_t i = 0; i < p; ++i) {
        vertices.push_back(vname("v", i + 1));
        edges.push_back({{vertices.back()}, dims[i]});
      }
      break;
    }
    case Family::cp: {
      detail::require_modes(family, p, 2);
      auto r = detail::expand_ranks(rank, 1, family);
      for (std::size_t i = 0; i < p; ++i) {
        vertices.push_back(vname("v", i + 1));
        edges.push_back({{vertices.back()}, dims[i]});
      }
      edges.push_back({vertices, r[0]});
      break;
    }
    case Family::tucker: {
      auto r = detail::expand_ranks(rank, p, family);
      for (std::size_t i = 0; i < p; ++i) vertices.push_back(vname("v", i + 1));
      vertices.push_back("c");
      for (std::size_t i = 0; i < p; ++i) {
        edges.push_back({{vertices[i]}, dims[i]});
        edges.push_back({{vertices[i], "c"}, r[i]});
      }
      break;
    }
    case Family::tt: {
      detail::require_modes(family, p, 2);
      auto r = detail::expand_ranks(rank, p - 1, family);
      for (std::size_t i = 0; i < p; ++i) vertices.push_back(vname("v", i + 1));
      for (std::size_t i = 0; i < p; ++i) {
        edges.push_back({{vertices[i]}, dims[i]});
        if (i + 1 < p) edges.push_back({{vertices[i], vertices[i + 1]}, r[i]});
      }
      break;
    }
    case Family::tr: {
      detail::require_modes(family, p, 2);
      auto r = detail::expand_ranks(rank, p, family);
      for (std::size_t i = 0; i < p; ++i) vertices.push_back(vname("v", i + 1));
      // The closing bond (v_p, v_1) is declared first so v_1's core is (left, phys, right).
      edges.push_back({{vertices[p - 1], vertices[0]}, r[p - 1]});
      for (std::size_t i = 0; i < p; ++i) {
        edges.push_back({{vertices[i]}, dims[i]});
        if (i + 1 < p) edges.push_back({{vertices[i], vertices[i + 1]}, r[i]});
      }
      break;
    }
    case Family::hierarchical_tucker: {
      auto r = detail::expand_ranks(rank, 1, family);
      std::size_t counter = 0;
      detail::ht_split(0, p, "", r[0], dims, vertices, edges, counter);
      break;
    }
    case Family::peps_grid: {
      auto r = detail::expand_ranks(rank, 1, family);
      std::size_t rows = rank.grid_rows;
      if (rows == 0) {
        rows = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(p))));
        if (rows * rows != p)
          throw Error(ErrorKind::unsupported_rank_shape, "peps_grid",
                      "grid_rows not given and " + std::to_string(p) + " modes is not a square");
      }
      if (p % rows != 0)
        throw Error(ErrorKind::unsupported_rank_shape, "peps_grid",
                    std::to_string(p) + " modes do not fill " + std::to_string(rows) + " rows");
      const std::size_t cols = p / rows;
      auto at = [&](std::size_t i, std::size_t j) { return "g" + std::to_string(i + 1) + "_" + std::to_string(j + 1); };
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) vertices.push_back(at(i, j));
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) edges.push_back({{at(i, j)}, dims[i * cols + j]});
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
          if (j + 1 < cols) edges.push_back({{at(i, j), at(i, j + 1)}, r[0]});
          if (i + 1 < rows) edges.push_back({{at(i, j), at(i + 1, j)}, r[0]});
        }
      break;
    }
  }
  TensorNetworkStructure g(std::move(vertices), std::move(edges));
  validate(g);
  return g;
}

/// Uniform-dim convenience overload: p modes of size d, uniform rank r.
inline TensorNetworkStructure build_family(Family family, std::size_t p, std::int64_t d, std::int64_t r) {
  return build_family(family, std::vector<std::int64_t>(p, d), RankDescriptor::uniform(r));
}

inline TensorNetworkStructure build_tt(std::size_t p, std::int64_t d, std::int64_t r) {
  return build_family(Family::tt, p, d, r);
}
inline TensorNetworkStructure build_tr(std::size_t p, std::int64_t d, std::int64_t r) {
  return build_family(Family::tr, p, d, r);
}
inline TensorNetworkStructure build_cp(std::size_t p, std::int64_t d, std::int64_t r) {
  return build_family(Family::cp, p, d, r);
}
inline TensorNetworkStructure build_tucker(std::size_t p, std::int64_t d, std::int64_t r) {
  return build_family(Family::tucker, p, d, r);
}
inline TensorNetworkStructure build_rank_one(std::size_t p, std::int64_t d) {
  return build_family(Family::rank_one, std::vector<std::int64_t>(p, d), RankDescriptor{});
}

}  // namespace tncap
