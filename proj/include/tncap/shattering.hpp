#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "tncap/bounds.hpp"
#include "tncap/contract.hpp"
#include "tncap/error.hpp"
#include "tncap/parallel.hpp"
#include "tncap/structure.hpp"
#include "tncap/tensor.hpp"

namespace tncap {

/// Position of one free parameter: entry `offset` (row-major) of the core at `vertex`.
struct FreeSlot {
  VertexId vertex;
  std::size_t offset = 0;
  bool operator==(const FreeSlot&) const = default;
};

/// A shattered index set together with the core assignment that witnesses it.
///
/// `cores` holds every core. Cores of `free_vertices` are templates: entries
/// referenced by `passthrough` are the free parameters, all other entries are
/// constants of the construction. For every choice of the free parameters,
/// the contracted tensor at index_set[i] equals the parameter at
/// passthrough[i]. Indices are 0-based.
struct ShatteringCertificate {
  std::string construction;
  TensorNetworkStructure structure;
  std::vector<VertexId> free_vertices;
  CoreAssignment cores;
  std::vector<MultiIndex> index_set;
  std::vector<FreeSlot> passthrough;
  double claimed_bound = 0;

  CoreAssignment fixed_cores() const {
    CoreAssignment out;
    for (const auto& [v, c] : cores)
      if (std::find(free_vertices.begin(), free_vertices.end(), v) == free_vertices.end()) out.emplace(v, c);
    return out;
  }
};

namespace detail {

/// Flat offset inside the core of `vertex` for the given per-edge indices.
inline std::size_t core_offset(const TensorNetworkStructure& g, const VertexId& vertex,
                               const std::map<std::size_t, std::size_t>& edge_index) {
  std::size_t off = 0;
  for (auto e : g.incident_edges(vertex)) off = off * static_cast<std::size_t>(g.edges()[e].dim) + edge_index.at(e);
  return off;
}

/// Index of the edge joining exactly {a, b}.
inline std::size_t bond_between(const TensorNetworkStructure& g, const VertexId& a, const VertexId& b) {
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const auto& ends = g.edges()[e].endpoints;
    if (ends.size() == 2 && ((ends[0] == a && ends[1] == b) || (ends[0] == b && ends[1] == a))) return e;
  }
  throw Error(ErrorKind::unsupported_structure, a + "-" + b, "no bond between the vertices");
}

inline std::size_t singleton_of(const TensorNetworkStructure& g, const VertexId& v) {
  for (auto e : g.incident_edges(v))
    if (g.edges()[e].is_singleton()) return e;
  throw Error(ErrorKind::unsupported_structure, v, "vertex has no dangling leg");
}

inline std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out *= base;
  return out;
}

inline CoreAssignment zero_cores(const TensorNetworkStructure& g) {
  CoreAssignment cores;
  for (const auto& v : g.vertices()) cores.emplace(v, DenseTensor(g.core_shape(v)));
  return cores;
}

inline void condition(bool ok, const std::string& what, const std::string& construction) {
  if (!ok) throw Error(ErrorKind::condition_violated, what, construction + " requires " + what);
}

/// Chain TT/TR cores (left bond, phys, right bond) for vertex k. For a TT the
/// boundary cores lack one bond; `ring` closes the chain.
struct ChainEdges {
  std::vector<std::optional<std::size_t>> left, right;
  std::vector<std::size_t> phys;
};

inline ChainEdges chain_edges(const TensorNetworkStructure& g, bool ring) {
  const auto& V = g.vertices();
  const std::size_t p = V.size();
  ChainEdges c;
  for (std::size_t k = 0; k < p; ++k) {
    c.phys.push_back(singleton_of(g, V[k]));
    if (k > 0)
      c.left.push_back(bond_between(g, V[k - 1], V[k]));
    else
      c.left.push_back(ring ? std::optional<std::size_t>(bond_between(g, V[p - 1], V[0])) : std::nullopt);
    if (k + 1 < p)
      c.right.push_back(bond_between(g, V[k], V[k + 1]));
    else
      c.right.push_back(ring ? std::optional<std::size_t>(bond_between(g, V[p - 1], V[0])) : std::nullopt);
  }
  return c;
}

/// Sets core k of a chain to the 0/1 tensor with entry (a, j, b) = rule(a, j, b).
/// Missing boundary bonds are passed as index 0.
template <typename Rule>
void fill_chain_core(const TensorNetworkStructure& g, const ChainEdges& ch, CoreAssignment& cores, std::size_t k,
                     std::size_t r, std::size_t d, Rule rule) {
  const VertexId& v = g.vertices()[k];
  DenseTensor& core = cores.at(v);
  const std::size_t ra = ch.left[k] ? r : 1, rb = ch.right[k] ? r : 1;
  for (std::size_t a = 0; a < ra; ++a)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t b = 0; b < rb; ++b) {
        if (!rule(a, j, b)) continue;
        std::map<std::size_t, std::size_t> idx{{ch.phys[k], j}};
        if (ch.left[k]) idx[*ch.left[k]] = a;
        if (ch.right[k]) idx[*ch.right[k]] = b;
        core[core_offset(g, v, idx)] = 1.0;
      }
}

inline ShatteringCertificate funnel_chain(std::size_t d, std::size_t p, std::size_t r, bool ring) {
  const std::string name = ring ? "tr" : "tt";
  condition(p >= 3, "p >= 3", name);
  condition(r >= 1 && d >= 1, "r >= 1 and d >= 1", name);
  condition(at_most_power(static_cast<std::int64_t>(r), static_cast<std::int64_t>(d),
                          static_cast<std::int64_t>((p - 1) / 2)),
            "r <= d^floor((p-1)/2)", name);

  ShatteringCertificate cert;
  cert.construction = name;
  cert.structure = ring ? build_tr(p, static_cast<std::int64_t>(d), static_cast<std::int64_t>(r))
                        : build_tt(p, static_cast<std::int64_t>(d), static_cast<std::int64_t>(r));
  const auto& g = cert.structure;
  const auto ch = chain_edges(g, ring);
  cert.cores = zero_cores(g);
  const std::size_t m = (p + 1) / 2 - 1;  // free core, 0-based position of ceil(p/2)
  cert.free_vertices = {g.vertices()[m]};

  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t step = ipow(d, k);
    if (k == 0) {
      if (ring)
        fill_chain_core(g, ch, cert.cores, k, r, d, [&](auto a, auto j, auto b) { return a == 0 && b == j; });
      else
        fill_chain_core(g, ch, cert.cores, k, r, d, [&](auto, auto j, auto b) { return b == j; });
    } else {
      fill_chain_core(g, ch, cert.cores, k, r, d, [&](auto a, auto j, auto b) { return b == j * step + a; });
    }
  }
  for (std::size_t k = m + 1; k < p; ++k) {
    const std::size_t step = ipow(d, p - 1 - k);
    if (k == p - 1) {
      if (ring)
        fill_chain_core(g, ch, cert.cores, k, r, d, [&](auto a, auto j, auto b) { return a == j && b == 0; });
      else
        fill_chain_core(g, ch, cert.cores, k, r, d, [&](auto a, auto j, auto) { return a == j; });
    } else {
      fill_chain_core(g, ch, cert.cores, k, r, d, [&](auto a, auto j, auto b) { return a == j * step + b; });
    }
  }

  // S: indices whose funneled left and right multi-indices both stay below r.
  const Shape shape(p, d);
  MultiIndex idx(p, 0);
  do {
    std::size_t left = 0, right = 0;
    for (std::size_t t = 0; t < m; ++t) left += idx[t] * ipow(d, t);
    for (std::size_t t = m + 1; t < p; ++t) right += idx[t] * ipow(d, p - 1 - t);
    if (left >= r || right >= r) continue;
    std::map<std::size_t, std::size_t> at{{*ch.left[m], left}, {ch.phys[m], idx[m]}, {*ch.right[m], right}};
    cert.index_set.push_back(idx);
    cert.passthrough.push_back({g.vertices()[m], core_offset(g, g.vertices()[m], at)});
  } while (next_index(idx, shape));
  cert.claimed_bound = static_cast<double>(r * r * d);
  return cert;
}

inline ShatteringCertificate block_chain(std::size_t d, std::size_t p, bool ring) {
  const std::string name = ring ? "tr_block" : "tt_block";
  condition(p >= 3 && p % 3 == 0, "p = 3k", name);
  condition(d >= 2, "d >= 2", name);
  const std::size_t k_blocks = p / 3, r = d;

  ShatteringCertificate cert;
  cert.construction = name;
  cert.structure = ring ? build_tr(p, static_cast<std::int64_t>(d), static_cast<std::int64_t>(r))
                        : build_tt(p, static_cast<std::int64_t>(d), static_cast<std::int64_t>(r));
  const auto& g = cert.structure;
  const auto ch = chain_edges(g, ring);
  cert.cores = zero_cores(g);

  for (std::size_t k = 0; k < p; ++k) {
    if (k % 3 == 1) {
      cert.free_vertices.push_back(g.vertices()[k]);
      continue;
    }
    if (k == 0) {
      if (ring)
        fill_chain_core(g, ch, cert.cores, k, r, d, [](auto a, auto j, auto b) { return a == 0 && b == j; });
      else
        fill_chain_core(g, ch, cert.cores, k, r, d, [](auto, auto j, auto b) { return b == j; });
    } else if (k == p - 1) {
      if (ring)
        fill_chain_core(g, ch, cert.cores, k, r, d, [](auto a, auto j, auto b) { return a == j && b == 0; });
      else
        fill_chain_core(g, ch, cert.cores, k, r, d, [](auto a, auto j, auto) { return a == j; });
    } else if (k % 3 == 2) {
      fill_chain_core(g, ch, cert.cores, k, r, d, [](auto a, auto j, auto b) { return a == j && b == 0; });
    } else {
      fill_chain_core(g, ch, cert.cores, k, r, d, [](auto a, auto j, auto b) { return a == 0 && b == j; });
    }
  }

  // T is the outer product of the free d x d x d cores. Each free core keeps
  // its last entry at 1 and the remaining d^3 - 1 entries free, as in the
  // rank-one construction over modes of size d^3.
  const std::size_t block = d * d * d;
  auto core_entry = [&](std::size_t s, std::size_t a, std::size_t j, std::size_t b) {
    const std::size_t k = 3 * s + 1;
    std::map<std::size_t, std::size_t> at{{*ch.left[k], a}, {ch.phys[k], j}, {*ch.right[k], b}};
    return core_offset(g, g.vertices()[k], at);
  };
  for (std::size_t s = 0; s < k_blocks; ++s)
    cert.cores.at(g.vertices()[3 * s + 1])[core_entry(s, d - 1, d - 1, d - 1)] = 1.0;
  for (std::size_t s = 0; s < k_blocks; ++s)
    for (std::size_t q = 0; q + 1 < block; ++q) {
      MultiIndex idx(p, d - 1);
      idx[3 * s] = q / (d * d);
      idx[3 * s + 1] = (q / d) % d;
      idx[3 * s + 2] = q % d;
      cert.index_set.push_back(idx);
      cert.passthrough.push_back({g.vertices()[3 * s + 1], core_entry(s, idx[3 * s], idx[3 * s + 1], idx[3 * s + 2])});
    }
  cert.claimed_bound = static_cast<double>(p) * static_cast<double>(r * r * d - 1) / 3.0;
  return cert;
}

}  // namespace detail

/// Rank-one tensors (v_1; 1) (x) ... (x) (v_p; 1) shatter the (d-1)p indices
/// that differ from (d, ..., d) in exactly one mode.
inline ShatteringCertificate rank_one_construction(std::size_t d, std::size_t p) {
  if (d < 2) throw Error(ErrorKind::out_of_range, "d", "rank-one construction needs d >= 2");
  if (p < 1) throw Error(ErrorKind::out_of_range, "p", "rank-one construction needs p >= 1");
  ShatteringCertificate cert;
  cert.construction = "rank_one";
  cert.structure = build_rank_one(p, static_cast<std::int64_t>(d));
  cert.cores = detail::zero_cores(cert.structure);
  cert.free_vertices = cert.structure.vertices();
  for (const auto& v : cert.free_vertices) cert.cores.at(v)[d - 1] = 1.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j + 1 < d; ++j) {
      MultiIndex idx(p, d - 1);
      idx[i] = j;
      cert.index_set.push_back(idx);
      cert.passthrough.push_back({cert.free_vertices[i], j});
    }
  cert.claimed_bound = static_cast<double>((d - 1) * p);
  return cert;
}

/// TT of rank r with a free middle core; the other cores route every index
/// of S to a distinct entry of the free core. |S| = r^2 d.
inline ShatteringCertificate tt_construction(std::size_t d, std::size_t p, std::size_t r) {
  return detail::funnel_chain(d, p, r, false);
}

inline ShatteringCertificate tr_construction(std::size_t d, std::size_t p, std::size_t r) {
  return detail::funnel_chain(d, p, r, true);
}

/// r = d, p = 3k: T is the outer product of k free third-order cores, giving
/// k(d^3 - 1) shattered indices.
inline ShatteringCertificate tt_block_construction(std::size_t d, std::size_t p) {
  return detail::block_chain(d, p, false);
}

inline ShatteringCertificate tr_block_construction(std::size_t d, std::size_t p) {
  return detail::block_chain(d, p, true);
}

/// Tucker with factors P = [I_r; 0] on every mode and a free core: T agrees
/// with the core on [r]^p.
inline ShatteringCertificate tucker_construction(std::size_t d, std::size_t p, std::size_t r) {
  detail::condition(r >= 1 && r <= d, "r <= d", "tucker");
  detail::condition(p >= 1, "p >= 1", "tucker");
  ShatteringCertificate cert;
  cert.construction = "tucker";
  cert.structure = build_tucker(p, static_cast<std::int64_t>(d), static_cast<std::int64_t>(r));
  const auto& g = cert.structure;
  cert.cores = detail::zero_cores(g);
  cert.free_vertices = {"c"};
  for (std::size_t i = 0; i < p; ++i) {
    const VertexId& v = g.vertices()[i];
    const std::size_t phys = detail::singleton_of(g, v), bond = detail::bond_between(g, v, "c");
    for (std::size_t a = 0; a < r; ++a) cert.cores.at(v)[detail::core_offset(g, v, {{phys, a}, {bond, a}})] = 1.0;
  }
  std::vector<std::size_t> core_edges;
  for (std::size_t i = 0; i < p; ++i) core_edges.push_back(detail::bond_between(g, g.vertices()[i], "c"));
  const Shape sub(p, r);
  MultiIndex idx(p, 0);
  do {
    std::map<std::size_t, std::size_t> at;
    for (std::size_t i = 0; i < p; ++i) at[core_edges[i]] = idx[i];
    cert.index_set.push_back(idx);
    cert.passthrough.push_back({"c", detail::core_offset(g, "c", at)});
  } while (next_index(idx, sub));
  cert.claimed_bound = static_cast<double>(detail::ipow(r, p));
  return cert;
}

/// CP of rank r: a free d x r factor on mode 1, Kronecker-delta factors on
/// the other modes, so T(i_1, ..., i_p) = A(i_1, [[i_2, ..., i_p]]) whenever
/// the multi-index is below r. |S| = r d.
inline ShatteringCertificate cp_construction(std::size_t d, std::size_t p, std::size_t r) {
  detail::condition(p >= 2, "p >= 2", "cp");
  detail::condition(r >= 1 && detail::at_most_power(static_cast<std::int64_t>(r), static_cast<std::int64_t>(d),
                                                    static_cast<std::int64_t>(p - 1)),
                    "r <= d^(p-1)", "cp");
  ShatteringCertificate cert;
  cert.construction = "cp";
  cert.structure = build_cp(p, static_cast<std::int64_t>(d), static_cast<std::int64_t>(r));
  const auto& g = cert.structure;
  cert.cores = detail::zero_cores(g);
  const std::size_t hyper = g.edges().size() - 1;
  cert.free_vertices = {g.vertices()[0]};
  for (std::size_t s = 1; s < p; ++s) {
    const VertexId& v = g.vertices()[s];
    const std::size_t phys = detail::singleton_of(g, v);
    for (std::size_t c = 0; c < r; ++c) {
      const std::size_t digit = (c / detail::ipow(d, s - 1)) % d;
      cert.cores.at(v)[detail::core_offset(g, v, {{phys, digit}, {hyper, c}})] = 1.0;
    }
  }
  const VertexId& free = g.vertices()[0];
  const std::size_t free_phys = detail::singleton_of(g, free);
  const Shape shape(p, d);
  MultiIndex idx(p, 0);
  do {
    std::size_t c = 0;
    for (std::size_t s = 1; s < p; ++s) c += idx[s] * detail::ipow(d, s - 1);
    if (c >= r) continue;
    cert.index_set.push_back(idx);
    cert.passthrough.push_back({free, detail::core_offset(g, free, {{free_phys, idx[0]}, {hyper, c}})});
  } while (next_index(idx, shape));
  cert.claimed_bound = static_cast<double>(r * d);
  return cert;
}

/// Builds a certificate by construction name (rank_one, tt, tt_block, tr,
/// tr_block, tucker, cp). Block constructions take r = d.
inline ShatteringCertificate build_certificate(const std::string& name, std::size_t d, std::size_t p, std::size_t r) {
  if (name == "rank_one") return rank_one_construction(d, p);
  if (name == "tt") return tt_construction(d, p, r);
  if (name == "tr") return tr_construction(d, p, r);
  if (name == "tt_block" || name == "tr_block") {
    detail::condition(r == d, "r = d", name);
    return name == "tt_block" ? tt_block_construction(d, p) : tr_block_construction(d, p);
  }
  if (name == "tucker") return tucker_construction(d, p, r);
  if (name == "cp") return cp_construction(d, p, r);
  throw Error(ErrorKind::unknown_family, name, "unknown construction");
}

// ---------------------------------------------------------------------------
// Verification

enum class VerifyMode { passthrough, exhaustive };

inline constexpr std::size_t kExhaustiveCap = 24;

struct VerifyOptions {
  std::size_t probes = 32;           ///< random free cores in the passthrough check
  std::size_t spot_checks = 10000;   ///< random sign vectors when |S| exceeds the cap
  std::uint64_t seed = 0x5eed;
  std::size_t workers = 0;           ///< 0: worker_count()
};

struct VerificationRecord {
  VerifyMode mode = VerifyMode::passthrough;
  std::size_t index_set_size = 0;
  double claimed_bound = 0;
  std::size_t passthrough_probes = 0;
  bool enumerated_all = false;        ///< every sign vector tried (vs. spot checks)
  std::uint64_t patterns_checked = 0;
  std::uint64_t patterns_realized = 0;
  double elapsed_seconds = 0;
};

namespace detail {

inline void write_signs(const ShatteringCertificate& cert, CoreAssignment& cores, std::uint64_t mask) {
  for (std::size_t i = 0; i < cert.passthrough.size(); ++i)
    cores.at(cert.passthrough[i].vertex)[cert.passthrough[i].offset] = (mask >> i) & 1u ? 1.0 : -1.0;
}

inline std::string mask_string(std::uint64_t mask, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (mask >> i) & 1u ? '+' : '-';
  return s;
}

inline std::string index_string(const MultiIndex& idx) {
  std::string s = "(";
  for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + std::to_string(idx[i]);
  return s + ")";
}

/// True when every index of S carries the sign encoded in `mask`.
inline bool realizes(const ShatteringCertificate& cert, const DenseTensor& t, std::uint64_t mask,
                     std::size_t* failed_at = nullptr) {
  for (std::size_t i = 0; i < cert.index_set.size(); ++i) {
    const double want = (mask >> i) & 1u ? 1.0 : -1.0;
    if (!(t(cert.index_set[i]) * want > 0.0)) {
      if (failed_at) *failed_at = i;
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Checks the passthrough invariant on random free parameters and, in
/// exhaustive mode, that every sign vector on S is realized by writing the
/// signs through the passthrough map and contracting.
inline VerificationRecord verify_certificate(const ShatteringCertificate& cert, VerifyMode mode,
                                             const VerifyOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = cert.index_set.size();
  if (cert.passthrough.size() != n)
    throw Error(ErrorKind::verification_failed, "passthrough", "passthrough table and index set differ in length");
  check_cores(cert.structure, cert.cores);
  const Shape out_shape = cert.structure.output_shape();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& slot = cert.passthrough[i];
    if (std::find(cert.free_vertices.begin(), cert.free_vertices.end(), slot.vertex) == cert.free_vertices.end() ||
        slot.offset >= cert.cores.at(slot.vertex).size())
      throw Error(ErrorKind::verification_failed, "passthrough[" + std::to_string(i) + "]", "slot outside the free cores");
    if (cert.index_set[i].size() != out_shape.size())
      throw Error(ErrorKind::verification_failed, "index_set[" + std::to_string(i) + "]", "index order mismatch");
  }

  VerificationRecord rec;
  rec.mode = mode;
  rec.index_set_size = n;
  rec.claimed_bound = cert.claimed_bound;

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  CoreAssignment cores = cert.cores;
  for (std::size_t probe = 0; probe < opt.probes; ++probe) {
    for (const auto& slot : cert.passthrough) cores.at(slot.vertex)[slot.offset] = unif(rng);
    const DenseTensor t = contract(cert.structure, cores);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& slot = cert.passthrough[i];
      const double want = cores.at(slot.vertex)[slot.offset];
      const double got = t(cert.index_set[i]);
      if (got != want)
        throw Error(ErrorKind::verification_failed, detail::index_string(cert.index_set[i]),
                    "probe " + std::to_string(probe) + ": tensor entry " + std::to_string(got) +
                        " differs from free parameter " + std::to_string(want));
    }
  }
  rec.passthrough_probes = opt.probes;

  if (mode == VerifyMode::exhaustive) {
    std::vector<std::uint64_t> masks;
    if (n <= kExhaustiveCap) {
      rec.enumerated_all = true;
    } else {
      std::uniform_int_distribution<std::uint64_t> bits;
      masks.resize(opt.spot_checks);
      for (auto& m : masks) m = bits(rng) & ((n >= 64) ? ~0ull : ((1ull << n) - 1));
    }
    const std::uint64_t total = rec.enumerated_all ? (1ull << n) : masks.size();
    const std::size_t workers = opt.workers ? opt.workers : worker_count();
    const std::size_t chunks = std::min<std::uint64_t>(std::max<std::size_t>(workers, 1) * 4, std::max<std::uint64_t>(total, 1));
    std::vector<std::uint64_t> realized(chunks, 0);
    std::vector<std::uint64_t> first_fail(chunks, ~0ull);
    std::vector<std::size_t> fail_index(chunks, 0);
    parallel_for(chunks, workers, [&](std::size_t c) {
      CoreAssignment local = cert.cores;
      const std::uint64_t lo = total * c / chunks, hi = total * (c + 1) / chunks;
      for (std::uint64_t i = lo; i < hi; ++i) {
        const std::uint64_t mask = rec.enumerated_all ? i : masks[i];
        detail::write_signs(cert, local, mask);
        std::size_t at = 0;
        if (detail::realizes(cert, contract(cert.structure, local), mask, &at)) {
          ++realized[c];
        } else {
          first_fail[c] = i;
          fail_index[c] = at;
          return;
        }
      }
    });
    for (std::size_t c = 0; c < chunks; ++c)
      if (first_fail[c] != ~0ull) {
        const std::uint64_t mask = rec.enumerated_all ? first_fail[c] : masks[first_fail[c]];
        throw Error(ErrorKind::verification_failed, detail::mask_string(mask, n),
                    "sign vector not realized at index " + detail::index_string(cert.index_set[fail_index[c]]));
      }
    rec.patterns_checked = total;
    for (auto r : realized) rec.patterns_realized += r;
  }
  rec.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// Lower estimate of the growth function on `index_set`: the number of
/// distinct sign patterns (sign(0) = +) seen over `samples` random core
/// assignments with entries uniform in (-1, 1). The sample stream depends
/// only on `seed`, so the count is non-decreasing in `samples`.
inline std::size_t estimate_shattered_count(const TensorNetworkStructure& g, const std::vector<MultiIndex>& index_set,
                                            std::size_t samples, std::uint64_t seed) {
  if (index_set.size() > 20) throw Error(ErrorKind::out_of_range, "index_set", "at most 20 indices");
  validate(g);
  if (index_set.empty()) return 1;
  const Shape shape = g.output_shape();
  std::vector<std::size_t> offsets;
  {
    DenseTensor probe(shape);
    for (const auto& idx : index_set) offsets.push_back(probe.offset(idx));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  CoreAssignment cores = detail::zero_cores(g);
  std::unordered_set<std::uint32_t> seen;
  for (std::size_t s = 0; s < samples; ++s) {
    for (const auto& v : g.vertices())
      for (auto& x : cores.at(v).data()) x = unif(rng);
    const DenseTensor t = contract(g, cores);
    std::uint32_t pattern = 0;
    for (std::size_t i = 0; i < offsets.size(); ++i)
      if (t[offsets[i]] >= 0.0) pattern |= 1u << i;
    seen.insert(pattern);
  }
  return seen.size();
}

}  // namespace tncap
