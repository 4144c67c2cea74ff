#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tncap/error.hpp"
#include "tncap/structure.hpp"

namespace tncap {

// Log conventions: the pseudo-dimension bound is stated in bits (log2), the
// generalization bound in nats, since its derivation exponentiates e^{-n eps^2 / 8}.
inline constexpr const char* kPdimLogBase = "2";
inline constexpr const char* kGeneralizationLogBase = "e";

struct WarrenInput {
  double n = 0;  ///< number of polynomials
  double v = 0;  ///< maximum degree
  double N = 0;  ///< number of variables
};

/// log2 of (4 e v n / N)^N, for n > N > 2.
inline double warren_bound_log2(const WarrenInput& in) {
  if (!(in.N > 2)) throw Error(ErrorKind::out_of_range, "N", "Warren's bound needs N > 2");
  if (!(in.n > in.N)) throw Error(ErrorKind::out_of_range, "n", "Warren's bound needs n > N");
  if (!(in.v >= 1)) throw Error(ErrorKind::out_of_range, "v", "degree must be at least 1");
  return in.N * std::log2(4.0 * std::numbers::e * in.v * in.n / in.N);
}

/// Upper bound on the number of sign patterns of n degree-v polynomials in N variables.
inline double warren_bound(const WarrenInput& in) { return std::exp2(warren_bound_log2(in)); }

/// 2 N_G log2(12 |V|): bounds the VC-dimension and pseudo-dimension of every
/// hypothesis class (classification, regression, completion) built on `g`.
inline double upper_bound_pdim(const TensorNetworkStructure& g) {
  const double params = static_cast<double>(param_count(g));
  return 2.0 * params * std::log2(12.0 * static_cast<double>(g.vertex_count()));
}

struct GrowthBound {
  double log2_value = 0;
  double value = 0;  ///< +inf once 2^log2_value overflows a double
};

inline GrowthBound growth_function_bound(std::uint64_t params, std::size_t vertices, double n) {
  if (!(n >= 1)) throw Error(ErrorKind::out_of_range, "n", "sample size must be at least 1");
  const double N = static_cast<double>(params);
  GrowthBound b;
  b.log2_value = N * std::log2(4.0 * std::numbers::e * n * static_cast<double>(vertices) / N);
  b.value = std::exp2(b.log2_value);
  return b;
}

/// (4 e n |V| / N_G)^{N_G}, the growth-function bound of the TN classifier class.
inline GrowthBound growth_function_bound(const TensorNetworkStructure& g, double n) {
  return growth_function_bound(param_count(g), g.vertex_count(), n);
}

/// eps = 2 sqrt((2/n) (N_G ln(8 e n |V| / N_G) + ln(4/delta))): with
/// probability 1 - delta, R(h) < R_S(h) + eps for every classifier on the
/// structure. Returns +inf where the radicand is not positive (small n, where
/// the bound is vacuous).
inline double generalization_bound(std::uint64_t params, std::size_t vertices, double n, double delta) {
  if (!(n >= 1)) throw Error(ErrorKind::out_of_range, "n", "sample size must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::out_of_range, "delta", "delta must lie in (0, 1)");
  const double N = static_cast<double>(params);
  const double radicand =
      (2.0 / n) * (N * std::log(8.0 * std::numbers::e * n * static_cast<double>(vertices) / N) + std::log(4.0 / delta));
  if (!(radicand > 0.0)) return std::numeric_limits<double>::infinity();
  return 2.0 * std::sqrt(radicand);
}

inline double generalization_bound(const TensorNetworkStructure& g, double n, double delta) {
  return generalization_bound(param_count(g), g.vertex_count(), n, delta);
}

struct LowerBoundRecord {
  Family family;
  std::string formula_name;
  std::optional<double> value;  ///< empty when the condition fails
  bool condition_met = false;
  std::string condition_text;
};

namespace detail {

/// r <= base^exponent without overflow.
inline bool at_most_power(std::int64_t r, std::int64_t base, std::int64_t exponent) {
  if (exponent < 0) return false;
  long double acc = 1;
  for (std::int64_t i = 0; i < exponent; ++i) {
    acc *= static_cast<long double>(base);
    if (acc >= static_cast<long double>(r)) return true;
  }
  return static_cast<long double>(r) <= acc;
}

inline LowerBoundRecord lower_row(Family f, std::string name, bool met, double value, std::string condition) {
  LowerBoundRecord rec{f, std::move(name), std::nullopt, met, std::move(condition)};
  if (met) rec.value = value;
  return rec;
}

}  // namespace detail

/// Lower bounds on VC/pseudo-dimension for the families that have one. Every
/// applicable row is returned; rows whose condition fails carry no value.
/// Hierarchical Tucker and PEPS have no known lower bound (empty result).
inline std::vector<LowerBoundRecord> lower_bounds(Family family, std::int64_t p, std::int64_t d, std::int64_t r) {
  if (p < 1 || d < 1 || r < 1) throw Error(ErrorKind::out_of_range, "p,d,r", "p, d and r must be at least 1");
  const double P = static_cast<double>(p), D = static_cast<double>(d), R = static_cast<double>(r);
  std::vector<LowerBoundRecord> out;
  switch (family) {
    case Family::rank_one:
      out.push_back(detail::lower_row(family, "(d-1)p", true, (D - 1) * P, "none"));
      break;
    case Family::matrix:
      out.push_back(detail::lower_row(family, "rd", r <= d, R * D, "r <= d"));
      break;
    case Family::cp:
      out.push_back(detail::lower_row(family, "rd", detail::at_most_power(r, d, p - 1), R * D, "r <= d^(p-1)"));
      break;
    case Family::tucker:
      out.push_back(detail::lower_row(family, "r^p", r <= d, std::pow(R, P), "r <= d"));
      break;
    case Family::tt:
    case Family::tr:
      out.push_back(detail::lower_row(family, "r^2 d", p >= 3 && detail::at_most_power(r, d, (p - 1) / 2), R * R * D,
                                      "r <= d^floor((p-1)/2) and p >= 3"));
      out.push_back(detail::lower_row(family, "p(r^2 d - 1)/3", r == d && p % 3 == 0, P * (R * R * D - 1) / 3.0,
                                      "r = d and p divisible by 3"));
      break;
    case Family::hierarchical_tucker:
    case Family::peps_grid:
      break;
  }
  return out;
}

/// Family parameters attached to a report so lower bounds can be evaluated.
struct FamilySpec {
  Family family;
  std::int64_t p = 0;
  std::int64_t d = 0;
  std::int64_t r = 0;
};

struct GrowthRow {
  double n = 0;
  GrowthBound bound;
};

struct GeneralizationRow {
  double n = 0;
  double epsilon = 0;
};

struct BoundReport {
  StructureSummary summary;
  double upper_bound_pdim = 0;
  double delta = 0;
  std::vector<GrowthRow> growth;
  std::vector<GeneralizationRow> generalization;
  std::optional<FamilySpec> family;
  std::vector<LowerBoundRecord> lower;
  bool upper_dominates_lower = true;  ///< upper >= every lower bound whose condition holds
};

inline BoundReport bound_report(const TensorNetworkStructure& g, const std::optional<FamilySpec>& family,
                                const std::vector<double>& n_grid, double delta) {
  BoundReport rep;
  rep.summary = summarize(g);
  rep.upper_bound_pdim = upper_bound_pdim(g);
  rep.delta = delta;
  for (double n : n_grid) {
    rep.growth.push_back({n, growth_function_bound(g, n)});
    rep.generalization.push_back({n, generalization_bound(g, n, delta)});
  }
  rep.family = family;
  if (family) {
    rep.lower = lower_bounds(family->family, family->p, family->d, family->r);
    for (const auto& row : rep.lower)
      if (row.condition_met && *row.value > rep.upper_bound_pdim) rep.upper_dominates_lower = false;
  }
  return rep;
}

}  // namespace tncap
