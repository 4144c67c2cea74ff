// Acceptance suite: one [PASS]/[FAIL] line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "tncap/tncap.hpp"

using namespace tncap;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(const char* id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > budget_s) {
    out.pass = false;
    out.detail += " (over time budget " + io::fmt(budget_s) + " s)";
  }
  if (!out.pass) ++failures;
  std::printf("[%s] %s %s: %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", id, title, out.detail.c_str(), secs);
  std::fflush(stdout);
}

// AC1 -----------------------------------------------------------------------

Outcome parameter_counts() {
  std::size_t checked = 0;
  std::ostringstream bad;
  auto expect = [&](const char* what, std::uint64_t got, std::uint64_t want, int p, int d, int r) {
    ++checked;
    if (got != want) bad << what << "(p=" << p << ",d=" << d << ",r=" << r << "): " << got << " != " << want << "; ";
  };
  for (int p = 1; p <= 8; ++p)
    for (int d = 1; d <= 8; ++d)
      for (int r = 1; r <= 8; ++r) {
        const std::uint64_t P = p, D = d, R = r;
        std::uint64_t rp = 1;
        for (int i = 0; i < p; ++i) rp *= R;
        expect("tucker", param_count(build_tucker(p, d, r)), rp + P * D * R, p, d, r);
        if (p >= 2) {
          expect("tt", param_count(build_tt(p, d, r)), 2 * D * R + (P - 2) * D * R * R, p, d, r);
          expect("cp", param_count(build_cp(p, d, r)), P * D * R, p, d, r);
          expect("tr", param_count(build_tr(p, d, r)), P * D * R * R, p, d, r);
        }
      }
  for (int d1 = 1; d1 <= 8; ++d1)
    for (int d2 = 1; d2 <= 8; ++d2)
      for (int r = 1; r <= 8; ++r)
        expect("matrix", param_count(build_matrix(d1, d2, r)), static_cast<std::uint64_t>(r) * (d1 + d2), d1, d2, r);
  const std::string b = bad.str();
  return {b.empty(), std::to_string(checked) + " identities checked" + (b.empty() ? "" : "; mismatches: " + b)};
}

// AC2 -----------------------------------------------------------------------

Outcome matrix_constant() {
  std::size_t checked = 0;
  double worst_ratio = 0;
  std::ostringstream bad;
  for (int d1 = 1; d1 <= 64; ++d1)
    for (int d2 = 1; d2 <= 64; ++d2)
      for (int r = 1; r <= std::min(d1, d2); ++r) {
        const double upper = upper_bound_pdim(build_matrix(d1, d2, r));
        const double cap = 10.0 * r * (d1 + d2);
        worst_ratio = std::max(worst_ratio, upper / (r * (d1 + d2)));
        ++checked;
        if (upper > cap) bad << "upper(" << d1 << "," << d2 << "," << r << ")=" << upper << " > " << cap << "; ";
        if (d1 == d2) {
          const auto rows = lower_bounds(Family::cp, 2, d1, r);
          if (!rows[0].condition_met || upper < *rows[0].value)
            bad << "lower(" << d1 << "," << r << ") not below upper; ";
        }
      }
  const std::string b = bad.str();
  return {b.empty(), std::to_string(checked) + " matrix structures, max upper / r(d1+d2) = " + io::fmt(worst_ratio) +
                         (b.empty() ? "" : "; " + b)};
}

// AC3 -----------------------------------------------------------------------

double table_size(const std::string& name, std::size_t d, std::size_t p, std::size_t r) {
  if (name == "rank_one") return static_cast<double>((d - 1) * p);
  if (name == "tt" || name == "tr") return static_cast<double>(r * r * d);
  if (name == "tt_block" || name == "tr_block") return static_cast<double>(p * (r * r * d - 1)) / 3.0;
  if (name == "tucker") return std::pow(static_cast<double>(r), static_cast<double>(p));
  if (name == "cp") return static_cast<double>(r * d);
  return -1;
}

Outcome shattering() {
  struct Case {
    std::string name;
    std::size_t d, p, r;
  };
  std::vector<Case> cases;
  for (std::size_t d = 2; d <= 3; ++d)
    for (std::size_t p = 1; p <= 4; ++p) cases.push_back({"rank_one", d, p, 1});
  for (std::size_t p : {3, 4, 5}) {
    cases.push_back({"tt", 2, p, 2});
    cases.push_back({"tr", 2, p, 2});
  }
  for (std::size_t p : {3, 6}) {
    cases.push_back({"tt_block", 2, p, 2});
    cases.push_back({"tr_block", 2, p, 2});
  }
  for (std::size_t d = 1; d <= 3; ++d)
    for (std::size_t r = 1; r <= d; ++r)
      for (std::size_t p = 1; p <= 3; ++p)
        if (std::pow(static_cast<double>(r), static_cast<double>(p)) <= 8) cases.push_back({"tucker", d, p, r});
  for (std::size_t p = 2; p <= 3; ++p)
    for (std::size_t r = 1; r <= (p == 2 ? 2u : 4u); ++r)
      if (r * 2 <= 8) cases.push_back({"cp", 2, p, r});

  std::ostringstream bad;
  std::uint64_t patterns = 0;
  std::size_t largest = 0;
  for (const auto& c : cases) {
    const auto cert = build_certificate(c.name, c.d, c.p, c.r);
    const std::size_t n = cert.index_set.size();
    largest = std::max(largest, n);
    if (static_cast<double>(n) != table_size(c.name, c.d, c.p, c.r))
      bad << c.name << "(d=" << c.d << ",p=" << c.p << ",r=" << c.r << ") size " << n << "; ";
    const auto rec = verify_certificate(cert, VerifyMode::exhaustive);
    patterns += rec.patterns_realized;
    if (!rec.enumerated_all || rec.patterns_realized != (1ull << n))
      bad << c.name << "(d=" << c.d << ",p=" << c.p << ",r=" << c.r << ") realized " << rec.patterns_realized << "; ";
  }
  const std::string b = bad.str();
  return {b.empty(), std::to_string(cases.size()) + " certificates, " + std::to_string(patterns) +
                         " sign patterns realized, largest |S| = " + std::to_string(largest) +
                         (b.empty() ? "" : "; " + b)};
}

// AC4 -----------------------------------------------------------------------

Outcome contraction_oracle() {
  std::mt19937_64 rng(20240601);
  std::size_t hyper = 0;
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = oracle::random_structure(rng, trial % 25 == 0);
    for (const auto& e : g.edges()) hyper += e.is_hyperedge() ? 1 : 0;
    CoreAssignment cores;
    std::map<std::string, std::vector<double>> raw;
    for (const auto& v : g.vertices()) {
      raw[v] = oracle::random_values(oracle::core_size(g, v), rng);
      cores.emplace(v, DenseTensor(g.core_shape(v), raw[v]));
    }
    const auto want = oracle::brute_force_contract(g, raw);
    const auto got = contract(g, cores, ContractionOrder::greedy);
    if (got.size() != want.size()) return {false, "trial " + std::to_string(trial) + ": output size mismatch"};
    double scale = 0;
    for (double x : want) scale = std::max(scale, std::fabs(x));
    for (std::size_t i = 0; i < want.size(); ++i) {
      const double err = std::fabs(got[i] - want[i]) / std::max(scale, 1e-300);
      worst = std::max(worst, scale == 0 ? std::fabs(got[i]) : err);
    }
  }
  return {worst <= 1e-8 && hyper > 0, "200 structures (" + std::to_string(hyper) +
                                          " hyperedges), max error relative to largest entry = " + io::fmt(worst)};
}

// AC5 -----------------------------------------------------------------------

Outcome gradient_check() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> pdist(2, 4), ddist(2, 3), rdist(1, 3);
  const double h = 1e-5;
  double worst = 0;
  for (int probe = 0; probe < 100; ++probe) {
    std::vector<std::int64_t> shape(static_cast<std::size_t>(pdist(rng)));
    for (auto& d : shape) d = ddist(rng);
    TensorTrain model = initial_model(shape, rdist(rng), rng());
    for (auto& c : model.cores)
      for (auto& x : c.data()) x *= 3.0;
    const std::size_t size = shape_size(model.output_shape());
    std::vector<std::vector<double>> xs{oracle::random_values(size, rng)};
    std::vector<int> ys{probe % 2 ? 1 : -1};
    LabeledSample s{DenseTensor(model.output_shape(), xs[0]), ys[0]};
    const LabeledSample* ptr = &s;
    const auto lg = loss_and_gradient(model, std::span<const LabeledSample* const>(&ptr, 1));
    oracle::TTCores o;
    o.r.push_back(1);
    for (const auto& c : model.cores) {
      o.d.push_back(c.shape()[1]);
      o.r.push_back(c.shape()[2]);
      o.g.emplace_back(c.data().begin(), c.data().end());
    }
    double num = 0, den = 0;
    for (std::size_t k = 0; k < model.order(); ++k)
      for (std::size_t i = 0; i < model.cores[k].size(); ++i) {
        const double keep = o.g[k][i];
        o.g[k][i] = keep + h;
        const double up = oracle::tt_logistic_loss(o, xs, ys);
        o.g[k][i] = keep - h;
        const double down = oracle::tt_logistic_loss(o, xs, ys);
        o.g[k][i] = keep;
        const double fd = (up - down) / (2 * h);
        num += (fd - lg.gradient.cores[k][i]) * (fd - lg.gradient.cores[k][i]);
        den += fd * fd;
      }
    worst = std::max(worst, std::sqrt(num) / std::max(std::sqrt(den), 1e-300));
  }
  return {worst <= 1e-5, "100 probes, max relative error = " + io::fmt(worst)};
}

// AC6 -----------------------------------------------------------------------

double gen_formula(double params, double vertices, double n, double delta) {
  const double e = std::exp(1.0);
  return 2 * std::sqrt(2 / n * (params * std::log(8 * e * n * vertices / params) + std::log(4 / delta)));
}

Outcome experiment() {
  SweepConfig sweep;
  sweep.base = ExperimentConfig{};  // 4x4x4x4 target of rank 8, lr 1e-2, 20 runs, test size 4000
  sweep.train_sizes = {500, 1000, 2000, 4000};
  sweep.model_ranks = {2, 4};
  const auto res = run_sweep(sweep);

  std::ostringstream detail, bad;
  auto cell = [&](std::size_t n, std::int64_t r) -> const CellSummary& {
    for (const auto& c : res.cells)
      if (c.n == n && c.model_rank == r) return c;
    throw std::runtime_error("missing cell");
  };
  for (std::int64_t r : sweep.model_ranks) {
    detail << "r=" << r << " gaps";
    for (std::size_t i = 0; i < sweep.train_sizes.size(); ++i) {
      detail << " " << io::fmt(std::round(cell(sweep.train_sizes[i], r).mean_gap * 1e4) / 1e4);
      if (i > 0 && !(cell(sweep.train_sizes[i], r).mean_gap < cell(sweep.train_sizes[i - 1], r).mean_gap))
        bad << "(a) r=" << r << " not decreasing at n=" << sweep.train_sizes[i] << "; ";
    }
    detail << "; ";
  }
  for (std::size_t n : sweep.train_sizes)
    if (!(cell(n, 2).mean_gap <= cell(n, 4).mean_gap)) bad << "(b) rank 2 above rank 4 at n=" << n << "; ";
  std::size_t above = 0;
  for (const auto& rec : res.records)
    if (!(rec.gap < rec.theoretical_bound)) ++above;
  if (above) bad << "(c) " << above << " runs at or above their bound; ";

  const auto ref = tt_structure(sweep.base.target_shape, sweep.base.target_rank);
  for (double n : {2000.0, 4000.0}) {
    const double got = generalization_bound(ref, n, 0.05);
    const double want = gen_formula(576, 4, n, 0.05);
    detail << "bound(n=" << n << ")=" << io::fmt(got) << " ";
    if (param_count(ref) != 576 || std::fabs(got - want) > 1e-6) bad << "(c) reference bound at n=" << n << "; ";
  }
  const std::string b = bad.str();
  return {b.empty(), detail.str() + (b.empty() ? "" : "| " + b)};
}

// AC7 -----------------------------------------------------------------------

Outcome bound_properties() {
  std::mt19937_64 rng(20240601);
  std::ostringstream detail, bad;
  std::size_t monotone = 0;
  for (int s = 0; s < 10; ++s) {
    const auto g = oracle::random_structure(rng, s == 0);
    const auto N = param_count(g);
    const auto V = g.vertex_count();
    // every integer sample size in [1, 1e6]
    double prev = generalization_bound(N, V, 1, 0.05);
    std::size_t last_bad = 0, first_bad = 0;
    for (std::size_t n = 2; n <= 1000000; ++n) {
      const double cur = generalization_bound(N, V, static_cast<double>(n), 0.05);
      if (!(cur < prev)) {
        if (!first_bad) first_bad = n;
        last_bad = n;
      }
      prev = cur;
    }
    if (!first_bad) {
      ++monotone;
    } else {
      bad << "G" << s << "(N_G=" << N << ",|V|=" << V << ") not decreasing on n in [" << first_bad << "," << last_bad
          << "]; ";
    }
  }
  detail << monotone << "/10 structures strictly decreasing on [1,1e6]";

  bool rejects = true;
  for (double N : {3.0, 10.0, 100.0})
    for (double n : {N, N - 1, 1.0}) {
      try {
        warren_bound({n, 2, N});
        rejects = false;
      } catch (const Error&) {
      }
    }
  if (!rejects) bad << "warren_bound accepted n <= N; ";

  double worst = 0;
  std::mt19937_64 rng2(5);
  for (int s = 0; s < 50; ++s) {
    const auto g = oracle::random_structure(rng2);
    const double N = static_cast<double>(param_count(g));
    if (N <= 2) continue;
    for (double n : {N + 1, 10 * N, 1e6}) {
      const double a = growth_function_bound(g, n).log2_value;
      const double b = warren_bound_log2({n, static_cast<double>(g.vertex_count()), N});
      worst = std::max(worst, std::fabs(a - b) / std::max(std::fabs(b), 1e-300));
    }
  }
  if (worst > 1e-10) bad << "growth vs warren relative log difference " << io::fmt(worst) << "; ";
  detail << ", warren rejects n <= N: " << (rejects ? "yes" : "no") << ", growth/warren max rel log diff "
         << io::fmt(worst);
  const std::string b = bad.str();
  return {b.empty(), detail.str() + (b.empty() ? "" : " | " + b)};
}

}  // namespace

int main() {
  criterion("AC1", "parameter-count identities", 1.0, parameter_counts);
  criterion("AC2", "matrix upper bound within 10 r(d1+d2) and above rd", 1.0, matrix_constant);
  criterion("AC3", "shattering certificates realize every sign pattern", 60.0, shattering);
  criterion("AC4", "greedy contraction equals brute-force sum", 30.0, contraction_oracle);
  criterion("AC5", "gradient equals central finite differences", 10.0, gradient_check);
  criterion("AC6", "synthetic TT experiment trends", 600.0, experiment);
  criterion("AC7", "bound-function properties", 60.0, bound_properties);
  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}
