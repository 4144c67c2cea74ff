#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "tncap/bounds.hpp"
#include "tncap/contract.hpp"
#include "tncap/error.hpp"
#include "tncap/parallel.hpp"
#include "tncap/structure.hpp"
#include "tncap/tensor.hpp"
#include "tncap/tt.hpp"

namespace tncap {

/// Knobs of the synthetic TT classification experiment.
struct ExperimentConfig {
  std::vector<std::int64_t> target_shape{4, 4, 4, 4};
  std::int64_t target_rank = 8;
  std::int64_t model_rank = 2;
  std::size_t train_size = 1000;
  std::size_t test_size = 4000;
  double learning_rate = 1e-2;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t runs = 20;
  std::uint64_t seed = 1;
  double delta = 0.05;

  void check() const {
    auto bad = [](const std::string& field, const std::string& why) {
      throw Error(ErrorKind::schema_violation, field, why);
    };
    if (target_shape.empty()) bad("target_shape", "must be non-empty");
    for (auto d : target_shape)
      if (d < 1) bad("target_shape", "dims must be positive");
    if (target_rank < 1) bad("target_rank", "must be positive");
    if (model_rank < 1) bad("model_rank", "must be positive");
    if (train_size < 1) bad("train_size", "must be positive");
    if (test_size < 1) bad("test_size", "must be positive");
    if (batch_size < 1) bad("batch_size", "must be positive");
    if (runs < 1) bad("runs", "must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) bad("learning_rate", "must be finite and >= 0");
    if (!(delta > 0.0 && delta < 1.0)) bad("delta", "must lie in (0, 1)");
  }
};

struct LabeledSample {
  DenseTensor x;
  int y = 1;
};

struct ExperimentRecord {
  std::size_t run_id = 0;
  std::size_t n = 0;
  std::int64_t model_rank = 0;
  std::uint64_t seed = 0;
  double train_risk = 0;
  double test_risk = 0;
  double gap = 0;
  double theoretical_bound = 0;
};

/// splitmix64 finalizer, used to derive independent seeds from (seed, tag...).
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t seed, Tags... tags) {
  std::uint64_t s = mix_seed(seed);
  ((s = mix_seed(s ^ static_cast<std::uint64_t>(tags))), ...);
  return s;
}

enum SeedTag : std::uint64_t { kTargetTag = 1, kTrainTag = 2, kTestTag = 3, kInitTag = 4, kSgdTag = 5, kRunTag = 6 };

inline int sign_label(double v) { return v >= 0.0 ? 1 : -1; }

/// TT structure with uniform bond `rank` over `shape`.
inline TensorNetworkStructure tt_structure(const std::vector<std::int64_t>& shape, std::int64_t rank) {
  return build_family(Family::tt, shape, RankDescriptor::uniform(rank));
}

/// Random TT cores with entries i.i.d. uniform(-1, 1).
inline CoreAssignment generate_target(const std::vector<std::int64_t>& shape, std::int64_t rank, std::uint64_t seed) {
  const auto g = tt_structure(shape, rank);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  CoreAssignment cores;
  for (const auto& v : g.vertices()) {
    DenseTensor c(g.core_shape(v));
    for (auto& x : c.data()) x = unif(rng);
    cores.emplace(v, std::move(c));
  }
  return cores;
}

/// `size` inputs with standard normal entries labeled by sign(<W, X>), sign(0) = +1.
inline std::vector<LabeledSample> generate_dataset(const TensorNetworkStructure& g, const CoreAssignment& target,
                                                   std::size_t size, std::uint64_t seed) {
  const TensorTrain w = to_tensor_train(g, target);
  const Shape shape = w.output_shape();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<LabeledSample> data;
  data.reserve(size);
  std::vector<std::vector<double>> ws;
  for (std::size_t i = 0; i < size; ++i) {
    DenseTensor x(shape);
    for (auto& v : x.data()) v = normal(rng);
    tt_left_sweep(w, x.data(), ws);
    data.push_back({std::move(x), sign_label(ws.back()[0])});
  }
  return data;
}

struct LossGradient {
  double loss = 0;
  TensorTrain gradient;
};

namespace detail {

/// log(1 + exp(t)), stable for large |t|.
inline double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

/// 1 / (1 + exp(-t)).
inline double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// right[k] = cores k+1..p-1 contracted along their bonds, laid out as
/// (r_k, d_{k+1} ... d_p); right[p-1] is the 1x1 identity.
inline std::vector<std::vector<double>> right_partials(const TensorTrain& tt) {
  const std::size_t p = tt.order();
  std::vector<std::vector<double>> right(p);
  right[p - 1] = {1.0};
  std::size_t rest = 1;
  for (std::size_t k = p - 1; k-- > 0;) {
    const std::size_t ra = tt.left_rank(k + 1), d = tt.mode_dim(k + 1), rb = tt.right_rank(k + 1);
    const auto g = tt.cores[k + 1].data();
    std::vector<double>& out = right[k];
    out.assign(ra * d * rest, 0.0);
    for (std::size_t a = 0; a < ra; ++a)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t b = 0; b < rb; ++b) {
          const double w = g[(a * d + i) * rb + b];
          const double* src = &right[k + 1][b * rest];
          double* dst = &out[(a * d + i) * rest];
          for (std::size_t t = 0; t < rest; ++t) dst[t] += w * src[t];
        }
    rest *= d;
  }
  return right;
}

inline TensorTrain zeros_like(const TensorTrain& tt) {
  TensorTrain z;
  for (const auto& c : tt.cores) z.cores.emplace_back(c.shape());
  return z;
}

}  // namespace detail

/// Mean logistic loss log(1 + exp(-y <W, X>)) over `batch` and its exact
/// gradient with respect to every core entry.
inline LossGradient loss_and_gradient(const TensorTrain& model, std::span<const LabeledSample* const> batch) {
  LossGradient out{0.0, detail::zeros_like(model)};
  if (batch.empty()) return out;
  const std::size_t p = model.order();
  const std::size_t input_size = shape_size(model.output_shape());
  const auto right = detail::right_partials(model);
  std::vector<std::vector<double>> ws;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const LabeledSample* s : batch) {
    if (s->x.size() != input_size || s->x.shape() != model.output_shape())
      throw Error(ErrorKind::shape_mismatch, shape_string(s->x.shape()), "sample shape differs from the model");
    tt_left_sweep(model, s->x.data(), ws);
    const double y = static_cast<double>(s->y);
    const double margin = y * ws[p][0];
    out.loss += scale * detail::softplus(-margin);
    const double coef = -y * detail::sigmoid(-margin) * scale;
    std::size_t rest = input_size;
    for (std::size_t k = 0; k < p; ++k) {
      const std::size_t ra = model.left_rank(k), d = model.mode_dim(k), rb = model.right_rank(k);
      rest /= d;
      auto grad = out.gradient.cores[k].data();
      const std::vector<double>& z = ws[k];
      const std::vector<double>& rp = right[k];
      for (std::size_t ai = 0; ai < ra * d; ++ai) {
        const double* zrow = &z[ai * rest];
        for (std::size_t b = 0; b < rb; ++b) {
          const double* rrow = &rp[b * rest];
          double acc = 0.0;
          for (std::size_t t = 0; t < rest; ++t) acc += zrow[t] * rrow[t];
          grad[ai * rb + b] += coef * acc;
        }
      }
    }
  }
  return out;
}

/// CoreAssignment flavor over a TT structure; the gradient comes back in the
/// structure's core layout.
inline std::pair<double, CoreAssignment> loss_and_gradient(const TensorNetworkStructure& g, const CoreAssignment& model,
                                                           const std::vector<LabeledSample>& batch) {
  const TensorTrain tt = to_tensor_train(g, model);
  std::vector<const LabeledSample*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  auto lg = loss_and_gradient(tt, ptrs);
  return {lg.loss, to_core_assignment(g, lg.gradient)};
}

/// Fraction of samples whose label differs from sign(<W, X>).
inline double zero_one_risk(const TensorTrain& model, const std::vector<LabeledSample>& data,
                            std::size_t count = static_cast<std::size_t>(-1)) {
  count = std::min(count, data.size());
  if (count == 0) return 0.0;
  std::vector<std::vector<double>> ws;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < count; ++i) {
    tt_left_sweep(model, data[i].x.data(), ws);
    if (sign_label(ws.back()[0]) != data[i].y) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(count);
}

/// Cores i.i.d. uniform(-a, a), with the per-entry variance a^2 / 3 chosen as
/// (prod_k d_k * r^(p-1))^(-1/p) so the initial margin has unit variance.
inline TensorTrain initial_model(const std::vector<std::int64_t>& shape, std::int64_t rank, std::uint64_t seed) {
  const auto g = tt_structure(shape, rank);
  std::mt19937_64 rng(seed);
  const double p = static_cast<double>(shape.size());
  double log_paths = (p - 1.0) * std::log(static_cast<double>(rank));
  for (auto d : shape) log_paths += std::log(static_cast<double>(d));
  const double a = std::sqrt(3.0 * std::exp(-log_paths / p));
  CoreAssignment cores;
  for (std::size_t k = 0; k < g.vertex_count(); ++k) {
    std::uniform_real_distribution<double> unif(-a, a);
    DenseTensor c(g.core_shape(g.vertices()[k]));
    for (auto& x : c.data()) x = unif(rng);
    cores.emplace(g.vertices()[k], std::move(c));
  }
  return to_tensor_train(g, cores);
}

struct TrainOptions {
  double learning_rate = 1e-2;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
};

/// Minibatch SGD on the mean logistic loss over the first `n` samples of
/// `data`. Each epoch visits a fresh permutation drawn from `seed`.
inline TensorTrain train_sgd(TensorTrain model, const std::vector<LabeledSample>& data, std::size_t n,
                             const TrainOptions& opt, std::uint64_t seed) {
  n = std::min(n, data.size());
  if (opt.epochs == 0 || n == 0) return model;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::vector<const LabeledSample*> batch;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += opt.batch_size, ++step) {
      batch.clear();
      for (std::size_t i = start; i < std::min(n, start + opt.batch_size); ++i) batch.push_back(&data[order[i]]);
      const auto lg = loss_and_gradient(model, batch);
      for (std::size_t k = 0; k < model.order(); ++k) {
        auto w = model.cores[k].data();
        const auto gr = lg.gradient.cores[k].data();
        for (std::size_t i = 0; i < w.size(); ++i) {
          w[i] -= opt.learning_rate * gr[i];
          if (!std::isfinite(w[i]))
            throw Error(ErrorKind::diverged, "step " + std::to_string(step),
                        "non-finite parameter in core " + std::to_string(k) + " after SGD step " + std::to_string(step));
        }
      }
    }
  }
  return model;
}

/// Everything one run draws from its seed.
struct RunData {
  TensorNetworkStructure target_structure;
  CoreAssignment target;
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
};

/// Target and datasets of run `run_id`. The training set is a prefix of one
/// stream, so runs with different n share their first samples.
inline RunData draw_run(const ExperimentConfig& cfg, std::size_t run_id, std::size_t max_train) {
  const std::uint64_t run_seed = derive_seed(cfg.seed, kRunTag, run_id);
  RunData rd;
  rd.target_structure = tt_structure(cfg.target_shape, cfg.target_rank);
  rd.target = generate_target(cfg.target_shape, cfg.target_rank, derive_seed(run_seed, kTargetTag));
  rd.train = generate_dataset(rd.target_structure, rd.target, max_train, derive_seed(run_seed, kTrainTag));
  rd.test = generate_dataset(rd.target_structure, rd.target, cfg.test_size, derive_seed(run_seed, kTestTag));
  return rd;
}

/// Trains the model of `cfg` on the first cfg.train_size samples of `rd` and
/// scores it.
inline ExperimentRecord score_run(const ExperimentConfig& cfg, const RunData& rd, std::size_t run_id) {
  const std::uint64_t run_seed = derive_seed(cfg.seed, kRunTag, run_id);
  const std::uint64_t rank = static_cast<std::uint64_t>(cfg.model_rank);
  TensorTrain model = initial_model(cfg.target_shape, cfg.model_rank, derive_seed(run_seed, kInitTag, rank));
  try {
    model = train_sgd(std::move(model), rd.train, cfg.train_size, {cfg.learning_rate, cfg.epochs, cfg.batch_size},
                      derive_seed(run_seed, kSgdTag, cfg.train_size, rank));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::diverged) throw;
    throw Error(ErrorKind::diverged, "run " + std::to_string(run_id) + " seed " + std::to_string(run_seed), e.what());
  }
  ExperimentRecord rec;
  rec.run_id = run_id;
  rec.n = cfg.train_size;
  rec.model_rank = cfg.model_rank;
  rec.seed = run_seed;
  rec.train_risk = zero_one_risk(model, rd.train, cfg.train_size);
  rec.test_risk = zero_one_risk(model, rd.test);
  rec.gap = rec.test_risk - rec.train_risk;
  rec.theoretical_bound =
      generalization_bound(tt_structure(cfg.target_shape, cfg.model_rank), static_cast<double>(cfg.train_size), cfg.delta);
  return rec;
}

/// Trains a model for `cfg` from `seed` (fresh target and training draw) and
/// returns its cores in the TT structure's layout.
inline CoreAssignment train(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.check();
  ExperimentConfig c = cfg;
  c.seed = seed;
  c.test_size = 1;
  const RunData rd = draw_run(c, 0, c.train_size);
  const std::uint64_t run_seed = derive_seed(seed, kRunTag, std::size_t{0});
  const std::uint64_t rank = static_cast<std::uint64_t>(c.model_rank);
  TensorTrain model = initial_model(c.target_shape, c.model_rank, derive_seed(run_seed, kInitTag, rank));
  model = train_sgd(std::move(model), rd.train, c.train_size, {c.learning_rate, c.epochs, c.batch_size},
                    derive_seed(run_seed, kSgdTag, c.train_size, rank));
  return to_core_assignment(tt_structure(c.target_shape, c.model_rank), model);
}

struct CellSummary {
  std::size_t n = 0;
  std::int64_t model_rank = 0;
  std::size_t runs = 0;
  double mean_train_risk = 0;
  double mean_test_risk = 0;
  double mean_gap = 0;
  double std_gap = 0;
  std::size_t positive_gap_runs = 0;
  double mean_log2_gap = 0;  ///< over runs with a positive gap; NaN if none
  double std_log2_gap = 0;
  double theoretical_bound = 0;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

inline CellSummary summarize_cell(const std::vector<ExperimentRecord>& recs) {
  CellSummary c;
  if (recs.empty()) return c;
  c.n = recs.front().n;
  c.model_rank = recs.front().model_rank;
  c.runs = recs.size();
  c.theoretical_bound = recs.front().theoretical_bound;
  std::vector<double> gaps, logs;
  for (const auto& r : recs) {
    c.mean_train_risk += r.train_risk / static_cast<double>(recs.size());
    c.mean_test_risk += r.test_risk / static_cast<double>(recs.size());
    gaps.push_back(r.gap);
    if (r.gap > 0) logs.push_back(std::log2(r.gap));
  }
  std::tie(c.mean_gap, c.std_gap) = detail::mean_std(gaps);
  c.positive_gap_runs = logs.size();
  std::tie(c.mean_log2_gap, c.std_log2_gap) = detail::mean_std(logs);
  return c;
}

struct ExperimentResult {
  std::vector<ExperimentRecord> records;
  CellSummary summary;
};

/// cfg.runs independent runs (fresh target, train/test draw, training) at one
/// (n, rank) cell.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t workers = 0) {
  cfg.check();
  ExperimentResult res;
  res.records.resize(cfg.runs);
  parallel_for(cfg.runs, workers ? workers : worker_count(), [&](std::size_t run) {
    const RunData rd = draw_run(cfg, run, cfg.train_size);
    res.records[run] = score_run(cfg, rd, run);
  });
  res.summary = summarize_cell(res.records);
  return res;
}

/// A grid of cells over train sizes and model ranks. Runs with the same id
/// share target, test set and training stream across cells.
struct SweepConfig {
  ExperimentConfig base;
  std::vector<std::size_t> train_sizes;
  std::vector<std::int64_t> model_ranks;
};

struct SweepResult {
  std::vector<ExperimentRecord> records;  ///< ordered by (n, rank, run)
  std::vector<CellSummary> cells;         ///< ordered by (n, rank)
};

inline SweepResult run_sweep(const SweepConfig& sweep, std::size_t workers = 0) {
  std::vector<std::size_t> sizes = sweep.train_sizes;
  std::vector<std::int64_t> ranks = sweep.model_ranks;
  if (sizes.empty()) sizes = {sweep.base.train_size};
  if (ranks.empty()) ranks = {sweep.base.model_rank};
  for (auto n : sizes) {
    ExperimentConfig c = sweep.base;
    c.train_size = n;
    for (auto r : ranks) {
      c.model_rank = r;
      c.check();
    }
  }
  const std::size_t max_n = *std::max_element(sizes.begin(), sizes.end());
  const std::size_t runs = sweep.base.runs;
  const std::size_t cells = sizes.size() * ranks.size();

  // per_run[run][cell]
  std::vector<std::vector<ExperimentRecord>> per_run(runs, std::vector<ExperimentRecord>(cells));
  parallel_for(runs, workers ? workers : worker_count(), [&](std::size_t run) {
    const RunData rd = draw_run(sweep.base, run, max_n);
    for (std::size_t i = 0; i < sizes.size(); ++i)
      for (std::size_t j = 0; j < ranks.size(); ++j) {
        ExperimentConfig c = sweep.base;
        c.train_size = sizes[i];
        c.model_rank = ranks[j];
        per_run[run][i * ranks.size() + j] = score_run(c, rd, run);
      }
  });

  SweepResult res;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::vector<ExperimentRecord> recs;
    for (std::size_t run = 0; run < runs; ++run) recs.push_back(per_run[run][cell]);
    res.records.insert(res.records.end(), recs.begin(), recs.end());
    res.cells.push_back(summarize_cell(recs));
  }
  return res;
}

}  // namespace tncap
