#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tncap/tncap.hpp"

namespace tncap::cli {

using nlohmann::json;

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::schema_violation:
      return 2;
    case ErrorKind::condition_violated:
      return 3;
    case ErrorKind::verification_failed:
      return 4;
    case ErrorKind::diverged:
      return 5;
    default:
      return 1;
  }
}

/// Writes `body` to `path` through a temporary file in the same directory.
inline void write_atomic(const std::filesystem::path& path, const std::string& body) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::out_of_range, path.string(), "cannot write file");
    out << body;
    if (!out.flush()) throw Error(ErrorKind::out_of_range, path.string(), "write failed");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

struct FamilyFlags {
  std::string family;
  std::int64_t p = 0, d = 0, r = 0, d1 = 0, d2 = 0;
  std::size_t rows = 0;

  void attach(CLI::App* app) {
    app->add_option("--family", family, "matrix, rank_one, cp, tucker, tt, tr, hierarchical_tucker, peps_grid");
    app->add_option("--p", p, "number of output modes");
    app->add_option("--d", d, "mode dimension");
    app->add_option("--r", r, "rank");
    app->add_option("--d1", d1, "matrix rows");
    app->add_option("--d2", d2, "matrix columns");
    app->add_option("--rows", rows, "PEPS grid rows (0: square)");
  }

  TensorNetworkStructure build() const {
    const Family f = parse_family(family);
    if (f == Family::matrix) {
      const auto rows_ = d1 ? d1 : d, cols = d2 ? d2 : d;
      return build_matrix(rows_, cols, r);
    }
    if (p < 1) throw Error(ErrorKind::schema_violation, "--p", "required with --family");
    if (d < 1) throw Error(ErrorKind::schema_violation, "--d", "required with --family");
    if (f != Family::rank_one && r < 1) throw Error(ErrorKind::schema_violation, "--r", "required with --family");
    RankDescriptor rank = RankDescriptor::uniform(r < 1 ? 1 : r);
    rank.grid_rows = rows;
    return build_family(f, std::vector<std::int64_t>(static_cast<std::size_t>(p), d), rank);
  }

  std::optional<FamilySpec> spec() const {
    if (family.empty()) return std::nullopt;
    const Family f = parse_family(family);
    if (f == Family::matrix) {
      // The rd row of the matrix family is stated for square matrices.
      if (d1 && d2 && d1 != d2) return std::nullopt;
      return FamilySpec{f, 2, d1 ? d1 : d, r};
    }
    return FamilySpec{f, p, d, r < 1 ? 1 : r};
  }
};

/// Runs the command line; returns the process exit code. Results go to `out`,
/// error objects to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Capacity bounds and shattering checks for tensor-network models", "tn_capacity"};
  app.require_subcommand(1);

  // bounds
  auto* bounds = app.add_subcommand("bounds", "bound report for a structure file or a family");
  std::string structure_file;
  FamilyFlags bflags;
  std::vector<double> n_grid{500, 1000, 2000, 4000};
  double delta = 0.05;
  bounds->add_option("--structure", structure_file, "structure JSON file");
  bflags.attach(bounds);
  bounds->add_option("--n", n_grid, "sample sizes")->delimiter(',');
  bounds->add_option("--delta", delta, "confidence parameter");

  // verify
  auto* verify = app.add_subcommand("verify", "build and verify a shattering certificate");
  std::string construction, mode = "exhaustive", cert_out;
  std::size_t vp = 0, vd = 0, vr = 0;
  VerifyOptions vopt;
  verify->add_option("--construction", construction, "rank_one, tt, tt_block, tr, tr_block, tucker, cp")->required();
  verify->add_option("--p", vp, "order")->required();
  verify->add_option("--d", vd, "mode dimension")->required();
  verify->add_option("--r", vr, "rank (block constructions use r = d)");
  verify->add_option("--mode", mode, "passthrough or exhaustive");
  verify->add_option("--seed", vopt.seed, "seed for probes and spot checks");
  verify->add_option("--certificate-out", cert_out, "write the certificate JSON here");

  // structure
  auto* structure = app.add_subcommand("structure", "emit a family structure as JSON, or validate a file");
  FamilyFlags sflags;
  std::string structure_in;
  structure->add_option("--structure", structure_in, "structure JSON file to validate");
  sflags.attach(structure);

  // experiment
  auto* experiment = app.add_subcommand("experiment", "synthetic TT classification sweep");
  std::string config_file, out_dir;
  experiment->add_option("--config", config_file, "config JSON")->required();
  experiment->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", "UsageError"}, {"subject", e.get_name()}, {"message", e.what()}, {"exit_code", 2}}.dump()
        << '\n';
    return 2;
  }

  try {
    if (*bounds) {
      if (structure_file.empty() && bflags.family.empty())
        throw Error(ErrorKind::schema_violation, "--structure", "give a structure file or --family");
      const auto g = structure_file.empty() ? bflags.build()
                                            : io::structure_from_json(io::read_json_file(structure_file));
      for (double n : n_grid)
        if (!(n >= 1)) throw Error(ErrorKind::schema_violation, "--n", "sample sizes must be at least 1");
      if (!(delta > 0 && delta < 1)) throw Error(ErrorKind::schema_violation, "--delta", "must lie in (0, 1)");
      out << io::to_json(bound_report(g, bflags.spec(), n_grid, delta)).dump(2) << '\n';
    } else if (*verify) {
      VerifyMode vm;
      if (mode == "exhaustive")
        vm = VerifyMode::exhaustive;
      else if (mode == "passthrough")
        vm = VerifyMode::passthrough;
      else
        throw Error(ErrorKind::schema_violation, "--mode", "expected passthrough or exhaustive");
      if ((construction == "tt_block" || construction == "tr_block") && vr == 0) vr = vd;
      const auto cert = build_certificate(construction, vd, vp, vr);
      if (!cert_out.empty()) write_atomic(cert_out, io::to_json(cert).dump(2) + "\n");
      const auto rec = verify_certificate(cert, vm, vopt);
      json j = io::to_json(rec);
      j["construction"] = construction;
      j["p"] = vp;
      j["d"] = vd;
      j["r"] = vr;
      j["realized"] = std::to_string(rec.patterns_realized) + "/" + std::to_string(rec.patterns_checked);
      out << j.dump(2) << '\n';
    } else if (*structure) {
      if (structure_in.empty() && sflags.family.empty())
        throw Error(ErrorKind::schema_violation, "--structure", "give a structure file or --family");
      const auto g = structure_in.empty() ? sflags.build() : io::structure_from_json(io::read_json_file(structure_in));
      validate(g);
      json j = io::to_json(g);
      j["summary"] = io::to_json(summarize(g));
      out << j.dump(2) << '\n';
    } else if (*experiment) {
      const SweepConfig sweep = io::sweep_from_json(io::read_json_file(config_file));
      std::filesystem::create_directories(out_dir);
      const auto start = std::chrono::steady_clock::now();
      const SweepResult res = run_sweep(sweep);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const std::filesystem::path dir(out_dir);
      write_atomic(dir / "runs.csv", io::runs_csv(res.records));
      write_atomic(dir / "aggregate.csv", io::aggregate_csv(res.cells));
      write_atomic(dir / "bound_curve.csv", io::bound_curve_csv(sweep, res.cells));
      json cells = json::array();
      for (const auto& c : res.cells)
        cells.push_back({{"n", c.n},
                         {"model_rank", c.model_rank},
                         {"mean_gap", c.mean_gap},
                         {"std_gap", c.std_gap},
                         {"mean_log2_gap", io::detail::number(c.mean_log2_gap)},
                         {"theoretical_bound", io::detail::number(c.theoretical_bound)}});
      json summary{{"config", io::to_json(sweep)},
                   {"timestamp", utc_timestamp()},
                   {"elapsed_seconds", secs},
                   {"cells", cells},
                   {"files", {"runs.csv", "aggregate.csv", "bound_curve.csv"}}};
      write_atomic(dir / "summary.json", summary.dump(2) + "\n");
      out << summary.dump(2) << '\n';
    }
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    err << json{{"error", std::string(to_string(e.kind()))}, {"subject", e.subject()}, {"message", e.what()},
                {"exit_code", code}}
               .dump()
        << '\n';
    return code;
  } catch (const std::exception& e) {
    err << json{{"error", "Internal"}, {"subject", ""}, {"message", e.what()}, {"exit_code", 1}}.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace tncap::cli
