// Builds a small tensor train, contracts it, evaluates it on an input, and
// prints its capacity bounds and a verified shattering certificate.

#include <iostream>
#include <random>

#include "tncap/tncap.hpp"

int main() {
  using namespace tncap;

  const auto g = build_tt(4, 3, 2);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  CoreAssignment cores;
  for (const auto& v : g.vertices()) {
    DenseTensor c(g.core_shape(v));
    for (auto& x : c.data()) x = unif(rng);
    cores.emplace(v, std::move(c));
  }

  const DenseTensor w = contract(g, cores);
  DenseTensor x(w.shape());
  for (auto& v : x.data()) v = unif(rng);
  std::cout << "<W, X> dense " << inner_product(w, x) << ", train sweep " << tt_inner_product(g, cores, x) << "\n";

  const auto report = bound_report(g, FamilySpec{Family::tt, 4, 3, 2}, {1000, 10000}, 0.05);
  std::cout << io::to_json(report).dump(2) << "\n";

  const auto cert = tt_construction(2, 4, 2);
  const auto rec = verify_certificate(cert, VerifyMode::exhaustive);
  std::cout << cert.construction << ": " << rec.patterns_realized << "/" << rec.patterns_checked
            << " sign patterns on |S| = " << rec.index_set_size << "\n";
  return rec.patterns_realized == rec.patterns_checked ? 0 : 1;
}
