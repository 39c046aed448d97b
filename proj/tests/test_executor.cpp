#include <cmath>

#include "doctest.h"
#include "qrw/executor.hpp"
#include "qrw/gen.hpp"
#include "support/dense_sim.hpp"

using namespace qrw;

namespace {

std::unique_ptr<CircuitTable> circuit(int qubits,
                                      std::vector<GateSpec> specs) {
  return std::make_unique<CircuitTable>("t", qubits,
                                        std::span<const GateSpec>(specs));
}

}  // namespace

TEST_CASE("single worker clears a CNOT pair with rule b") {
  auto t = circuit(2, {GateSpec{GateType::CNOT, 0, {0, 1, 0}},
                       GateSpec{GateType::CNOT, 0, {0, 1, 0}}});
  PassConfig cfg;
  PassReport rep = run_pass(*t, *find_template("b"), cfg);
  CHECK(rep.rewrites_applied == 1);
  CHECK(rep.lock_failures == 0);
  CHECK(t->size() == 4);  // In/Out only
  CHECK(t->audit().ok());
}

TEST_CASE("shards partition the candidate space") {
  auto t = gen_random_cnot_circuit("shard", 500, 8, 21);
  const RewriteTemplate *tmpl = find_template("b-rev");
  // count candidates without mutating: use a no-op situation by asking for
  // matches on rule g (no H gates => zero candidates from the H index) and
  // instead verify with candidates_seen of b-rev restricted to planning
  // failures. Simpler: compare candidate totals on fresh copies.
  uint64_t solo;
  {
    auto fresh = gen_random_cnot_circuit("s0", 500, 8, 21);
    PassConfig cfg;
    solo = run_pass(*fresh, *tmpl, cfg).candidates_seen;
  }
  uint64_t sharded = 0;
  for (int pid = 0; pid < 4; pid++) {
    auto fresh = gen_random_cnot_circuit("s1", 500, 8, 21);
    PassConfig cfg;
    cfg.pid = pid;
    cfg.nproc = 4;
    sharded += run_pass(*fresh, *tmpl, cfg).candidates_seen;
  }
  CHECK(sharded == solo);
  (void)t;
}

TEST_CASE("rule-g pass rewrites all flipped sites under 4 workers") {
  size_t flips = 0;
  auto t = gen_flipped_cnot_circuit("flip", 1000, 0.1, 8, 31, &flips);
  CHECK(flips == 100);
  CHECK(t->count_of_type(GateType::H) == 400);
  PassReport rep = run_pass_parallel(*t, *find_template("g"), 4, 1,
                                     ScanMode::IndexedScan, 7);
  CHECK(rep.rewrites_applied >= flips);
  CHECK(t->count_of_type(GateType::H) == 0);
  CHECK(t->audit().ok());
}

TEST_CASE("concurrent run preserves the unitary on a shrunk instance") {
  auto t = gen_flipped_cnot_circuit("small", 60, 0.2, 6, 17);
  qrw::testing::Unitary before = qrw::testing::circuit_unitary(*t);
  run_pass_parallel(*t, *find_template("g"), 4, 2, ScanMode::IndexedScan, 3);
  CHECK(t->audit().ok());
  CHECK(max_norm_diff(before, qrw::testing::circuit_unitary(*t)) < 1e-9);
}

TEST_CASE("progress: all-match circuit rewrites without lock failures") {
  // 50 disjoint CNOT pairs: every site matches rule b, one worker
  std::vector<GateSpec> specs;
  for (int k = 0; k < 50; k++) {
    specs.push_back(GateSpec{GateType::CNOT, 0, {2 * (k % 4), 2 * (k % 4) + 1, 0}});
    specs.push_back(GateSpec{GateType::CNOT, 0, {2 * (k % 4), 2 * (k % 4) + 1, 0}});
  }
  auto t = circuit(8, specs);
  PassConfig cfg;
  cfg.pass_count = 8;  // pairs stacked on a wire cancel over several passes
  PassReport rep = run_pass(*t, *find_template("b"), cfg);
  CHECK(rep.lock_failures == 0);
  CHECK(t->count_of_type(GateType::CNOT) == 0);
  CHECK(rep.rewrites_applied == 50);
}

TEST_CASE("S/R/C buckets reconcile with wall time") {
  auto t = gen_flipped_cnot_circuit("buckets", 20000, 0.1, 12, 5);
  PassConfig cfg;
  PassReport rep = run_pass(*t, *find_template("g"), cfg);
  REQUIRE(rep.wall_s > 0);
  double covered = rep.search_s + rep.rewrite_s + rep.comm_s;
  CHECK(std::fabs(covered - rep.wall_s) / rep.wall_s < 0.10);
}

TEST_CASE("portfolio merges a rotation chain to a single gate") {
  std::vector<GateSpec> specs;
  double theta = 0.01;
  for (int i = 0; i < 100; i++)
    specs.push_back(GateSpec{GateType::Rz, theta, {0, 0, 0}});
  auto t = circuit(1, specs);
  const RewriteTemplate *portfolio[] = {find_template("e"),
                                        find_template("f")};
  PortfolioReport rep =
      run_concurrent_portfolio(*t, portfolio, 4, 30.0, 11, 0.05, 0.5);
  CHECK(t->count_of_type(GateType::Rz) == 1);
  Reconstruction r = reconstruct(*t);
  CHECK(r.gates[0].param == doctest::Approx(100 * theta));
  CHECK(rep.rewrites_applied == 99);
  CHECK(t->audit().ok());
}

TEST_CASE("portfolio on a minimal circuit stays flat") {
  auto t = circuit(2, {GateSpec{GateType::CNOT, 0, {0, 1, 0}}});
  const RewriteTemplate *portfolio[] = {find_template("a"),
                                        find_template("b")};
  PortfolioReport rep =
      run_concurrent_portfolio(*t, portfolio, 2, 5.0, 1, 0.05, 0.3);
  CHECK(rep.rewrites_applied == 0);
  for (const auto &s : rep.series)
    CHECK(s.counts[size_t(GateType::CNOT)] == 1);
}

TEST_CASE("portfolio time series records per-type counts") {
  auto t = gen_random_clifford_t("series", 2000, 10, 77);
  uint64_t t_before = t->count_of_type(GateType::T) +
                      t->count_of_type(GateType::Tdg);
  const RewriteTemplate *portfolio[] = {
      find_template("a"), find_template("b"), find_template("c"),
      find_template("e"), find_template("f")};
  PortfolioReport rep =
      run_concurrent_portfolio(*t, portfolio, 4, 20.0, 13, 0.05, 1.0);
  REQUIRE(rep.series.size() >= 2);
  uint64_t t_after = rep.series.back().counts[size_t(GateType::T)] +
                     rep.series.back().counts[size_t(GateType::Tdg)];
  // cancellation portfolio: T-count must not grow
  CHECK(t_after <= t_before);
  CHECK(rep.rewrites_applied > 0);
  CHECK(t->audit().ok());
}
