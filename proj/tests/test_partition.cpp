#include <algorithm>
#include <random>
#include <set>
#include <unordered_map>

#include "doctest.h"
#include "qrw/gen.hpp"
#include "qrw/partition.hpp"

using namespace qrw;

namespace {

std::unique_ptr<CircuitTable> circuit(int qubits,
                                      std::vector<GateSpec> specs) {
  return std::make_unique<CircuitTable>("t", qubits,
                                        std::span<const GateSpec>(specs));
}

std::vector<std::pair<GateType, std::array<int, 3>>> shape(
    const CircuitTable &t) {
  std::vector<std::pair<GateType, std::array<int, 3>>> out;
  for (const ReconGate &g : reconstruct(t).gates)
    out.push_back({g.type, g.qubits});
  return out;
}

void check_cover(const CircuitTable &t, const std::vector<Partition> &parts) {
  std::set<uint64_t> seen;
  size_t total = 0;
  for (const Partition &p : parts) {
    total += p.members.size();
    for (uint64_t id : p.members) CHECK(seen.insert(id).second);
  }
  CHECK(total == reconstruct(t).gates.size());
}

}  // namespace

TEST_CASE("edge list mirrors next links in topological order") {
  std::vector<GateSpec> specs = {{GateType::CNOT, 0, {0, 1, 0}},
                                 {GateType::H, 0, {0, 0, 0}},
                                 {GateType::H, 0, {1, 0, 0}}};
  auto t = circuit(3, specs);
  auto edges = build_edge_list(*t);
  // every non-null next slot appears exactly once
  size_t expected = 0;
  for (uint64_t id : t->all_ids()) {
    auto r = t->get(id);
    for (int k = 0; k < arity(r->type); k++)
      if (r->next[k] != kNullLink) expected++;
  }
  CHECK(edges.size() == expected);

  // CNOT feeds both H rows
  uint64_t cnot = t->ids_of_type(GateType::CNOT).at(0);
  size_t from_cnot = 0;
  for (const Edge &e : edges)
    if (e.from == cnot) {
      from_cnot++;
      CHECK(t->get(e.to)->type == GateType::H);
    }
  CHECK(from_cnot == 2);
}

TEST_CASE("edge order verified by in-degree simulation on a random circuit") {
  auto t = gen_random_clifford_t("big", 10000, 16, 3, true);
  auto edges = build_edge_list(*t);
  // Kahn-style: when an edge (u,v) arrives, all of u's in-edges must have
  // been consumed already.
  std::unordered_map<uint64_t, int> indeg;
  for (uint64_t id : t->all_ids()) {
    auto r = t->get(id);
    int d = 0;
    for (int k = 0; k < arity(r->type); k++)
      if (r->prev[k] != kNullLink) d++;
    indeg[id] = d;
  }
  for (const Edge &e : edges) {
    CHECK(indeg[e.from] == 0);
    indeg[e.to]--;
  }
  for (auto &[id, d] : indeg) CHECK(d == 0);
}

TEST_CASE("empty circuit has only In->Out edges") {
  CircuitTable t = create_circuit("e", 3);
  auto edges = build_edge_list(t);
  CHECK(edges.size() == 3);
  for (const Edge &e : edges) {
    CHECK(t.get(e.from)->type == GateType::In);
    CHECK(t.get(e.to)->type == GateType::Out);
  }
}

TEST_CASE("unbounded constraints give one partition per component") {
  // two independent 2-qubit blocks on a 4-qubit circuit
  std::vector<GateSpec> specs = {{GateType::CNOT, 0, {0, 1, 0}},
                                 {GateType::H, 0, {0, 0, 0}},
                                 {GateType::CNOT, 0, {2, 3, 0}},
                                 {GateType::T, 0, {3, 0, 0}}};
  auto t = circuit(4, specs);
  auto parts = partition_circuit(*t, PartitionConstraints{});
  CHECK(parts.size() == 2);
  check_cover(*t, parts);
}

TEST_CASE("max_gates=1 gives one partition per gate") {
  auto t = gen_random_clifford_t("single", 200, 8, 5);
  PartitionConstraints bounds;
  bounds.max_gates = 1;
  auto parts = partition_circuit(*t, bounds);
  CHECK(parts.size() == 200);
  for (const auto &p : parts) CHECK(p.gate_count == 1);
  check_cover(*t, parts);
}

TEST_CASE("mixed circuit respects gate and T bounds") {
  auto t = gen_random_clifford_t("mixed", 1000, 12, 7);
  PartitionConstraints bounds;
  bounds.max_gates = 200;
  bounds.max_t_gates = 100;
  auto parts = partition_circuit(*t, bounds, 300);  // force batch boundaries
  check_cover(*t, parts);
  for (const auto &p : parts) {
    CHECK(p.gate_count <= 200);
    CHECK(p.t_count <= 100);
    CHECK(p.gate_count == p.members.size());
  }
}

TEST_CASE("depth bound holds on emitted partitions") {
  auto t = gen_random_clifford_t("deep", 2000, 6, 9);
  PartitionConstraints bounds;
  bounds.max_depth = 12;
  auto parts = partition_circuit(*t, bounds);
  check_cover(*t, parts);
  for (const auto &p : parts) CHECK(p.depth <= 12);
}

TEST_CASE("extract_partition builds standalone audited circuits") {
  std::vector<GateSpec> specs = {{GateType::CNOT, 0, {1, 3, 0}}};
  auto t = circuit(4, specs);
  PartitionConstraints bounds;
  auto parts = partition_circuit(*t, bounds);
  REQUIRE(parts.size() == 1);
  CHECK(parts[0].wires == std::vector<int>{1, 3});
  auto sub = extract_partition(*t, parts[0], "sub");
  CHECK(sub->num_qubits() == 2);
  CHECK(sub->audit().ok());
  auto s = shape(*sub);
  REQUIRE(s.size() == 1);
  CHECK(s[0].first == GateType::CNOT);
  CHECK(s[0].second[0] == 0);  // wire 1 -> local 0
  CHECK(s[0].second[1] == 1);  // wire 3 -> local 1

  // three-wire partition keeps interface order
  auto t2 = circuit(5, {{GateType::Toffoli, 0, {4, 0, 2}}});
  auto parts2 = partition_circuit(*t2, bounds);
  REQUIRE(parts2.size() == 1);
  CHECK(parts2[0].wires == std::vector<int>{0, 2, 4});
  auto sub2 = extract_partition(*t2, parts2[0], "sub2");
  CHECK(sub2->num_qubits() == 3);
  CHECK(sub2->audit().ok());
}

TEST_CASE("stale partitions are rejected after table mutation") {
  auto t = gen_random_cnot_circuit("stale", 50, 6, 2);
  auto parts = partition_circuit(*t, PartitionConstraints{});
  t->append_gates(std::vector<GateSpec>{{GateType::H, 0, {0, 0, 0}}});
  CHECK_THROWS_AS(extract_partition(*t, parts.at(0), "x"), StoreError);
}

TEST_CASE("re-stitching all partitions reproduces the circuit") {
  for (uint64_t seed : {1, 2}) {
    auto t = gen_random_clifford_t("stitch", 3000, 10, seed, true);
    PartitionConstraints bounds;
    bounds.max_gates = 50;
    bounds.max_t_gates = 20;
    auto parts = partition_circuit(*t, bounds, 500);
    check_cover(*t, parts);
    auto rebuilt = stitch_partitions(parts, 10, "rebuilt");
    CHECK(shape(*rebuilt) == shape(*t));
    CHECK(rebuilt->audit().ok());
  }
}

TEST_CASE("union-find merges with idempotent find") {
  UnionFind uf(16);
  CHECK(uf.find(3) == 3);
  uint64_t r = uf.unite(3, 7);
  CHECK(uf.find(3) == r);
  CHECK(uf.find(7) == r);
  CHECK(uf.unite(3, 7) == r);  // already joined
  uf.unite(7, 9);
  CHECK(uf.find(9) == uf.find(3));
  CHECK(uf.find(11) != uf.find(3));
  CHECK(uf.memory_bytes() >= 16 * sizeof(uint64_t));
  CHECK(uf.memory_bytes() < 16 * 64);  // O(n), small constant
}

TEST_CASE("union-find handles a million mixed ops quickly") {
  const size_t n = 1 << 20;
  UnionFind uf(n);
  std::mt19937_64 rng(5);
  for (size_t i = 0; i < n - 1; i++) uf.unite(i, i + 1);
  uint64_t root = uf.find(0);
  for (size_t i = 0; i < 1000000; i++) CHECK(uf.find(rng() % n) == root);
}
