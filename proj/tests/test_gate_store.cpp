#include <algorithm>
#include <atomic>
#include <barrier>
#include <thread>

#include "doctest.h"
#include "qrw/gen.hpp"
#include "qrw/table.hpp"

using namespace qrw;

namespace {

// The reference three-row example: CNOT(q0,q1) then H on each of its wires,
// on a 3-qubit circuit (third wire empty).
std::unique_ptr<CircuitTable> make_reference_circuit() {
  std::vector<GateSpec> specs = {
      {GateType::CNOT, 0, {0, 1, 0}},
      {GateType::H, 0, {0, 0, 0}},
      {GateType::H, 0, {1, 0, 0}},
  };
  return std::make_unique<CircuitTable>("ref", 3,
                                        std::span<const GateSpec>(specs));
}

std::vector<std::pair<GateType, std::array<int, 3>>> shape(
    const CircuitTable &t) {
  std::vector<std::pair<GateType, std::array<int, 3>>> out;
  for (const ReconGate &g : reconstruct(t).gates)
    out.push_back({g.type, g.qubits});
  return out;
}

}  // namespace

TEST_CASE("create_circuit wires In rows straight to Out rows") {
  CircuitTable t = create_circuit("c", 3);
  CHECK(t.size() == 6);
  CHECK(t.num_qubits() == 3);
  CHECK(t.count_of_type(GateType::In) == 3);
  CHECK(t.count_of_type(GateType::Out) == 3);
  std::vector<uint64_t> ins = t.ids_of_type(GateType::In);
  std::sort(ins.begin(), ins.end());
  for (uint64_t id : ins) {
    auto rec = t.get(id);
    REQUIRE(rec);
    CHECK(!rec->prev_ref(0));
    auto out = t.get(rec->next_ref(0)->gate);
    REQUIRE(out);
    CHECK(out->type == GateType::Out);
    CHECK(out->prev_ref(0) == PortRef{id, 0});
  }
  CHECK(t.audit().ok());

  CHECK(create_circuit("one", 1).size() == 2);
  CHECK_THROWS_AS(create_circuit("bad", 0), StoreError);
}

TEST_CASE("select_by_id returns rows and not-found") {
  auto t = make_reference_circuit();
  uint64_t cnot = t->ids_of_type(GateType::CNOT).at(0);
  auto rec = t->get(cnot);
  REQUIRE(rec);
  CHECK(rec->type == GateType::CNOT);
  // both NEXT links land on H rows at their sole wire (postfix 0)
  for (int k = 0; k < 2; k++) {
    auto n = rec->next_ref(k);
    REQUIRE(n);
    CHECK(n->postfix == 0);
    CHECK(t->get(n->gate)->type == GateType::H);
  }
  CHECK(!t->get(999));
}

TEST_CASE("select_random_by_type is uniform and seed-deterministic") {
  std::vector<GateSpec> specs = {{GateType::CNOT, 0, {0, 1, 0}},
                                 {GateType::CNOT, 0, {1, 2, 0}}};
  CircuitTable t("c", 3, specs);

  std::mt19937_64 rng(7);
  CHECK(!t.select_random_by_type(GateType::H, rng));

  std::array<int, 2> hits = {0, 0};
  std::vector<uint64_t> cnots = t.ids_of_type(GateType::CNOT);
  for (int i = 0; i < 10000; i++) {
    auto g = t.select_random_by_type(GateType::CNOT, rng);
    REQUIRE(g);
    hits[g->id == cnots[0] ? 0 : 1]++;
  }
  // 10^4 fair draws land within 5000 +- 300 (way beyond 5 sigma)
  CHECK(hits[0] > 4700);
  CHECK(hits[0] < 5300);

  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 100; i++)
    CHECK(t.select_random_by_type(GateType::CNOT, a)->id ==
          t.select_random_by_type(GateType::CNOT, b)->id);
}

TEST_CASE("lock is all-or-nothing and commit/abort release") {
  auto t = make_reference_circuit();
  std::vector<uint64_t> ids = t->all_ids();

  Transaction t1 = t->begin();
  Transaction t2 = t->begin();
  CHECK(t1.lock({ids[0], ids[1]}));
  CHECK(t2.lock({ids[2], ids[3]}));          // disjoint: fine
  CHECK(!t2.lock({ids[1], ids[4]}));         // overlap: all-or-nothing fail
  CHECK(!t2.holds(ids[4]));                  // nothing acquired
  t1.abort();
  CHECK(t2.lock({ids[1], ids[4]}));          // released by abort
  t2.abort();

  Transaction t3 = t->begin();
  CHECK(!t3.lock({uint64_t{12345}}));  // absent row
  t3.abort();
}

TEST_CASE("racing transactions: exactly one wins each overlap") {
  auto t = gen_random_cnot_circuit("race", 50, 8, 3);
  std::vector<uint64_t> ids = t->all_ids();
  std::atomic<int> winners{0};
  std::barrier sync(8);  // hold locks until every thread has tried
  std::vector<std::thread> threads;
  for (int w = 0; w < 8; w++) {
    threads.emplace_back([&] {
      Transaction txn = t->begin();
      bool won = txn.lock(ids);  // everyone contends for the same full set
      sync.arrive_and_wait();
      if (won) {
        winners++;
        txn.commit();
      } else {
        txn.abort();
      }
    });
  }
  for (auto &th : threads) th.join();
  CHECK(winners.load() == 1);
}

TEST_CASE("abort rolls back to a bit-identical table") {
  auto t = make_reference_circuit();
  auto before = t->rows();
  uint64_t h = t->ids_of_type(GateType::H).at(0);
  auto rec = t->get(h);
  {
    Transaction txn = t->begin();
    REQUIRE(txn.lock({h, rec->prev_ref(0)->gate, rec->next_ref(0)->gate}));
    txn.erase(h);
    CHECK(!txn.get(h));           // gone inside the transaction
    CHECK(t->get(h));             // still committed outside
    txn.abort();
  }
  CHECK(t->get(h));
  auto after = t->rows();
  REQUIRE(before.size() == after.size());
  for (size_t i = 0; i < before.size(); i++) {
    CHECK(before[i].id == after[i].id);
    CHECK(before[i].prev == after[i].prev);
    CHECK(before[i].next == after[i].next);
  }
}

TEST_CASE("insert splices on every wire; stale pairs are rejected") {
  CircuitTable t = create_circuit("c", 2);
  std::vector<uint64_t> ins = t.ids_of_type(GateType::In);
  std::sort(ins.begin(), ins.end());

  // H between In and Out on wire 0
  {
    Transaction txn = t.begin();
    auto in0 = t.get(ins[0]);
    PortRef to = *in0->next_ref(0);
    REQUIRE(txn.lock({ins[0], to.gate}));
    SplicePoint sp{in0->self_ref(0), to};
    uint64_t h = txn.insert(GateType::H, 0, {&sp, 1});
    txn.commit();
    auto rec = t.get(h);
    REQUIRE(rec);
    CHECK(rec->prev_ref(0) == PortRef{ins[0], 0});
    CHECK(rec->next_ref(0) == to);
    CHECK(t.get(ins[0])->next_ref(0) == PortRef{h, 0});
    CHECK(t.get(to.gate)->prev_ref(0) == PortRef{h, 0});
  }

  // CNOT across both wires: all 4 affected links checked by traversal
  {
    Transaction txn = t.begin();
    auto in1 = t.get(ins[1]);
    uint64_t h = t.ids_of_type(GateType::H).at(0);
    auto hrec = t.get(h);
    REQUIRE(txn.lock({h, hrec->next_ref(0)->gate, ins[1],
                      in1->next_ref(0)->gate}));
    SplicePoint sp[2] = {{hrec->self_ref(0), *hrec->next_ref(0)},
                         {in1->self_ref(0), *in1->next_ref(0)}};
    uint64_t c = txn.insert(GateType::CNOT, 0, sp);
    txn.commit();
    auto rec = t.get(c);
    CHECK(rec->prev_ref(0) == PortRef{h, 0});
    CHECK(rec->prev_ref(1) == PortRef{ins[1], 0});
    CHECK(t.get(h)->next_ref(0) == PortRef{c, 0});
    CHECK(t.get(ins[1])->next_ref(0) == PortRef{c, 1});
    CHECK(t.get(rec->next_ref(0)->gate)->prev_ref(0) == PortRef{c, 0});
    CHECK(t.get(rec->next_ref(1)->gate)->prev_ref(0) == PortRef{c, 1});
  }
  CHECK(t.audit().ok());

  // stale pair: In no longer adjacent to Out on wire 0
  {
    Transaction txn = t.begin();
    auto in0 = t.get(ins[0]);
    uint64_t out0 = t.ids_of_type(GateType::Out).at(0);
    REQUIRE(txn.lock({ins[0], out0}));
    SplicePoint sp{in0->self_ref(0), PortRef{out0, 0}};
    CHECK_THROWS_AS(txn.insert(GateType::X, 0, {&sp, 1}), StoreError);
    txn.abort();
  }
}

TEST_CASE("erase splices predecessors to successors and needs locks") {
  auto t = make_reference_circuit();
  uint64_t cnot = t->ids_of_type(GateType::CNOT).at(0);
  auto rec = t->get(cnot);

  {
    Transaction txn = t->begin();
    REQUIRE(txn.lock({cnot}));
    CHECK_THROWS_AS(txn.erase(cnot), StoreError);  // neighbors not locked
    txn.abort();
  }
  {
    Transaction txn = t->begin();
    REQUIRE(txn.lock({cnot, rec->prev_ref(0)->gate, rec->prev_ref(1)->gate,
                      rec->next_ref(0)->gate, rec->next_ref(1)->gate}));
    txn.erase(cnot);
    txn.commit();
  }
  CHECK(!t->get(cnot));
  CHECK(t->audit().ok());
  // both H gates now hang directly from In rows
  for (uint64_t h : t->ids_of_type(GateType::H))
    CHECK(t->get(t->get(h)->prev_ref(0)->gate)->type == GateType::In);

  // locking a deleted id fails
  Transaction txn = t->begin();
  CHECK(!txn.lock({cnot}));
  txn.abort();
}

TEST_CASE("reconstruct assigns qubits and orders topologically") {
  auto t = make_reference_circuit();
  Reconstruction rec = reconstruct(*t);
  CHECK(rec.num_qubits == 3);
  REQUIRE(rec.gates.size() == 3);
  CHECK(rec.gates[0].type == GateType::CNOT);
  CHECK(rec.gates[0].qubits[0] == 0);
  CHECK(rec.gates[0].qubits[1] == 1);
  CHECK(rec.gates[1].type == GateType::H);
  CHECK(rec.gates[2].type == GateType::H);
  std::array<int, 2> hw = {rec.gates[1].qubits[0], rec.gates[2].qubits[0]};
  std::sort(hw.begin(), hw.end());
  CHECK(hw == std::array<int, 2>{0, 1});

  CircuitTable empty = create_circuit("e", 4);
  CHECK(reconstruct(empty).gates.empty());
  CHECK(reconstruct(empty).num_qubits == 4);
}

TEST_CASE("round trip: reconstruct -> rebuild -> reconstruct is identity") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    auto t = gen_random_clifford_t("rt", 1000, 12, seed, true);
    Reconstruction r1 = reconstruct(*t);
    std::vector<GateSpec> specs;
    for (const ReconGate &g : r1.gates) specs.push_back(g.spec());
    CircuitTable t2("rt2", r1.num_qubits, specs);
    CHECK(shape(*t) == shape(t2));
  }
}

TEST_CASE("reconstruct reports broken links with the offending id") {
  std::vector<GateRecord> rows;
  GateRecord in, out, h;
  in.id = 1;
  in.type = GateType::In;
  in.set_next(0, PortRef{3, 0});
  out.id = 2;
  out.type = GateType::Out;
  out.set_prev(0, PortRef{3, 0});
  h.id = 3;
  h.type = GateType::H;
  h.set_prev(0, PortRef{1, 0});
  h.set_next(0, PortRef{4, 0});  // dangling
  rows = {in, out, h};
  auto t = CircuitTable::from_rows("broken", rows);
  CHECK(!t->audit().ok());
  CHECK_THROWS_WITH_AS(reconstruct(*t),
                       doctest::Contains("broken links"), StoreError);
}

TEST_CASE("swap_adjacent exchanges wire neighbors") {
  std::vector<GateSpec> specs = {{GateType::T, 0, {0, 0, 0}},
                                 {GateType::H, 0, {0, 0, 0}}};
  CircuitTable t("c", 1, specs);
  uint64_t tt = t.ids_of_type(GateType::T).at(0);
  auto rec = t.get(tt);
  Transaction txn = t.begin();
  REQUIRE(txn.lock({tt, rec->prev_ref(0)->gate, rec->next_ref(0)->gate,
                    t.get(rec->next_ref(0)->gate)->next_ref(0)->gate}));
  txn.swap_adjacent(tt, 0);
  txn.commit();
  CHECK(t.audit().ok());
  auto order = shape(t);
  CHECK(order[0].first == GateType::H);
  CHECK(order[1].first == GateType::T);
}

TEST_CASE("swap_cnot_orientation flips control and target in place") {
  std::vector<GateSpec> specs = {{GateType::CNOT, 0, {0, 1, 0}}};
  CircuitTable t("c", 2, specs);
  uint64_t c = t.ids_of_type(GateType::CNOT).at(0);
  auto rec = t.get(c);
  Transaction txn = t.begin();
  REQUIRE(txn.lock({c, rec->prev_ref(0)->gate, rec->prev_ref(1)->gate,
                    rec->next_ref(0)->gate, rec->next_ref(1)->gate}));
  txn.swap_cnot_orientation(c);
  txn.commit();
  CHECK(t.audit().ok());
  Reconstruction r = reconstruct(t);
  REQUIRE(r.gates.size() == 1);
  CHECK(r.gates[0].qubits[0] == 1);  // control moved to q1
  CHECK(r.gates[0].qubits[1] == 0);
}

TEST_CASE("small-scope serializability: concurrent inserts on one wire") {
  for (int round = 0; round < 20; round++) {
    CircuitTable t = create_circuit("lin", 1);
    uint64_t in = t.ids_of_type(GateType::In).at(0);
    auto worker = [&](GateType type) {
      for (;;) {
        auto rec = t.get(in);
        PortRef to = *rec->next_ref(0);
        Transaction txn = t.begin();
        if (!txn.lock({in, to.gate})) {
          txn.abort();
          continue;
        }
        // revalidate adjacency under the lock
        if (txn.get(in)->next_ref(0) != to) {
          txn.abort();
          continue;
        }
        SplicePoint sp{rec->self_ref(0), to};
        txn.insert(type, 0, {&sp, 1});
        txn.commit();
        return;
      }
    };
    std::thread a(worker, GateType::X);
    std::thread b(worker, GateType::H);
    a.join();
    b.join();
    CHECK(t.audit().ok());
    auto order = shape(t);
    REQUIRE(order.size() == 2);
    // equals one of the two serial executions
    bool xh = order[0].first == GateType::X && order[1].first == GateType::H;
    bool hx = order[0].first == GateType::H && order[1].first == GateType::X;
    CHECK((xh || hx));
  }
}

TEST_CASE("insert_batch bounds live batch memory and counts gates") {
  reset_batch_accounting();
  CircuitTable t("big", 8);
  auto specs = gen_random_cnot_specs(100000, 8, 11);
  size_t n = insert_batch(t, specs, 10000);
  CHECK(n == 100000);
  CHECK(t.count_of_type(GateType::CNOT) == 100000);
  CHECK(batch_peak_records().load() <= 10000);
  CHECK(batch_live_records().load() == 0);
  CHECK(t.audit().ok());

  // batch larger than input: single batch
  reset_batch_accounting();
  CircuitTable t2("small", 8);
  auto few = gen_random_cnot_specs(10, 8, 12);
  CHECK(insert_batch(t2, few, 1000) == 10);
  CHECK(batch_peak_records().load() == 10);
}

TEST_CASE("extraction cursor resumes exactly where it stopped") {
  auto t = gen_random_cnot_circuit("cur", 100, 6, 5);
  Reconstruction full = reconstruct(*t);

  ReconstructCursor cur(*t);
  std::vector<ReconGate> got;
  // pull 3 batches of 10, then the rest
  for (int i = 0; i < 3; i++) {
    auto b = cur.next_batch(10);
    got.insert(got.end(), b.begin(), b.end());
  }
  while (!cur.done()) {
    auto b = cur.next_batch(10);
    got.insert(got.end(), b.begin(), b.end());
  }
  // In/Out rows are filtered from emission, so sizes match the full pass
  REQUIRE(got.size() == full.gates.size());
  for (size_t i = 0; i < got.size(); i++) {
    CHECK(got[i].id == full.gates[i].id);
    CHECK(got[i].qubits == full.gates[i].qubits);
  }
}

TEST_CASE("audit flags deliberate corruption") {
  auto t = make_reference_circuit();
  auto rows = t->rows();
  // point one H's prev at the wrong row
  for (auto &r : rows)
    if (r.type == GateType::H) {
      r.set_prev(0, PortRef{r.id, 0});
      break;
    }
  auto bad = CircuitTable::from_rows("bad", rows);
  CHECK(!bad->audit().ok());
}
