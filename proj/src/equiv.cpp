#include "qrw/equiv.hpp"

#include <chrono>
#include <deque>

#include "qrw/gen.hpp"
#include "qrw/templates.hpp"

namespace qrw {

namespace {

GateSpec inverted(GateSpec g) {
  g.type = inverse_type(g.type);
  if (is_rotation(g.type)) g.param = -g.param;
  return g;
}

bool cnot_only(const CircuitTable &t) {
  for (int i = 0; i < kNumGateTypes; i++) {
    auto ty = static_cast<GateType>(i);
    if (ty == GateType::In || ty == GateType::Out || ty == GateType::CNOT)
      continue;
    if (t.count_of_type(ty) > 0) return false;
  }
  return true;
}

bool same_matrix(const std::vector<std::vector<uint64_t>> &a,
                 const std::vector<std::vector<uint64_t>> &b) {
  return a == b;
}

}  // namespace

std::unique_ptr<CircuitTable> concat_dagger(const CircuitTable &c1,
                                            const CircuitTable &c2,
                                            const std::string &label) {
  Reconstruction r1 = reconstruct(c1);
  Reconstruction r2 = reconstruct(c2);
  if (r1.num_qubits != r2.num_qubits)
    throw std::invalid_argument("concat_dagger: qubit-count mismatch");
  std::vector<GateSpec> specs;
  specs.reserve(r1.gates.size() + r2.gates.size());
  for (const ReconGate &g : r2.gates) specs.push_back(g.spec());
  for (auto it = r1.gates.rbegin(); it != r1.gates.rend(); ++it)
    specs.push_back(inverted(it->spec()));
  return std::make_unique<CircuitTable>(label, r1.num_qubits,
                                        std::span<const GateSpec>(specs));
}

Verdict check_equivalence(const CircuitTable &c1, const CircuitTable &c2,
                          double timeout_s) {
  using Clock = std::chrono::steady_clock;
  Clock::time_point start = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  auto table = concat_dagger(c1, c2, "equiv");
  int q = table->num_qubits();

  const RewriteTemplate *cancels[] = {find_template("a"), find_template("b"),
                                      find_template("e"), find_template("f")};
  const RewriteTemplate *commutes[] = {find_template("c"), find_template("d")};
  std::mt19937_64 rng(0x5eed);

  std::deque<uint64_t> work;
  for (uint64_t id : table->all_ids()) work.push_back(id);

  Verdict v;
  uint64_t iter = 0;
  while (!work.empty()) {
    if ((++iter & 1023) == 0 && elapsed() > timeout_s) {
      v.timed_out = true;
      break;
    }
    uint64_t id = work.front();
    work.pop_front();
    auto rec = table->get(id);
    if (!rec || rec->type == GateType::In || rec->type == GateType::Out)
      continue;

    bool progressed = false;
    for (const RewriteTemplate *tmpl : cancels) {
      auto p = tmpl->plan(*table, id, &rng);
      if (!p) continue;
      Transaction txn = table->begin();
      txn.lock(p->locks);  // single-threaded: cannot fail
      p->apply(txn);
      txn.commit();
      for (uint64_t l : p->locks) work.push_back(l);
      progressed = true;
      break;
    }
    if (progressed) continue;

    // An H-surrounded CNOT reverses and sheds its four H gates; this lets
    // orientation-flipped variants of the same circuit meet in the middle.
    if (rec->type == GateType::CNOT) {
      const RewriteTemplate *rev = find_template("g");
      if (auto p = rev->plan(*table, id, &rng)) {
        Transaction txn = table->begin();
        txn.lock(p->locks);
        p->apply(txn);
        txn.commit();
        for (uint64_t l : p->locks) work.push_back(l);
        continue;
      }
    }

    // Commute only when it immediately lines up a cancellation on the far
    // side of the CNOT (lookahead 1); unrestricted shuffling need not
    // terminate.
    for (const RewriteTemplate *tmpl : commutes) {
      rec = table->get(id);
      if (!rec) break;
      auto n = rec->next_ref(0);
      if (!n) continue;
      auto cnot = table->get(n->gate);
      if (!cnot || cnot->type != GateType::CNOT) continue;
      int slot = slot_for_postfix(GateType::CNOT, n->postfix);
      auto far = table->get(cnot->next_ref(slot)->gate);
      if (!far) continue;
      bool enables = is_rotation(rec->type)
                         ? far->type == rec->type
                         : far->type == inverse_type(rec->type);
      if (!enables) continue;
      auto p = tmpl->plan(*table, id, &rng);
      if (!p) continue;
      Transaction txn = table->begin();
      txn.lock(p->locks);
      p->apply(txn);
      txn.commit();
      work.push_back(id);
      break;
    }
  }

  v.residue_size = table->size() - 2 * size_t(q);
  v.elapsed_s = elapsed();
  if (v.residue_size == 0) {
    v.kind = VerdictKind::Equivalent;
    return v;
  }
  if (cnot_only(c1) && cnot_only(c2)) {
    v.kind = same_matrix(gf2_matrix(c1), gf2_matrix(c2))
                 ? VerdictKind::Equivalent
                 : VerdictKind::NotEquivalent;
    return v;
  }
  v.kind = VerdictKind::Unknown;
  return v;
}

std::vector<std::vector<uint64_t>> gf2_matrix(const CircuitTable &circuit) {
  Reconstruction r = reconstruct(circuit);
  size_t q = size_t(r.num_qubits);
  size_t words = (q + 63) / 64;
  std::vector<std::vector<uint64_t>> rows(q,
                                          std::vector<uint64_t>(words, 0));
  for (size_t i = 0; i < q; i++) rows[i][i / 64] = uint64_t{1} << (i % 64);
  for (const ReconGate &g : r.gates) {
    if (g.type != GateType::CNOT)
      throw std::invalid_argument("gf2_matrix: non-CNOT gate present");
    int c = g.qubits[0], t = g.qubits[1];
    for (size_t w = 0; w < words; w++) rows[t][w] ^= rows[c][w];
  }
  return rows;
}

std::pair<std::unique_ptr<CircuitTable>, std::unique_ptr<CircuitTable>>
gen_equiv_benchmark(int q, uint64_t seed, bool tamper) {
  if (q < 2) throw std::invalid_argument("gen_equiv_benchmark: q >= 2");
  size_t n = size_t(q) * size_t(q) * size_t(q);
  auto specs = gen_random_cnot_specs(n, q, seed);
  auto c1 = std::make_unique<CircuitTable>("c1", q,
                                           std::span<const GateSpec>(specs));
  if (!tamper) {
    auto c2 = std::make_unique<CircuitTable>("c2", q,
                                             std::span<const GateSpec>(specs));
    return {std::move(c1), std::move(c2)};
  }
  auto m1 = gf2_matrix(*c1);
  std::mt19937_64 rng(seed ^ 0x7a3b9ull);
  for (int attempt = 0; attempt < 256; attempt++) {
    size_t k = rng() % specs.size();
    std::vector<GateSpec> cut = specs;
    cut.erase(cut.begin() + std::ptrdiff_t(k));
    auto c2 = std::make_unique<CircuitTable>("c2", q,
                                             std::span<const GateSpec>(cut));
    // Re-sample if the deleted gate happened to be redundant.
    if (!same_matrix(m1, gf2_matrix(*c2))) return {std::move(c1),
                                                   std::move(c2)};
  }
  throw std::runtime_error("gen_equiv_benchmark: no non-redundant deletion");
}

}  // namespace qrw
