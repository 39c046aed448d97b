#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "qrw/table.hpp"

namespace qrw {

enum class VerdictKind { Equivalent, NotEquivalent, Unknown };

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  size_t residue_size = 0;  // non-In/Out gates left at fixpoint
  double elapsed_s = 0;
  bool timed_out = false;
};

// Circuit implementing C2 * C1^dagger: C2's gates followed by C1's gates in
// reverse order with each gate inverted.
std::unique_ptr<CircuitTable> concat_dagger(const CircuitTable &c1,
                                            const CircuitTable &c2,
                                            const std::string &label);

// Reduce concat_dagger(c1, c2) by cancellation rules (a, b, e, f) with
// commutations (c, d) applied only when they immediately enable a
// cancellation. Empty residue => Equivalent. For CNOT-only inputs a
// non-empty residue is settled exactly by the GF(2) oracle; otherwise the
// verdict is Unknown.
Verdict check_equivalence(const CircuitTable &c1, const CircuitTable &c2,
                          double timeout_s = 1000.0);

// The linear transformation of a CNOT-only circuit over GF(2): q bit-packed
// rows, row[i] bit j set iff output i depends on input j. Throws if a
// non-CNOT gate is present.
std::vector<std::vector<uint64_t>> gf2_matrix(const CircuitTable &circuit);

// q-qubit benchmark pair: c1 has q^3 random CNOTs; c2 is a copy, or a copy
// minus one random non-redundant gate when tamper is set.
std::pair<std::unique_ptr<CircuitTable>, std::unique_ptr<CircuitTable>>
gen_equiv_benchmark(int q, uint64_t seed, bool tamper);

}  // namespace qrw
