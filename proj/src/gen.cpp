#include "qrw/gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qrw/templates.hpp"

namespace qrw {

std::vector<GateSpec> gen_random_cnot_specs(size_t n, int qubits,
                                            uint64_t seed) {
  if (qubits < 2) throw std::invalid_argument("need at least 2 qubits");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, qubits - 1);
  std::vector<GateSpec> out;
  out.reserve(n);
  for (size_t i = 0; i < n; i++) {
    int c = pick(rng), t = pick(rng);
    while (t == c) t = pick(rng);
    GateSpec g;
    g.type = GateType::CNOT;
    g.qubits = {c, t, 0};
    out.push_back(g);
  }
  return out;
}

std::vector<GateSpec> gen_random_clifford_t_specs(size_t n, int qubits,
                                                  uint64_t seed,
                                                  bool include_3q) {
  if (qubits < 2) throw std::invalid_argument("need at least 2 qubits");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, qubits - 1);
  std::uniform_real_distribution<double> angle(0, 4 * M_PI);
  static const GateType one_q[] = {GateType::H,   GateType::X, GateType::Z,
                                   GateType::S,   GateType::Sdg, GateType::T,
                                   GateType::Tdg, GateType::Rx, GateType::Rz};
  std::vector<GateSpec> out;
  out.reserve(n);
  for (size_t i = 0; i < n; i++) {
    GateSpec g;
    uint64_t kind = rng() % (include_3q && qubits >= 3 ? 4 : 3);
    if (kind == 0) {  // two-qubit
      int c = pick(rng), t = pick(rng);
      while (t == c) t = pick(rng);
      g.type = GateType::CNOT;
      g.qubits = {c, t, 0};
    } else if (kind == 3) {  // three-qubit
      int a = pick(rng), b = pick(rng), c = pick(rng);
      while (b == a) b = pick(rng);
      while (c == a || c == b) c = pick(rng);
      g.type = rng() % 2 ? GateType::Toffoli : GateType::CSWAP;
      g.qubits = {a, b, c};
    } else {
      g.type = one_q[rng() % std::size(one_q)];
      g.qubits = {pick(rng), 0, 0};
      if (is_rotation(g.type)) g.param = angle(rng);
    }
    out.push_back(g);
  }
  return out;
}

std::unique_ptr<CircuitTable> gen_random_cnot_circuit(const std::string &label,
                                                      size_t n, int qubits,
                                                      uint64_t seed) {
  auto specs = gen_random_cnot_specs(n, qubits, seed);
  return std::make_unique<CircuitTable>(label, qubits,
                                        std::span<const GateSpec>(specs));
}

std::unique_ptr<CircuitTable> gen_random_clifford_t(const std::string &label,
                                                    size_t n, int qubits,
                                                    uint64_t seed,
                                                    bool include_3q) {
  auto specs = gen_random_clifford_t_specs(n, qubits, seed, include_3q);
  return std::make_unique<CircuitTable>(label, qubits,
                                        std::span<const GateSpec>(specs));
}

std::unique_ptr<CircuitTable> gen_flipped_cnot_circuit(
    const std::string &label, size_t N, double p_r, int qubits, uint64_t seed,
    size_t *flipped_out) {
  if (p_r < 0 || p_r > 1) throw std::invalid_argument("p_r out of range");
  auto table = gen_random_cnot_circuit(label, N, qubits, seed);
  size_t want = size_t(std::llround(p_r * double(N)));
  std::mt19937_64 rng(seed ^ 0xf11bb11ull);
  std::vector<uint64_t> cnots = table->ids_of_type(GateType::CNOT);
  std::shuffle(cnots.begin(), cnots.end(), rng);
  const RewriteTemplate *g_rev = find_template("g-rev");
  size_t flipped = 0;
  for (size_t i = 0; i < cnots.size() && flipped < want; i++) {
    ApplyResult r = try_rewrite(*table, *g_rev, cnots[i], rng);
    if (r.applied) flipped++;
  }
  if (flipped != want)
    throw std::runtime_error("gen_flipped_cnot_circuit: flip shortfall");
  if (flipped_out) *flipped_out = flipped;
  return table;
}

}  // namespace qrw
