#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qrw/table.hpp"

namespace qrw {

// Random gate sequences used by benchmarks and tests. All generators are
// deterministic in the seed.
std::vector<GateSpec> gen_random_cnot_specs(size_t n, int qubits,
                                            uint64_t seed);
std::vector<GateSpec> gen_random_clifford_t_specs(size_t n, int qubits,
                                                  uint64_t seed,
                                                  bool include_3q = false);

std::unique_ptr<CircuitTable> gen_random_cnot_circuit(const std::string &label,
                                                      size_t n, int qubits,
                                                      uint64_t seed);
std::unique_ptr<CircuitTable> gen_random_clifford_t(const std::string &label,
                                                    size_t n, int qubits,
                                                    uint64_t seed,
                                                    bool include_3q = false);

// N random CNOTs with exactly round(p_r*N) of them flipped to the
// H-surrounded reversed form (rule g applied backwards). Returns the table
// and reports the number of flipped sites.
std::unique_ptr<CircuitTable> gen_flipped_cnot_circuit(
    const std::string &label, size_t N, double p_r, int qubits, uint64_t seed,
    size_t *flipped_out = nullptr);

}  // namespace qrw
