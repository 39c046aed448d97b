#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qrw/executor.hpp"

namespace qrw {

// One measured rewrite pass: T_n = s*N + r*p_r*N/n + c*p_r*N.
struct PerfSample {
  double N = 0;    // gate count
  double n = 1;    // worker threads
  double p_r = 0;  // match probability
  double S = 0, R = 0, C = 0;  // bucketed seconds
  double T = 0;                // wall seconds
};

struct PerfFit {
  double s = 0;  // seconds per gate scanned
  double r = 0;  // seconds per rewrite applied
  double c = 0;  // seconds of synchronization per rewrite
  double max_rel_residual = 0;
};

// sN + r*p_rN/n + c*p_rN. With n = 1 the caller conventionally takes c = 0
// (no synchronization in the single-threaded run); this function evaluates
// the formula as given.
double predict_T(const PerfFit &fit, double N, double n, double p_r);

// Least-squares fit of (s, r, c) over the three formula features. Requires
// at least 3 samples spanning at least 2 distinct n and 2 distinct p_r;
// throws on a rank-deficient system.
PerfFit fit_src(std::span<const PerfSample> samples);

// One PerfSample from a measured rule-g pass over a flipped-CNOT circuit.
// The linear engine makes the s*N scan term dominate small-p_r cells,
// which is what the three-term model describes.
PerfSample measure_pass(size_t N, double p_r, int qubits, int threads,
                        uint64_t seed,
                        ScanMode mode = ScanMode::IndexedScan);

struct UtilityRow {
  std::string engine;  // "indexed" | "linear"
  size_t N = 0;
  double p_r = 0;
  double seconds = 0;
  uint64_t rewrites = 0;
};

// Indexed-vs-linear candidate search comparison on flipped-CNOT circuits
// (single worker, rule g forward, one pass each).
std::vector<UtilityRow> run_utility_benchmark(std::span<const size_t> Ns,
                                              std::span<const double> p_rs,
                                              int qubits, uint64_t seed);

std::string utility_csv(std::span<const UtilityRow> rows);

}  // namespace qrw
