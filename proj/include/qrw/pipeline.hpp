#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qrw/table.hpp"

namespace qrw {

// Pull-based gate source: fills `out` with up to `max` gates, returns the
// number produced; 0 means the stream is exhausted. Gates arrive in
// topological order.
class GateStream {
 public:
  virtual ~GateStream() = default;
  virtual size_t next(std::vector<GateSpec> &out, size_t max) = 0;
};

class VectorGateStream : public GateStream {
 public:
  explicit VectorGateStream(std::vector<GateSpec> gates)
      : gates_(std::move(gates)) {}
  size_t next(std::vector<GateSpec> &out, size_t max) override;

 private:
  std::vector<GateSpec> gates_;
  size_t pos_ = 0;
};

// Synthesizes gates on the fly via a callback — lets tests stream 10^7
// gates without materializing them.
class SyntheticGateStream : public GateStream {
 public:
  SyntheticGateStream(size_t count, std::function<GateSpec(size_t)> make)
      : count_(count), make_(std::move(make)) {}
  size_t next(std::vector<GateSpec> &out, size_t max) override;

 private:
  size_t count_;
  std::function<GateSpec(size_t)> make_;
  size_t pos_ = 0;
};

enum class TargetSet {
  CliffordT,   // Toffoli/CSWAP expanded; rotations pass through unchanged
  CliffordRz   // same gate set; named target for rotation-bearing streams
};

struct TranspileOptions {
  TargetSet target = TargetSet::CliffordT;
  size_t batch_size = 100000;
  // Test hook: sleep this long per produced batch to skew the
  // producer/consumer balance.
  double artificial_decompose_delay_s = 0;
};

struct TranspileStats {
  uint64_t gates_in = 0;
  uint64_t gates_out = 0;
  double seconds = 0;
  double gates_per_second = 0;
  double produce_s = 0;  // decomposer busy time
  double consume_s = 0;  // inserter busy time
};

// Streamed decomposition: a producer thread pulls source batches and
// expands Toffoli/CSWAP to Clifford+T; a consumer thread appends finished
// batches to the table. The bounded queue caps live gate records at three
// batches (one queued, one in each thread's hands).
TranspileStats transpile_stream(GateStream &source, CircuitTable &table,
                                const TranspileOptions &opts);

// The expansion applied per gate (identity for anything not Toffoli/CSWAP).
void decompose_into(const GateSpec &g, std::vector<GateSpec> &out);

}  // namespace qrw
