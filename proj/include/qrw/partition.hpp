#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "qrw/table.hpp"

namespace qrw {

// One edge per non-null NEXT slot; the list is ordered by the topological
// position of `from`, so all in-edges of a node appear before its
// out-edges.
struct Edge {
  uint64_t from = 0;
  uint64_t to = 0;
};

std::vector<Edge> build_edge_list(const CircuitTable &table);

struct PartitionConstraints {
  size_t max_gates = std::numeric_limits<size_t>::max();
  size_t max_t_gates = std::numeric_limits<size_t>::max();
  size_t max_depth = std::numeric_limits<size_t>::max();
};

// A closed constraint-satisfying subcircuit. member_gates carry the gates in
// topological order with their qubits in the *original* circuit's numbering;
// wires lists the original qubits the partition touches (= its interface, in
// ascending order).
struct Partition {
  uint64_t partition_id = 0;
  std::vector<uint64_t> members;       // gate ids, topological order
  std::vector<ReconGate> member_gates; // same order, original qubits
  std::vector<size_t> topo_pos;        // same order, global topo position
  std::vector<int> wires;              // original qubit indices, ascending
  size_t gate_count = 0;
  size_t t_count = 0;
  size_t depth = 0;  // exact, recomputed at emission
  uint64_t table_version = 0;
};

// Disjoint sets with union by rank and path compression; per-root aggregate
// stats live in the partitioner, this is the bare structure.
class UnionFind {
 public:
  explicit UnionFind(size_t n);
  uint64_t find(uint64_t x);
  // Returns the surviving root, or the common root if already joined.
  uint64_t unite(uint64_t a, uint64_t b);
  size_t memory_bytes() const;

 private:
  std::vector<uint64_t> parent_;
  std::vector<uint8_t> rank_;
};

// Streamed union-find partitioning: consume the edge list batch by batch,
// grow partitions while all bounds hold, emit a partition once no member
// has an unprocessed out-edge. Every non-In/Out gate lands in exactly one
// partition.
std::vector<Partition> partition_circuit(const CircuitTable &table,
                                         const PartitionConstraints &bounds,
                                         size_t batch_size = 1000000);

// Standalone subcircuit with fresh In/Out rows; wire k corresponds to
// partition.wires[k]. Throws if the table changed since partitioning.
std::unique_ptr<CircuitTable> extract_partition(const CircuitTable &table,
                                                const Partition &p,
                                                const std::string &label);

// Reassemble all partitions (preserving the global topological order their
// member_gates record) into one circuit; used to check the partitioning is
// lossless.
std::unique_ptr<CircuitTable> stitch_partitions(
    const std::vector<Partition> &parts, int num_qubits,
    const std::string &label);

}  // namespace qrw
