#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qrw/gate.hpp"

namespace qrw {

class Transaction;

struct StoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AuditIssue {
  uint64_t gate_id;
  std::string what;
};

struct AuditReport {
  std::vector<AuditIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Read-only view of gate rows. Implemented by the committed table and by a
// transaction's overlay.
class GateView {
 public:
  virtual ~GateView() = default;
  virtual std::optional<GateRecord> get(uint64_t id) const = 0;
};

// A gate emitted by reconstruction: type, parameter and explicit qubit
// indices. In/Out rows are not emitted.
struct ReconGate {
  uint64_t id = 0;
  GateType type = GateType::H;
  double param = 0.0;
  bool switch_flag = false;
  std::array<int, 3> qubits = {0, 0, 0};

  GateSpec spec() const { return GateSpec{type, param, qubits}; }
};

struct Reconstruction {
  int num_qubits = 0;
  std::vector<ReconGate> gates;  // topological order
};

// Splice target for insertion: from.gate's slot (named by from.postfix) must
// currently link to `to`.
struct SplicePoint {
  PortRef from;
  PortRef to;
};

// Transactional tabular storage of one circuit as a doubly-linked gate list.
// Rows live in chunked stable storage indexed by id; ids are monotone and
// never reused. All mutation flows through transactions; readers outside
// transactions see only committed state.
class CircuitTable : public GateView {
 public:
  explicit CircuitTable(std::string label, int num_qubits = 0);
  CircuitTable(std::string label, int num_qubits,
               std::span<const GateSpec> gates);
  CircuitTable(const CircuitTable &) = delete;
  CircuitTable &operator=(const CircuitTable &) = delete;

  const std::string &label() const { return label_; }
  int num_qubits() const;

  // Committed-state reads.
  std::optional<GateRecord> get(uint64_t id) const override;
  std::optional<GateRecord> select_random_by_type(GateType t,
                                                  std::mt19937_64 &rng) const;
  size_t size() const;  // live rows, In/Out included
  size_t count_of_type(GateType t) const;
  std::vector<uint64_t> ids_of_type(GateType t) const;
  std::vector<uint64_t> all_ids() const;
  uint64_t id_upper_bound() const { return next_id_.load(); }
  uint64_t version() const { return version_.load(); }

  Transaction begin();

  // Bulk committed append: splice `gates` (in order) in front of the Out
  // rows, one atomic publish per call. Used by streamed ingestion.
  void append_gates(std::span<const GateSpec> gates);

  // Full-table integrity audit: arity-slot nullity, bidirectional link
  // consistency, DAG acyclicity, In/Out boundary rules, type-index mirror.
  AuditReport audit() const;

  // Committed rows sorted by id; raw-row install for deserialization.
  std::vector<GateRecord> rows() const;
  static std::unique_ptr<CircuitTable> from_rows(std::string label,
                                                 std::vector<GateRecord> rows);

 private:
  friend class Transaction;
  friend class ReconstructCursor;

  static constexpr size_t kChunkBits = 12;
  static constexpr size_t kChunkSize = size_t{1} << kChunkBits;

  struct Slot {
    GateRecord rec;
    bool live = false;
    uint32_t type_pos = 0;   // position inside the type index bucket
    uint32_t lock_owner = 0; // 0 = unlocked; guarded by lock_mtx_
  };
  struct Chunk {
    std::array<Slot, kChunkSize> slots;
  };

  Slot *slot_ptr(uint64_t id) const;            // latch must be held
  Slot &slot_for_write(uint64_t id);            // allocates chunks as needed
  void index_add(uint64_t id, GateType t);      // unique latch held
  void index_remove(uint64_t id);               // unique latch held

  uint64_t allocate_id() { return next_id_.fetch_add(1); }

  std::string label_;
  std::vector<std::unique_ptr<Chunk>> chunks_;
  std::array<std::vector<uint64_t>, kNumGateTypes> type_index_;
  std::atomic<uint64_t> next_id_{1};
  std::atomic<uint64_t> version_{0};
  std::atomic<uint32_t> next_txn_{1};

  mutable std::shared_mutex latch_;
  mutable std::mutex lock_mtx_;
};

// A single transaction: non-blocking all-or-nothing row locks, a private
// copy-on-write overlay, atomic publish at commit.
class Transaction : public GateView {
 public:
  ~Transaction();
  Transaction(Transaction &&other) noexcept;
  Transaction(const Transaction &) = delete;
  Transaction &operator=(const Transaction &) = delete;

  uint32_t id() const { return txn_id_; }
  bool active() const { return active_; }
  bool holds(uint64_t id) const { return held_.count(id) > 0; }

  // All-or-nothing try-lock. On failure nothing is acquired and the caller
  // is expected to skip the candidate.
  bool lock(std::span<const uint64_t> ids);
  bool lock(std::initializer_list<uint64_t> ids) {
    return lock(std::span<const uint64_t>(ids.begin(), ids.size()));
  }

  // Overlay view: this transaction's pending state.
  std::optional<GateRecord> get(uint64_t id) const override;

  // Splice a new gate between each adjacent (from, to) pair, one pair per
  // wire slot. Returns the new id; the new row is implicitly locked.
  uint64_t insert(GateType type, double param,
                  std::span<const SplicePoint> splices);
  // Remove a gate; for each wire its predecessor and successor are linked
  // directly. The gate and all linked neighbors must be locked.
  void erase(uint64_t id);
  void set_param(uint64_t id, double param);
  // Swap a gate with its wire successor on the given slot. The two gates
  // must share exactly that one wire.
  void swap_adjacent(uint64_t id, int slot);
  // Reverse a CNOT's control/target orientation in place, fixing up the
  // postfixes of all neighbor links.
  void swap_cnot_orientation(uint64_t id);

  void commit();
  void abort();

 private:
  friend class CircuitTable;
  Transaction(CircuitTable *table, uint32_t txn_id);

  GateRecord &mut(uint64_t id);  // copy-on-write into the overlay
  void require_lock(uint64_t id) const;
  void release_locks();
  void splice_out_wire(uint64_t id, int slot);

  CircuitTable *table_ = nullptr;
  uint32_t txn_id_ = 0;
  bool active_ = false;
  std::unordered_set<uint64_t> held_;
  std::unordered_map<uint64_t, GateRecord> written_;
  std::unordered_set<uint64_t> deleted_;
  std::vector<uint64_t> inserted_;
};

// create_circuit: num_qubits In rows linked directly to matching Out rows.
CircuitTable create_circuit(const std::string &label, int num_qubits);

// Topologically ordered reconstruction with qubit assignment. The k-th In
// row (by id order) becomes qubit k; indices propagate along links.
Reconstruction reconstruct(const CircuitTable &table);

// Streaming variant: emits the reconstruction in fixed-size batches and can
// resume exactly where it stopped.
class ReconstructCursor {
 public:
  explicit ReconstructCursor(const CircuitTable &table);
  int num_qubits() const { return num_qubits_; }
  bool done() const;
  std::vector<ReconGate> next_batch(size_t batch_size);
  // Rows visited so far (In/Out included); anything short of the snapshot
  // size at done() means the link structure was cyclic.
  size_t rows_processed() const { return processed_; }
  size_t rows_total() const { return total_; }

 private:
  const CircuitTable &table_;
  int num_qubits_ = 0;
  size_t processed_ = 0;
  size_t total_ = 0;
  // Kahn state
  std::unordered_map<uint64_t, int> pending_in_;
  std::unordered_map<uint64_t, std::array<int, 3>> wire_in_;
  std::vector<uint64_t> ready_;  // min-heap by id
  void push_ready(uint64_t id);
  uint64_t pop_ready();
};

// Streamed batched insertion of a gate sequence; memory high-water mark is
// one batch. Returns the number of gates inserted.
size_t insert_batch(CircuitTable &table, std::span<const GateSpec> gates,
                    size_t batch_size);

// Peak number of in-flight GateSpec records held by batching buffers
// (insert_batch and the transpile pipeline). Test instrumentation.
std::atomic<int64_t> &batch_live_records();
std::atomic<int64_t> &batch_peak_records();
void reset_batch_accounting();

}  // namespace qrw
