#include "qrw/table.hpp"

#include <algorithm>
#include <cassert>

namespace qrw {

namespace {

std::atomic<int64_t> g_batch_live{0};
std::atomic<int64_t> g_batch_peak{0};

void batch_acquire(int64_t n) {
  int64_t live = g_batch_live.fetch_add(n) + n;
  int64_t peak = g_batch_peak.load();
  while (live > peak && !g_batch_peak.compare_exchange_weak(peak, live)) {
  }
}

void batch_release(int64_t n) { g_batch_live.fetch_sub(n); }

}  // namespace

std::atomic<int64_t> &batch_live_records() { return g_batch_live; }
std::atomic<int64_t> &batch_peak_records() { return g_batch_peak; }
void reset_batch_accounting() {
  g_batch_live = 0;
  g_batch_peak = 0;
}

// ---------------------------------------------------------------------------
// CircuitTable

CircuitTable::CircuitTable(std::string label, int num_qubits)
    : label_(std::move(label)) {
  if (num_qubits < 0) throw StoreError("negative qubit count");
  if (num_qubits == 0) return;
  std::unique_lock lk(latch_);
  std::vector<uint64_t> in_ids, out_ids;
  for (int k = 0; k < num_qubits; k++) in_ids.push_back(allocate_id());
  for (int k = 0; k < num_qubits; k++) out_ids.push_back(allocate_id());
  for (int k = 0; k < num_qubits; k++) {
    Slot &in = slot_for_write(in_ids[k]);
    in.rec = GateRecord{};
    in.rec.id = in_ids[k];
    in.rec.type = GateType::In;
    in.rec.set_next(0, PortRef{out_ids[k], 0});
    in.live = true;
    index_add(in_ids[k], GateType::In);

    Slot &out = slot_for_write(out_ids[k]);
    out.rec = GateRecord{};
    out.rec.id = out_ids[k];
    out.rec.type = GateType::Out;
    out.rec.set_prev(0, PortRef{in_ids[k], 0});
    out.live = true;
    index_add(out_ids[k], GateType::Out);
  }
  version_++;
}

CircuitTable::Slot *CircuitTable::slot_ptr(uint64_t id) const {
  size_t chunk = id >> kChunkBits;
  if (chunk >= chunks_.size() || !chunks_[chunk]) return nullptr;
  return &chunks_[chunk]->slots[id & (kChunkSize - 1)];
}

CircuitTable::Slot &CircuitTable::slot_for_write(uint64_t id) {
  size_t chunk = id >> kChunkBits;
  if (chunk >= chunks_.size()) chunks_.resize(chunk + 1);
  if (!chunks_[chunk]) chunks_[chunk] = std::make_unique<Chunk>();
  return chunks_[chunk]->slots[id & (kChunkSize - 1)];
}

void CircuitTable::index_add(uint64_t id, GateType t) {
  auto &bucket = type_index_[static_cast<size_t>(t)];
  Slot *s = slot_ptr(id);
  s->type_pos = static_cast<uint32_t>(bucket.size());
  bucket.push_back(id);
}

void CircuitTable::index_remove(uint64_t id) {
  Slot *s = slot_ptr(id);
  auto &bucket = type_index_[static_cast<size_t>(s->rec.type)];
  uint32_t pos = s->type_pos;
  assert(pos < bucket.size() && bucket[pos] == id);
  uint64_t moved = bucket.back();
  bucket[pos] = moved;
  bucket.pop_back();
  if (moved != id) slot_ptr(moved)->type_pos = pos;
}

int CircuitTable::num_qubits() const {
  std::shared_lock lk(latch_);
  return static_cast<int>(type_index_[static_cast<size_t>(GateType::In)].size());
}

std::optional<GateRecord> CircuitTable::get(uint64_t id) const {
  std::shared_lock lk(latch_);
  const Slot *s = slot_ptr(id);
  if (!s || !s->live) return std::nullopt;
  return s->rec;
}

std::optional<GateRecord> CircuitTable::select_random_by_type(
    GateType t, std::mt19937_64 &rng) const {
  std::shared_lock lk(latch_);
  const auto &bucket = type_index_[static_cast<size_t>(t)];
  if (bucket.empty()) return std::nullopt;
  std::uniform_int_distribution<size_t> dist(0, bucket.size() - 1);
  return slot_ptr(bucket[dist(rng)])->rec;
}

size_t CircuitTable::size() const {
  std::shared_lock lk(latch_);
  size_t total = 0;
  for (const auto &bucket : type_index_) total += bucket.size();
  return total;
}

size_t CircuitTable::count_of_type(GateType t) const {
  std::shared_lock lk(latch_);
  return type_index_[static_cast<size_t>(t)].size();
}

std::vector<uint64_t> CircuitTable::ids_of_type(GateType t) const {
  std::shared_lock lk(latch_);
  return type_index_[static_cast<size_t>(t)];
}

std::vector<uint64_t> CircuitTable::all_ids() const {
  std::shared_lock lk(latch_);
  std::vector<uint64_t> ids;
  for (const auto &bucket : type_index_)
    ids.insert(ids.end(), bucket.begin(), bucket.end());
  std::sort(ids.begin(), ids.end());
  return ids;
}

Transaction CircuitTable::begin() {
  return Transaction(this, next_txn_.fetch_add(1));
}

void CircuitTable::append_gates(std::span<const GateSpec> gates) {
  std::unique_lock lk(latch_);
  auto &outs = type_index_[static_cast<size_t>(GateType::Out)];
  std::vector<uint64_t> out_by_wire(outs.begin(), outs.end());
  std::sort(out_by_wire.begin(), out_by_wire.end());
  int nq = static_cast<int>(out_by_wire.size());

  for (const GateSpec &g : gates) {
    int n = arity(g.type);
    for (int k = 0; k < n; k++) {
      if (g.qubits[k] < 0 || g.qubits[k] >= nq)
        throw StoreError("gate qubit out of range");
      for (int j = 0; j < k; j++)
        if (g.qubits[j] == g.qubits[k])
          throw StoreError("gate wires must be distinct");
    }
    uint64_t id = allocate_id();
    Slot &s = slot_for_write(id);
    s.rec = GateRecord{};
    s.rec.id = id;
    s.rec.type = g.type;
    s.rec.param = is_rotation(g.type) ? g.param : 0.0;
    for (int k = 0; k < n; k++) {
      uint64_t out_id = out_by_wire[g.qubits[k]];
      Slot &out = *slot_ptr(out_id);
      PortRef pred = decode_link(out.rec.prev[0]);
      PortRef self{id, slot_postfix(g.type, k)};
      // pred.gate -> new gate -> Out
      Slot &p = *slot_ptr(pred.gate);
      p.rec.next[slot_for_postfix(p.rec.type, pred.postfix)] =
          encode_link(self);
      s.rec.prev[k] = encode_link(pred);
      s.rec.set_next(k, PortRef{out_id, 0});
      out.rec.prev[0] = encode_link(self);
    }
    s.live = true;
    index_add(id, g.type);
  }
  version_++;
}

CircuitTable::CircuitTable(std::string label, int num_qubits,
                           std::span<const GateSpec> gates)
    : CircuitTable(std::move(label), num_qubits) {
  append_gates(gates);
}

std::vector<GateRecord> CircuitTable::rows() const {
  std::shared_lock lk(latch_);
  std::vector<GateRecord> out;
  uint64_t top = next_id_.load();
  for (uint64_t id = 1; id < top; id++) {
    const Slot *s = slot_ptr(id);
    if (s && s->live) out.push_back(s->rec);
  }
  return out;
}

std::unique_ptr<CircuitTable> CircuitTable::from_rows(
    std::string label, std::vector<GateRecord> rows) {
  auto table = std::make_unique<CircuitTable>(std::move(label));
  std::unique_lock lk(table->latch_);
  uint64_t max_id = 0;
  for (const GateRecord &r : rows) {
    if (r.id == 0) throw StoreError("row id 0 is reserved");
    Slot &s = table->slot_for_write(r.id);
    if (s.live) throw StoreError("duplicate row id " + std::to_string(r.id));
    s.rec = r;
    s.live = true;
    max_id = std::max(max_id, r.id);
  }
  table->next_id_ = max_id + 1;
  for (const GateRecord &r : rows) table->index_add(r.id, r.type);
  table->version_++;
  return table;
}

size_t insert_batch(CircuitTable &table, std::span<const GateSpec> gates,
                    size_t batch_size) {
  if (batch_size < 1) throw StoreError("batch_size must be >= 1");
  size_t done = 0;
  std::vector<GateSpec> buf;
  while (done < gates.size()) {
    size_t n = std::min(batch_size, gates.size() - done);
    batch_acquire(static_cast<int64_t>(n));
    buf.assign(gates.begin() + done, gates.begin() + done + n);
    table.append_gates(buf);
    buf.clear();
    buf.shrink_to_fit();
    batch_release(static_cast<int64_t>(n));
    done += n;
  }
  return done;
}

// ---------------------------------------------------------------------------
// Audit

AuditReport CircuitTable::audit() const {
  std::shared_lock lk(latch_);
  AuditReport rep;
  auto fail = [&rep](uint64_t id, std::string what) {
    rep.issues.push_back({id, std::move(what)});
  };

  size_t live_count = 0;
  std::vector<uint64_t> live_ids;
  uint64_t top = next_id_.load();
  for (uint64_t id = 1; id < top; id++) {
    const Slot *s = slot_ptr(id);
    if (!s || !s->live) continue;
    live_count++;
    live_ids.push_back(id);
    const GateRecord &r = s->rec;
    if (r.id != id) fail(id, "row id mismatch");
    int n = arity(r.type);
    for (int k = 0; k < 3; k++) {
      bool allowed = k < n;
      if (!allowed && (r.prev[k] != kNullLink || r.next[k] != kNullLink))
        fail(id, "non-null link outside arity slots");
    }
    for (int k = 0; k < n; k++) {
      bool need_prev = r.type != GateType::In;
      bool need_next = r.type != GateType::Out;
      if (need_prev && r.prev[k] == kNullLink) fail(id, "missing prev link");
      if (need_next && r.next[k] == kNullLink) fail(id, "missing next link");
      if (r.type == GateType::In && r.prev[k] != kNullLink)
        fail(id, "In gate has prev link");
      if (r.type == GateType::Out && r.next[k] != kNullLink)
        fail(id, "Out gate has next link");
    }
    // bidirectional consistency of next links
    for (int k = 0; k < n; k++) {
      if (r.next[k] == kNullLink) continue;
      PortRef ref = decode_link(r.next[k]);
      const Slot *nb = slot_ptr(ref.gate);
      if (!nb || !nb->live) {
        fail(id, "next link to dead row");
        continue;
      }
      int slot = slot_for_postfix(nb->rec.type, ref.postfix);
      if (slot < 0) {
        fail(id, "next link postfix invalid for neighbor type");
        continue;
      }
      Link back = nb->rec.prev[slot];
      if (back == kNullLink ||
          decode_link(back) != PortRef{id, slot_postfix(r.type, k)})
        fail(id, "bidirectional link mismatch");
    }
    // prev links resolve to live rows
    for (int k = 0; k < n; k++) {
      if (r.prev[k] == kNullLink) continue;
      PortRef ref = decode_link(r.prev[k]);
      const Slot *nb = slot_ptr(ref.gate);
      if (!nb || !nb->live) fail(id, "prev link to dead row");
    }
  }

  size_t ins = type_index_[static_cast<size_t>(GateType::In)].size();
  size_t outs = type_index_[static_cast<size_t>(GateType::Out)].size();
  if (ins != outs) fail(0, "In/Out row count mismatch");

  // type_index mirrors rows
  size_t indexed = 0;
  for (int ti = 0; ti < kNumGateTypes; ti++) {
    const auto &bucket = type_index_[ti];
    for (size_t pos = 0; pos < bucket.size(); pos++) {
      indexed++;
      const Slot *s = slot_ptr(bucket[pos]);
      if (!s || !s->live) {
        fail(bucket[pos], "index entry for dead row");
        continue;
      }
      if (s->rec.type != static_cast<GateType>(ti))
        fail(bucket[pos], "index bucket type mismatch");
      if (s->type_pos != pos) fail(bucket[pos], "index position mismatch");
    }
  }
  if (indexed != live_count) fail(0, "index cardinality mismatch");

  // acyclicity: Kahn over next links must consume every row
  std::unordered_map<uint64_t, int> pending;
  pending.reserve(live_ids.size());
  std::vector<uint64_t> ready;
  for (uint64_t id : live_ids) {
    const GateRecord &r = slot_ptr(id)->rec;
    int deg = 0;
    for (int k = 0; k < arity(r.type); k++)
      if (r.prev[k] != kNullLink) deg++;
    pending[id] = deg;
    if (deg == 0) ready.push_back(id);
  }
  size_t visited = 0;
  while (!ready.empty()) {
    uint64_t id = ready.back();
    ready.pop_back();
    visited++;
    const GateRecord &r = slot_ptr(id)->rec;
    for (int k = 0; k < arity(r.type); k++) {
      if (r.next[k] == kNullLink) continue;
      uint64_t nb = decode_link(r.next[k]).gate;
      auto it = pending.find(nb);
      if (it != pending.end() && --it->second == 0) ready.push_back(nb);
    }
  }
  if (visited != live_count) fail(0, "cycle detected in link structure");

  return rep;
}

// ---------------------------------------------------------------------------
// Transaction

Transaction::Transaction(CircuitTable *table, uint32_t txn_id)
    : table_(table), txn_id_(txn_id), active_(true) {}

Transaction::Transaction(Transaction &&other) noexcept
    : table_(other.table_),
      txn_id_(other.txn_id_),
      active_(other.active_),
      held_(std::move(other.held_)),
      written_(std::move(other.written_)),
      deleted_(std::move(other.deleted_)),
      inserted_(std::move(other.inserted_)) {
  other.active_ = false;
}

Transaction::~Transaction() {
  if (active_) abort();
}

bool Transaction::lock(std::span<const uint64_t> ids) {
  if (!active_) throw StoreError("transaction not active");
  std::shared_lock lk(table_->latch_);
  std::lock_guard lg(table_->lock_mtx_);
  for (uint64_t id : ids) {
    if (held_.count(id)) continue;
    const CircuitTable::Slot *s = table_->slot_ptr(id);
    if (!s || !s->live) return false;  // deleted or unpublished row
    if (s->lock_owner != 0 && s->lock_owner != txn_id_) return false;
  }
  for (uint64_t id : ids) {
    if (held_.count(id)) continue;
    const_cast<CircuitTable::Slot *>(table_->slot_ptr(id))->lock_owner =
        txn_id_;
    held_.insert(id);
  }
  return true;
}

std::optional<GateRecord> Transaction::get(uint64_t id) const {
  if (deleted_.count(id)) return std::nullopt;
  auto it = written_.find(id);
  if (it != written_.end()) return it->second;
  return table_->get(id);
}

GateRecord &Transaction::mut(uint64_t id) {
  if (deleted_.count(id)) throw StoreError("mutating deleted row");
  auto it = written_.find(id);
  if (it != written_.end()) return it->second;
  auto committed = table_->get(id);
  if (!committed) throw StoreError("mutating absent row");
  return written_.emplace(id, *committed).first->second;
}

void Transaction::require_lock(uint64_t id) const {
  if (!held_.count(id))
    throw StoreError("transaction does not hold lock on row " +
                     std::to_string(id));
}

uint64_t Transaction::insert(GateType type, double param,
                             std::span<const SplicePoint> splices) {
  if (!active_) throw StoreError("transaction not active");
  int n = arity(type);
  if (static_cast<int>(splices.size()) != n)
    throw StoreError("splice point count does not match gate arity");
  if (type == GateType::In || type == GateType::Out)
    throw StoreError("cannot insert In/Out rows");

  // validate adjacency before touching anything
  for (int k = 0; k < n; k++) {
    const SplicePoint &sp = splices[k];
    require_lock(sp.from.gate);
    require_lock(sp.to.gate);
    auto a = get(sp.from.gate);
    if (!a) throw StoreError("splice source row absent");
    int ja = slot_for_postfix(a->type, sp.from.postfix);
    if (ja < 0) throw StoreError("splice source postfix invalid");
    if (a->next[ja] != encode_link(sp.to))
      throw StoreError("splice pair not adjacent");
  }

  uint64_t id = table_->allocate_id();
  GateRecord rec;
  rec.id = id;
  rec.type = type;
  rec.param = is_rotation(type) ? param : 0.0;
  for (int k = 0; k < n; k++) {
    const SplicePoint &sp = splices[k];
    PortRef self{id, slot_postfix(type, k)};
    GateRecord &a = mut(sp.from.gate);
    int ja = slot_for_postfix(a.type, sp.from.postfix);
    a.next[ja] = encode_link(self);
    GateRecord &b = mut(sp.to.gate);
    int jb = slot_for_postfix(b.type, sp.to.postfix);
    b.prev[jb] = encode_link(self);
    rec.prev[k] = encode_link(sp.from);
    rec.next[k] = encode_link(sp.to);
  }
  written_.emplace(id, rec);
  inserted_.push_back(id);
  held_.insert(id);  // new rows are owned by this transaction
  return id;
}

void Transaction::splice_out_wire(uint64_t id, int slot) {
  auto g = get(id);
  PortRef p = decode_link(g->prev[slot]);
  PortRef s = decode_link(g->next[slot]);
  GateRecord &pr = mut(p.gate);
  pr.next[slot_for_postfix(pr.type, p.postfix)] = encode_link(s);
  GateRecord &sr = mut(s.gate);
  sr.prev[slot_for_postfix(sr.type, s.postfix)] = encode_link(p);
}

void Transaction::erase(uint64_t id) {
  if (!active_) throw StoreError("transaction not active");
  require_lock(id);
  auto g = get(id);
  if (!g) throw StoreError("erasing absent row");
  if (g->type == GateType::In || g->type == GateType::Out)
    throw StoreError("cannot erase In/Out rows");
  int n = arity(g->type);
  for (int k = 0; k < n; k++) {
    require_lock(decode_link(g->prev[k]).gate);
    require_lock(decode_link(g->next[k]).gate);
  }
  for (int k = 0; k < n; k++) splice_out_wire(id, k);

  written_.erase(id);
  auto it = std::find(inserted_.begin(), inserted_.end(), id);
  if (it != inserted_.end()) {
    inserted_.erase(it);  // net no-op: row never published
    held_.erase(id);
  } else {
    deleted_.insert(id);
  }
}

void Transaction::set_param(uint64_t id, double param) {
  if (!active_) throw StoreError("transaction not active");
  require_lock(id);
  mut(id).param = param;
}

void Transaction::swap_adjacent(uint64_t id, int slot) {
  if (!active_) throw StoreError("transaction not active");
  auto a = get(id);
  if (!a) throw StoreError("absent row");
  if (slot < 0 || slot >= arity(a->type) || a->next[slot] == kNullLink)
    throw StoreError("invalid wire slot");
  if (a->type == GateType::In) throw StoreError("cannot swap In row");
  PortRef nref = decode_link(a->next[slot]);
  auto b = get(nref.gate);
  if (b->type == GateType::Out) throw StoreError("cannot swap past Out row");
  int b_slot = slot_for_postfix(b->type, nref.postfix);
  // the pair must share exactly this one wire
  for (int k = 0; k < arity(a->type); k++) {
    if (k == slot) continue;
    if (a->next[k] != kNullLink && decode_link(a->next[k]).gate == nref.gate)
      throw StoreError("gates share more than one wire");
    if (a->prev[k] != kNullLink && decode_link(a->prev[k]).gate == nref.gate)
      throw StoreError("gates share more than one wire");
  }
  PortRef p = decode_link(a->prev[slot]);
  PortRef s = decode_link(b->next[b_slot]);
  PortRef a_self = a->self_ref(slot);
  PortRef b_self{nref.gate, nref.postfix};
  require_lock(id);
  require_lock(nref.gate);
  require_lock(p.gate);
  require_lock(s.gate);

  Link a_prev = a->prev[slot];
  Link b_next = b->next[b_slot];
  GateRecord &pr = mut(p.gate);
  pr.next[slot_for_postfix(pr.type, p.postfix)] = encode_link(b_self);
  GateRecord &br = mut(nref.gate);
  br.prev[b_slot] = a_prev;
  br.next[b_slot] = encode_link(a_self);
  GateRecord &ar = mut(id);
  ar.prev[slot] = encode_link(b_self);
  ar.next[slot] = b_next;
  GateRecord &sr = mut(s.gate);
  sr.prev[slot_for_postfix(sr.type, s.postfix)] = encode_link(a_self);
}

void Transaction::swap_cnot_orientation(uint64_t id) {
  if (!active_) throw StoreError("transaction not active");
  require_lock(id);
  auto g = get(id);
  if (!g || g->type != GateType::CNOT) throw StoreError("row is not a CNOT");
  PortRef p0 = decode_link(g->prev[0]), p1 = decode_link(g->prev[1]);
  PortRef n0 = decode_link(g->next[0]), n1 = decode_link(g->next[1]);
  for (PortRef r : {p0, p1, n0, n1}) require_lock(r.gate);

  GateRecord &gr = mut(id);
  std::swap(gr.prev[0], gr.prev[1]);
  std::swap(gr.next[0], gr.next[1]);

  auto repoint_next = [this](PortRef at, PortRef val) {
    GateRecord &r = mut(at.gate);
    r.next[slot_for_postfix(r.type, at.postfix)] = encode_link(val);
  };
  auto repoint_prev = [this](PortRef at, PortRef val) {
    GateRecord &r = mut(at.gate);
    r.prev[slot_for_postfix(r.type, at.postfix)] = encode_link(val);
  };
  repoint_next(p0, PortRef{id, 1});  // old control wire now enters the target
  repoint_next(p1, PortRef{id, 0});
  repoint_prev(n0, PortRef{id, 1});
  repoint_prev(n1, PortRef{id, 0});
}

void Transaction::commit() {
  if (!active_) throw StoreError("transaction not active");
  {
    std::unique_lock lk(table_->latch_);
    for (uint64_t id : deleted_) {
      table_->index_remove(id);
      table_->slot_ptr(id)->live = false;
    }
    for (auto &[id, rec] : written_) {
      CircuitTable::Slot &s = table_->slot_for_write(id);
      bool fresh = !s.live;
      s.rec = rec;
      if (fresh) {
        s.live = true;
        table_->index_add(id, rec.type);
      }
    }
    table_->version_++;
  }
  release_locks();
  active_ = false;
  written_.clear();
  deleted_.clear();
  inserted_.clear();
}

void Transaction::abort() {
  if (!active_) throw StoreError("transaction not active");
  release_locks();
  active_ = false;
  written_.clear();
  deleted_.clear();
  inserted_.clear();
}

void Transaction::release_locks() {
  std::shared_lock lk(table_->latch_);
  std::lock_guard lg(table_->lock_mtx_);
  for (uint64_t id : held_) {
    CircuitTable::Slot *s =
        const_cast<CircuitTable::Slot *>(table_->slot_ptr(id));
    if (s && s->lock_owner == txn_id_) s->lock_owner = 0;
  }
  held_.clear();
}

// ---------------------------------------------------------------------------
// create_circuit / reconstruction

CircuitTable create_circuit(const std::string &label, int num_qubits) {
  if (num_qubits < 1) throw StoreError("circuit needs at least one qubit");
  return CircuitTable(label, num_qubits);
}

ReconstructCursor::ReconstructCursor(const CircuitTable &table)
    : table_(table) {
  std::vector<uint64_t> in_ids = table.ids_of_type(GateType::In);
  std::sort(in_ids.begin(), in_ids.end());
  num_qubits_ = static_cast<int>(in_ids.size());

  std::vector<uint64_t> ids = table.all_ids();
  total_ = ids.size();
  pending_in_.reserve(ids.size());
  for (uint64_t id : ids) {
    auto r = table.get(id);
    int deg = 0;
    for (int k = 0; k < arity(r->type); k++)
      if (r->prev[k] != kNullLink) deg++;
    pending_in_[id] = deg;
    if (deg == 0) push_ready(id);
  }
  for (int w = 0; w < num_qubits_; w++) wire_in_[in_ids[w]] = {w, 0, 0};
}

void ReconstructCursor::push_ready(uint64_t id) {
  ready_.push_back(id);
  std::push_heap(ready_.begin(), ready_.end(), std::greater<>());
}

uint64_t ReconstructCursor::pop_ready() {
  std::pop_heap(ready_.begin(), ready_.end(), std::greater<>());
  uint64_t id = ready_.back();
  ready_.pop_back();
  return id;
}

bool ReconstructCursor::done() const { return ready_.empty(); }

std::vector<ReconGate> ReconstructCursor::next_batch(size_t batch_size) {
  std::vector<ReconGate> out;
  while (out.size() < batch_size && !ready_.empty()) {
    uint64_t id = pop_ready();
    auto r = table_.get(id);
    if (!r) throw StoreError("row vanished during reconstruction");
    int n = arity(r->type);
    auto wit = wire_in_.find(id);
    if (wit == wire_in_.end())
      throw StoreError("broken links: no wire reaches row " +
                       std::to_string(id));
    std::array<int, 3> wires = wit->second;
    wire_in_.erase(wit);
    processed_++;
    if (r->type != GateType::In && r->type != GateType::Out) {
      ReconGate g;
      g.id = id;
      g.type = r->type;
      g.param = r->param;
      g.switch_flag = r->switch_flag;
      g.qubits = wires;
      out.push_back(g);
    }
    for (int k = 0; k < n; k++) {
      if (r->next[k] == kNullLink) continue;
      PortRef ref = decode_link(r->next[k]);
      auto nb = table_.get(ref.gate);
      if (!nb)
        throw StoreError("broken links: dangling next from row " +
                         std::to_string(id));
      int slot = slot_for_postfix(nb->type, ref.postfix);
      wire_in_[ref.gate][slot] = wires[k];
      if (--pending_in_[ref.gate] == 0) push_ready(ref.gate);
    }
  }
  return out;
}

Reconstruction reconstruct(const CircuitTable &table) {
  ReconstructCursor cur(table);
  Reconstruction rec;
  rec.num_qubits = cur.num_qubits();
  while (!cur.done()) {
    auto batch = cur.next_batch(size_t{1} << 16);
    rec.gates.insert(rec.gates.end(), batch.begin(), batch.end());
  }
  if (cur.rows_processed() != cur.rows_total())
    throw StoreError("cycle detected: reconstruction did not reach all rows");
  return rec;
}

}  // namespace qrw
