#include "qrw/partition.hpp"

#include <algorithm>
#include <unordered_map>

namespace qrw {

namespace {

// Row snapshot indexed by id; one latch acquisition instead of one per row.
struct RowSnapshot {
  std::vector<GateRecord> rows;
  std::vector<int64_t> index;  // id -> position in rows, -1 if absent

  explicit RowSnapshot(const CircuitTable &table)
      : rows(table.rows()), index(table.id_upper_bound(), -1) {
    for (size_t i = 0; i < rows.size(); i++)
      index[rows[i].id] = int64_t(i);
  }
  const GateRecord &at(uint64_t id) const { return rows[index[id]]; }
};

std::vector<Edge> edges_from(const RowSnapshot &snap,
                             const Reconstruction &recon) {
  std::vector<uint64_t> order;
  for (const GateRecord &r : snap.rows)
    if (r.type == GateType::In) order.push_back(r.id);
  std::sort(order.begin(), order.end());
  for (const ReconGate &g : recon.gates) order.push_back(g.id);

  std::vector<Edge> edges;
  edges.reserve(order.size() * 2);
  for (uint64_t id : order) {
    const GateRecord &rec = snap.at(id);
    for (int slot = 0; slot < arity(rec.type); slot++)
      if (auto n = rec.next_ref(slot)) edges.push_back({id, n->gate});
  }
  return edges;
}

}  // namespace

std::vector<Edge> build_edge_list(const CircuitTable &table) {
  // reconstruct() is the topological authority; it throws on broken links
  // and cannot terminate on a cyclic table.
  Reconstruction recon = reconstruct(table);
  return edges_from(RowSnapshot(table), recon);
}

UnionFind::UnionFind(size_t n) : parent_(n), rank_(n, 0) {
  for (size_t i = 0; i < n; i++) parent_[i] = i;
}

uint64_t UnionFind::find(uint64_t x) {
  uint64_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {  // path compression
    uint64_t next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

uint64_t UnionFind::unite(uint64_t a, uint64_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return a;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) rank_[a]++;
  return a;
}

size_t UnionFind::memory_bytes() const {
  return parent_.capacity() * sizeof(uint64_t) +
         rank_.capacity() * sizeof(uint8_t);
}

namespace {

bool counts_as_t(GateType t) {
  return t == GateType::T || t == GateType::Tdg;
}

struct RootStats {
  size_t gates = 0;
  size_t t_gates = 0;
  size_t depth_bound = 0;   // conservative upper estimate
  size_t pending_out = 0;   // members' unprocessed out-edges
  std::vector<uint64_t> members;
};

struct Builder {
  const RowSnapshot &snap;
  const PartitionConstraints &bounds;
  std::vector<Partition> out;
  uint64_t next_partition_id = 0;
  uint64_t version;
  // recon_idx[id] = position in topological order, or -1 for In/Out.
  std::vector<int64_t> recon_idx;
  const Reconstruction &recon;
  UnionFind uf;
  std::vector<size_t> out_remaining;
  std::vector<size_t> depth_end;  // longest in-partition chain ending here
  std::vector<RootStats> stats;
  std::vector<bool> tracked;

  Builder(const CircuitTable &t, const RowSnapshot &s,
          const PartitionConstraints &b, const Reconstruction &r)
      : snap(s),
        bounds(b),
        version(t.version()),
        recon_idx(t.id_upper_bound(), -1),
        recon(r),
        uf(t.id_upper_bound()),
        out_remaining(t.id_upper_bound(), 0),
        depth_end(t.id_upper_bound(), 1),
        stats(t.id_upper_bound()),
        tracked(t.id_upper_bound(), false) {
    for (size_t i = 0; i < r.gates.size(); i++)
      recon_idx[r.gates[i].id] = int64_t(i);
  }

  bool real(uint64_t id) const { return recon_idx[id] >= 0; }

  void ensure(uint64_t id) {
    if (tracked[id]) return;
    tracked[id] = true;
    RootStats &s = stats[id];
    s.gates = 1;
    s.t_gates = counts_as_t(recon.gates[recon_idx[id]].type) ? 1 : 0;
    s.depth_bound = 1;
    s.pending_out = out_remaining[id];
    s.members = {id};
  }

  void consume(const Edge &e) {
    if (real(e.from)) ensure(e.from);
    if (real(e.to)) ensure(e.to);
    if (real(e.from) && real(e.to)) grow(e.from, e.to);
    if (real(e.from)) {
      uint64_t r = uf.find(e.from);
      if (--stats[r].pending_out == 0) emit(r);
    }
  }

  void grow(uint64_t u, uint64_t v) {
    uint64_t ru = uf.find(u), rv = uf.find(v);
    if (ru == rv) {
      depth_end[v] = std::max(depth_end[v], depth_end[u] + 1);
      stats[ru].depth_bound = std::max(stats[ru].depth_bound, depth_end[v]);
      return;
    }
    RootStats &a = stats[ru], &b = stats[rv];
    size_t cand_depth = std::max(a.depth_bound, b.depth_bound) + 1;
    if (a.gates + b.gates > bounds.max_gates) return;
    if (a.t_gates + b.t_gates > bounds.max_t_gates) return;
    if (cand_depth > bounds.max_depth) return;
    uint64_t root = uf.unite(ru, rv);
    uint64_t other = root == ru ? rv : ru;
    RootStats &keep = stats[root], &gone = stats[other];
    keep.gates += gone.gates;
    keep.t_gates += gone.t_gates;
    keep.pending_out += gone.pending_out;
    depth_end[v] = std::max(depth_end[v], depth_end[u] + 1);
    keep.depth_bound = std::max({keep.depth_bound, gone.depth_bound,
                                 depth_end[v]});
    if (keep.members.size() < gone.members.size())
      keep.members.swap(gone.members);
    keep.members.insert(keep.members.end(), gone.members.begin(),
                        gone.members.end());
    gone.members.clear();
    gone.members.shrink_to_fit();
  }

  void emit(uint64_t root) {
    RootStats &s = stats[root];
    std::sort(s.members.begin(), s.members.end(),
              [&](uint64_t x, uint64_t y) {
                return recon_idx[x] < recon_idx[y];
              });
    // Exact depth over the induced subgraph (members are in topo order).
    std::unordered_map<uint64_t, size_t> d;
    d.reserve(s.members.size());
    size_t exact = 0;
    bool over = false;
    for (uint64_t m : s.members) {
      size_t dm = d.count(m) ? d[m] : 1;
      d[m] = dm;
      exact = std::max(exact, dm);
      const GateRecord &rec = snap.at(m);
      for (int slot = 0; slot < arity(rec.type); slot++)
        if (auto n = rec.next_ref(slot))
          if (real(n->gate) && uf.find(n->gate) == root) {
            auto it = d.find(n->gate);
            size_t nd = std::max(it == d.end() ? size_t(1) : it->second,
                                 dm + 1);
            d[n->gate] = nd;
          }
      if (dm > bounds.max_depth) over = true;
    }
    if (!over && exact <= bounds.max_depth) {
      emit_one(s.members, exact);
    } else {
      // The conservative admission bound was loose; repack greedily in
      // topological order so every emitted piece honors all constraints.
      repack(s.members);
    }
    s.members.clear();
    s.members.shrink_to_fit();
  }

  void emit_one(const std::vector<uint64_t> &members, size_t exact_depth) {
    Partition p;
    p.partition_id = next_partition_id++;
    p.members = members;
    p.table_version = version;
    p.depth = exact_depth;
    std::vector<int> wires;
    for (uint64_t m : members) {
      const ReconGate &g = recon.gates[recon_idx[m]];
      p.member_gates.push_back(g);
      p.topo_pos.push_back(size_t(recon_idx[m]));
      if (counts_as_t(g.type)) p.t_count++;
      for (int k = 0; k < arity(g.type); k++) wires.push_back(g.qubits[k]);
    }
    p.gate_count = members.size();
    std::sort(wires.begin(), wires.end());
    wires.erase(std::unique(wires.begin(), wires.end()), wires.end());
    p.wires = std::move(wires);
    out.push_back(std::move(p));
  }

  void repack(const std::vector<uint64_t> &members) {
    std::vector<uint64_t> chunk;
    std::unordered_map<uint64_t, size_t> d;
    size_t gates = 0, ts = 0, depth = 0;
    auto flush = [&] {
      if (!chunk.empty()) emit_one(chunk, depth);
      chunk.clear();
      d.clear();
      gates = ts = depth = 0;
    };
    for (uint64_t m : members) {
      const ReconGate &g = recon.gates[recon_idx[m]];
      size_t dm = 1;
      const GateRecord &rec = snap.at(m);
      for (int slot = 0; slot < arity(rec.type); slot++)
        if (auto pr = rec.prev_ref(slot)) {
          auto it = d.find(pr->gate);
          if (it != d.end()) dm = std::max(dm, it->second + 1);
        }
      size_t nts = ts + (counts_as_t(g.type) ? 1 : 0);
      if (gates + 1 > bounds.max_gates || nts > bounds.max_t_gates ||
          std::max(depth, dm) > bounds.max_depth) {
        flush();
        dm = 1;
        nts = counts_as_t(g.type) ? 1 : 0;
      }
      chunk.push_back(m);
      d[m] = dm;
      gates = chunk.size();
      ts = nts;
      depth = std::max(depth, dm);
    }
    flush();
  }
};

}  // namespace

std::vector<Partition> partition_circuit(const CircuitTable &table,
                                         const PartitionConstraints &bounds,
                                         size_t batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  Reconstruction recon = reconstruct(table);
  RowSnapshot snap(table);
  Builder b(table, snap, bounds, recon);

  std::vector<Edge> edges = edges_from(snap, recon);
  for (const GateRecord &rec : snap.rows)
    if (b.real(rec.id)) b.out_remaining[rec.id] = arity(rec.type);
  // Consume batch by batch; open partitions carry across batch boundaries.
  for (size_t base = 0; base < edges.size(); base += batch_size) {
    size_t end = std::min(edges.size(), base + batch_size);
    for (size_t i = base; i < end; i++) b.consume(edges[i]);
  }
  return std::move(b.out);
}

std::unique_ptr<CircuitTable> extract_partition(const CircuitTable &table,
                                                const Partition &p,
                                                const std::string &label) {
  if (table.version() != p.table_version)
    throw StoreError("extract_partition: table changed since partitioning");
  std::unordered_map<int, int> local;
  for (size_t k = 0; k < p.wires.size(); k++) local[p.wires[k]] = int(k);
  std::vector<GateSpec> specs;
  specs.reserve(p.member_gates.size());
  for (const ReconGate &g : p.member_gates) {
    GateSpec s = g.spec();
    for (int k = 0; k < arity(s.type); k++) s.qubits[k] = local[s.qubits[k]];
    specs.push_back(s);
  }
  return std::make_unique<CircuitTable>(label, int(p.wires.size()),
                                        std::span<const GateSpec>(specs));
}

std::unique_ptr<CircuitTable> stitch_partitions(
    const std::vector<Partition> &parts, int num_qubits,
    const std::string &label) {
  // Partitions interleave in general (the quotient graph need not be
  // acyclic), so stitching merges member streams by the global topological
  // position each ReconGate kept from the original circuit.
  std::vector<std::pair<size_t, const ReconGate *>> all;
  for (const Partition &p : parts)
    for (size_t k = 0; k < p.member_gates.size(); k++)
      all.push_back({p.topo_pos[k], &p.member_gates[k]});
  std::sort(all.begin(), all.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });
  std::vector<GateSpec> specs;
  specs.reserve(all.size());
  for (const auto &[pos, g] : all) specs.push_back(g->spec());
  return std::make_unique<CircuitTable>(label, num_qubits,
                                        std::span<const GateSpec>(specs));
}

}  // namespace qrw
