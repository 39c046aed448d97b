#include "qrw/templates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qrw {

namespace {

void finalize_locks(std::vector<uint64_t> &locks) {
  std::sort(locks.begin(), locks.end());
  locks.erase(std::unique(locks.begin(), locks.end()), locks.end());
}

bool angle_is_identity(double theta) {
  double t = normalize_angle(theta);
  return t < kAngleTol || 4.0 * M_PI - t < kAngleTol;
}

// --- rule a: U followed by U^dagger on the same wire cancels -------------

const std::vector<GateType> kInversePairAnchors = {
    GateType::H, GateType::X, GateType::Z,  GateType::S,
    GateType::Sdg, GateType::T, GateType::Tdg};

class CancelPair : public RewriteTemplate {
 public:
  std::string name() const override { return "a"; }
  std::vector<GateType> index_types() const override {
    return kInversePairAnchors;
  }
  std::optional<RewritePlan> plan(const GateView &view, uint64_t anchor,
                                  std::mt19937_64 *) const override {
    auto g = view.get(anchor);
    if (!g || !is_single_qubit(g->type) || is_rotation(g->type)) return {};
    if (g->type == GateType::In || g->type == GateType::Out) return {};
    auto succ_ref = g->next_ref(0);
    if (!succ_ref) return {};
    auto h = view.get(succ_ref->gate);
    if (!h || h->type != inverse_type(g->type)) return {};
    uint64_t h_id = h->id;
    RewritePlan p;
    p.locks = {g->prev_ref(0)->gate, anchor, h_id, h->next_ref(0)->gate};
    finalize_locks(p.locks);
    p.apply = [anchor, h_id](Transaction &txn) {
      txn.erase(anchor);
      txn.erase(h_id);
    };
    return p;
  }
};

class InsertPair : public RewriteTemplate {
 public:
  std::string name() const override { return "a-rev"; }
  std::vector<GateType> index_types() const override {
    std::vector<GateType> all;
    for (int i = 0; i < kNumGateTypes; i++) {
      auto t = static_cast<GateType>(i);
      if (t != GateType::Out) all.push_back(t);
    }
    return all;
  }
  std::optional<RewritePlan> plan(const GateView &view, uint64_t anchor,
                                  std::mt19937_64 *rng) const override {
    auto g = view.get(anchor);
    if (!g || g->next[0] == kNullLink) return {};
    static const GateType choices[] = {GateType::H, GateType::X, GateType::Z,
                                       GateType::S, GateType::T};
    GateType t = rng ? choices[(*rng)() % 5] : GateType::H;
    PortRef from = g->self_ref(0);
    PortRef to = *g->next_ref(0);
    RewritePlan p;
    p.locks = {anchor, to.gate};
    finalize_locks(p.locks);
    p.apply = [from, to, t](Transaction &txn) {
      SplicePoint sp{from, to};
      uint64_t first = txn.insert(t, 0, {&sp, 1});
      SplicePoint sp2{PortRef{first, 0}, to};
      txn.insert(inverse_type(t), 0, {&sp2, 1});
    };
    return p;
  }
};

// --- rule b: two consecutive CNOTs with matching orientation -------------

class CnotCancel : public RewriteTemplate {
 public:
  std::string name() const override { return "b"; }
  std::vector<GateType> index_types() const override {
    return {GateType::CNOT};
  }
  std::optional<RewritePlan> plan(const GateView &view, uint64_t anchor,
                                  std::mt19937_64 *) const override {
    auto g = view.get(anchor);
    if (!g || g->type != GateType::CNOT) return {};
    auto n0 = g->next_ref(0), n1 = g->next_ref(1);
    if (n0->gate != n1->gate) return {};
    if (n0->postfix != 0 || n1->postfix != 1) return {};  // orientation
    auto h = view.get(n0->gate);
    if (!h || h->type != GateType::CNOT) return {};
    uint64_t h_id = h->id;
    RewritePlan p;
    p.locks = {g->prev_ref(0)->gate, g->prev_ref(1)->gate, anchor, h_id,
               h->next_ref(0)->gate, h->next_ref(1)->gate};
    finalize_locks(p.locks);
    p.apply = [anchor, h_id](Transaction &txn) {
      txn.erase(anchor);
      txn.erase(h_id);
    };
    return p;
  }
};

class CnotDuplicate : public RewriteTemplate {
 public:
  std::string name() const override { return "b-rev"; }
  std::vector<GateType> index_types() const override {
    return {GateType::CNOT};
  }
  std::optional<RewritePlan> plan(const GateView &view, uint64_t anchor,
                                  std::mt19937_64 *) const override {
    auto g = view.get(anchor);
    if (!g || g->type != GateType::CNOT) return {};
    PortRef from0 = g->self_ref(0), from1 = g->self_ref(1);
    PortRef to0 = *g->next_ref(0), to1 = *g->next_ref(1);
    RewritePlan p;
    p.locks = {anchor, to0.gate, to1.gate};
    finalize_locks(p.locks);
    p.apply = [from0, from1, to0, to1](Transaction &txn) {
      SplicePoint sp[2] = {{from0, to0}, {from1, to1}};
      uint64_t first = txn.insert(GateType::CNOT, 0, sp);
      SplicePoint sp2[2] = {{PortRef{first, 0}, to0}, {PortRef{first, 1}, to1}};
      txn.insert(GateType::CNOT, 0, sp2);
    };
    return p;
  }
};

// --- rules c/d: commute a 1q gate past a CNOT control/target -------------

class CommuteThroughCnot : public RewriteTemplate {
 public:
  CommuteThroughCnot(std::string name, uint8_t cnot_postfix, bool reverse)
      : name_(std::move(name)), postfix_(cnot_postfix), reverse_(reverse) {}

  std::string name() const override { return name_; }
  std::vector<GateType> index_types() const override {
    if (postfix_ == 0)
      return {GateType::Z,  GateType::S,  GateType::Sdg,
              GateType::T,  GateType::Tdg, GateType::Rz};
    return {GateType::X, GateType::Rx};
  }
  std::optional<RewritePlan> plan(const GateView &view, uint64_t anchor,
                                  std::mt19937_64 *) const override {
    auto g = view.get(anchor);
    if (!g) return {};
    bool kind_ok = postfix_ == 0 ? is_z_diagonal(g->type) : is_x_axis(g->type);
    if (!kind_ok) return {};
    // forward: rotation sits before the CNOT wire; reverse: after it.
    auto cref = reverse_ ? g->prev_ref(0) : g->next_ref(0);
    if (!cref || cref->postfix != postfix_) return {};
    auto c = view.get(cref->gate);
    if (!c || c->type != GateType::CNOT) return {};
    int c_slot = slot_for_postfix(GateType::CNOT, postfix_);
    RewritePlan p;
    if (!reverse_) {
      p.locks = {g->prev_ref(0)->gate, anchor, c->id,
                 c->next_ref(c_slot)->gate};
      uint64_t a = anchor;
      p.apply = [a](Transaction &txn) { txn.swap_adjacent(a, 0); };
    } else {
      p.locks = {c->prev_ref(c_slot)->gate, c->id, anchor,
                 g->next_ref(0)->gate};
      uint64_t c_id = c->id;
      int slot = c_slot;
      p.apply = [c_id, slot](Transaction &txn) {
        txn.swap_adjacent(c_id, slot);
      };
    }
    finalize_locks(p.locks);
    return p;
  }

 private:
  std::string name_;
  uint8_t postfix_;
  bool reverse_;
};

// --- rules e/f: merge same-axis rotations --------------------------------

class RotationMerge : public RewriteTemplate {
 public:
  RotationMerge(std::string name, GateType axis)
      : name_(std::move(name)), axis_(axis) {}
  std::string name() const override { return name_; }
  std::vector<GateType> index_types() const override { return {axis_}; }
  std::optional<RewritePlan> plan(const GateView &view, uint64_t anchor,
                                  std::mt19937_64 *) const override {
    auto g = view.get(anchor);
    if (!g || g->type != axis_) return {};
    auto succ_ref = g->next_ref(0);
    auto h = view.get(succ_ref->gate);
    if (!h || h->type != axis_) return {};
    double merged = normalize_angle(g->param + h->param);
    uint64_t h_id = h->id;
    RewritePlan p;
    p.locks = {g->prev_ref(0)->gate, anchor, h_id, h->next_ref(0)->gate};
    finalize_locks(p.locks);
    if (angle_is_identity(merged)) {
      p.apply = [anchor, h_id](Transaction &txn) {
        txn.erase(anchor);
        txn.erase(h_id);
      };
    } else {
      p.apply = [anchor, h_id, merged](Transaction &txn) {
        txn.set_param(anchor, merged);
        txn.erase(h_id);
      };
    }
    return p;
  }

 private:
  std::string name_;
  GateType axis_;
};

class RotationSplit : public RewriteTemplate {
 public:
  RotationSplit(std::string name, GateType axis)
      : name_(std::move(name)), axis_(axis) {}
  std::string name() const override { return name_; }
  std::vector<GateType> index_types() const override { return {axis_}; }
  std::optional<RewritePlan> plan(const GateView &view, uint64_t anchor,
                                  std::mt19937_64 *) const override {
    auto g = view.get(anchor);
    if (!g || g->type != axis_) return {};
    double half = g->param / 2;
    PortRef from = g->self_ref(0);
    PortRef to = *g->next_ref(0);
    GateType axis = axis_;
    RewritePlan p;
    p.locks = {anchor, to.gate};
    finalize_locks(p.locks);
    p.apply = [anchor, from, to, half, axis](Transaction &txn) {
      txn.set_param(anchor, half);
      SplicePoint sp{from, to};
      txn.insert(axis, half, {&sp, 1});
    };
    return p;
  }

 private:
  std::string name_;
  GateType axis_;
};

// --- rule g: H-surrounded CNOT reversal ----------------------------------

class CnotReverse : public RewriteTemplate {
 public:
  std::string name() const override { return "g"; }
  std::vector<GateType> index_types() const override { return {GateType::H}; }
  std::vector<uint64_t> anchors_for(const GateView &view,
                                    uint64_t hit) const override {
    auto h = view.get(hit);
    if (!h || h->type != GateType::H) return {};
    std::vector<uint64_t> anchors;
    if (auto n = h->next_ref(0)) {
      auto c = view.get(n->gate);
      if (c && c->type == GateType::CNOT) anchors.push_back(n->gate);
    }
    if (auto p = h->prev_ref(0)) {
      auto c = view.get(p->gate);
      if (c && c->type == GateType::CNOT) anchors.push_back(p->gate);
    }
    return anchors;
  }
  std::optional<RewritePlan> plan(const GateView &view, uint64_t anchor,
                                  std::mt19937_64 *) const override {
    auto c = view.get(anchor);
    if (!c || c->type != GateType::CNOT) return {};
    std::array<uint64_t, 4> hs;
    std::array<PortRef, 4> refs = {*c->prev_ref(0), *c->prev_ref(1),
                                   *c->next_ref(0), *c->next_ref(1)};
    RewritePlan p;
    p.locks.push_back(anchor);
    for (int k = 0; k < 4; k++) {
      auto h = view.get(refs[k].gate);
      if (!h || h->type != GateType::H) return {};
      hs[k] = h->id;
      p.locks.push_back(h->id);
      // the H rows get erased, so their outer neighbors are touched too
      auto outer = k < 2 ? h->prev_ref(0) : h->next_ref(0);
      p.locks.push_back(outer->gate);
    }
    finalize_locks(p.locks);
    uint64_t a = anchor;
    p.apply = [a, hs](Transaction &txn) {
      for (uint64_t h : hs) txn.erase(h);
      txn.swap_cnot_orientation(a);
    };
    return p;
  }
};

class CnotReverseRev : public RewriteTemplate {
 public:
  std::string name() const override { return "g-rev"; }
  std::vector<GateType> index_types() const override {
    return {GateType::CNOT};
  }
  std::optional<RewritePlan> plan(const GateView &view, uint64_t anchor,
                                  std::mt19937_64 *) const override {
    auto c = view.get(anchor);
    if (!c || c->type != GateType::CNOT) return {};
    RewritePlan p;
    p.locks = {anchor, c->prev_ref(0)->gate, c->prev_ref(1)->gate,
               c->next_ref(0)->gate, c->next_ref(1)->gate};
    finalize_locks(p.locks);
    uint64_t a = anchor;
    p.apply = [a](Transaction &txn) {
      txn.swap_cnot_orientation(a);
      for (int k = 0; k < 2; k++) {
        auto c_now = txn.get(a);
        SplicePoint before{*c_now->prev_ref(k), PortRef{a, slot_postfix(GateType::CNOT, k)}};
        txn.insert(GateType::H, 0, {&before, 1});
        c_now = txn.get(a);
        SplicePoint after{PortRef{a, slot_postfix(GateType::CNOT, k)},
                          *c_now->next_ref(k)};
        txn.insert(GateType::H, 0, {&after, 1});
      }
    };
    return p;
  }
};

// --- Toffoli / CSWAP decomposition ---------------------------------------

class Decompose3Q : public RewriteTemplate {
 public:
  Decompose3Q(std::string name, GateType target) : name_(std::move(name)), target_(target) {}
  std::string name() const override { return name_; }
  std::vector<GateType> index_types() const override { return {target_}; }
  std::optional<RewritePlan> plan(const GateView &view, uint64_t anchor,
                                  std::mt19937_64 *) const override {
    auto g = view.get(anchor);
    if (!g || g->type != target_) return {};
    RewritePlan p;
    p.locks.push_back(anchor);
    for (int k = 0; k < 3; k++) {
      p.locks.push_back(g->prev_ref(k)->gate);
      p.locks.push_back(g->next_ref(k)->gate);
    }
    finalize_locks(p.locks);
    uint64_t a = anchor;
    GateType t = target_;
    std::array<PortRef, 3> head = {*g->prev_ref(0), *g->prev_ref(1),
                                   *g->prev_ref(2)};
    std::array<PortRef, 3> tail = {*g->next_ref(0), *g->next_ref(1),
                                   *g->next_ref(2)};
    p.apply = [a, t, head, tail](Transaction &txn) {
      txn.erase(a);
      std::array<PortRef, 3> cur = head;
      auto net = t == GateType::Toffoli ? toffoli_clifford_t(0, 1, 2)
                                        : cswap_clifford_t(0, 1, 2);
      for (const GateSpec &gs : net) {
        int n = arity(gs.type);
        std::vector<SplicePoint> sp;
        for (int k = 0; k < n; k++)
          sp.push_back({cur[gs.qubits[k]], tail[gs.qubits[k]]});
        uint64_t id = txn.insert(gs.type, gs.param, sp);
        for (int k = 0; k < n; k++)
          cur[gs.qubits[k]] = PortRef{id, slot_postfix(gs.type, k)};
      }
    };
    return p;
  }

 private:
  std::string name_;
  GateType target_;
};

}  // namespace

std::vector<GateSpec> toffoli_clifford_t(int a, int b, int c) {
  auto g1 = [](GateType t, int q) {
    GateSpec g;
    g.type = t;
    g.qubits = {q, 0, 0};
    return g;
  };
  auto cx = [](int ctrl, int tgt) {
    GateSpec g;
    g.type = GateType::CNOT;
    g.qubits = {ctrl, tgt, 0};
    return g;
  };
  return {
      g1(GateType::H, c),   cx(b, c), g1(GateType::Tdg, c), cx(a, c),
      g1(GateType::T, c),   cx(b, c), g1(GateType::Tdg, c), cx(a, c),
      g1(GateType::T, b),   g1(GateType::T, c), g1(GateType::H, c),
      cx(a, b),             g1(GateType::T, a), g1(GateType::Tdg, b),
      cx(a, b),
  };
}

std::vector<GateSpec> cswap_clifford_t(int ctrl, int t1, int t2) {
  GateSpec pre;
  pre.type = GateType::CNOT;
  pre.qubits = {t2, t1, 0};
  std::vector<GateSpec> net = {pre};
  auto tof = toffoli_clifford_t(ctrl, t1, t2);
  net.insert(net.end(), tof.begin(), tof.end());
  net.push_back(pre);
  return net;
}

ApplyResult try_rewrite(CircuitTable &table, const RewriteTemplate &tmpl,
                        uint64_t anchor, std::mt19937_64 &rng) {
  std::mt19937_64 rng_replay = rng;
  auto p1 = tmpl.plan(table, anchor, &rng);
  if (!p1) return {};
  ApplyResult res;
  res.matched = true;
  Transaction txn = table.begin();
  if (!txn.lock(p1->locks)) {
    txn.abort();
    res.lock_failed = true;
    return res;
  }
  auto p2 = tmpl.plan(txn, anchor, &rng_replay);
  if (!p2 || p2->locks != p1->locks) {
    // the site changed between matching and locking; treat as a lost race
    txn.abort();
    res.lock_failed = true;
    return res;
  }
  p2->apply(txn);
  txn.commit();
  res.applied = true;
  return res;
}

namespace {

const std::vector<std::unique_ptr<RewriteTemplate>> &registry() {
  static const auto reg = [] {
    std::vector<std::unique_ptr<RewriteTemplate>> v;
    v.push_back(std::make_unique<CancelPair>());
    v.push_back(std::make_unique<InsertPair>());
    v.push_back(std::make_unique<CnotCancel>());
    v.push_back(std::make_unique<CnotDuplicate>());
    v.push_back(std::make_unique<CommuteThroughCnot>("c", 0, false));
    v.push_back(std::make_unique<CommuteThroughCnot>("c-rev", 0, true));
    v.push_back(std::make_unique<CommuteThroughCnot>("d", 1, false));
    v.push_back(std::make_unique<CommuteThroughCnot>("d-rev", 1, true));
    v.push_back(std::make_unique<RotationMerge>("e", GateType::Rx));
    v.push_back(std::make_unique<RotationSplit>("e-rev", GateType::Rx));
    v.push_back(std::make_unique<RotationMerge>("f", GateType::Rz));
    v.push_back(std::make_unique<RotationSplit>("f-rev", GateType::Rz));
    v.push_back(std::make_unique<CnotReverse>());
    v.push_back(std::make_unique<CnotReverseRev>());
    v.push_back(std::make_unique<Decompose3Q>("toffoli", GateType::Toffoli));
    v.push_back(std::make_unique<Decompose3Q>("cswap", GateType::CSWAP));
    return v;
  }();
  return reg;
}

}  // namespace

const RewriteTemplate *find_template(const std::string &name) {
  for (const auto &t : registry())
    if (t->name() == name) return t.get();
  return nullptr;
}

std::vector<const RewriteTemplate *> all_templates() {
  std::vector<const RewriteTemplate *> out;
  for (const auto &t : registry()) out.push_back(t.get());
  return out;
}

std::vector<const RewriteTemplate *> parse_template_list(
    const std::string &names) {
  std::vector<const RewriteTemplate *> out;
  std::stringstream ss(names);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const RewriteTemplate *t = find_template(item);
    if (!t) throw std::runtime_error("unknown rewrite rule '" + item + "'");
    out.push_back(t);
  }
  return out;
}

}  // namespace qrw
