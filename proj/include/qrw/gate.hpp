#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace qrw {

// In/Out are single-wire pseudo-gates marking the start/end of a qubit wire.
enum class GateType : uint8_t {
  In,
  Out,
  H,
  X,
  Z,
  S,
  Sdg,
  T,
  Tdg,
  Rx,
  Rz,
  CNOT,
  Toffoli,
  CSWAP,
};

constexpr int kNumGateTypes = 14;

int arity(GateType t);
bool is_rotation(GateType t);
bool is_single_qubit(GateType t);
// Diagonal in the computational basis (commutes with CNOT controls).
bool is_z_diagonal(GateType t);
// X-axis gates (commute with CNOT targets).
bool is_x_axis(GateType t);
// For the non-rotation gates: G * inverse_type(G) == identity.
GateType inverse_type(GateType t);

std::string_view gate_type_name(GateType t);
std::optional<GateType> gate_type_from_name(std::string_view name);

// Role code of a wire slot. 0 = control of a multi-qubit gate or the sole
// wire of a single-qubit gate, 1 = target, 2 = second control.
uint8_t slot_postfix(GateType t, int slot);
// Inverse mapping; -1 if the postfix is not valid for the type.
int slot_for_postfix(GateType t, uint8_t postfix);

// A directed link target: which gate, and which of its wire slots
// (identified by role postfix) the wire continues into.
struct PortRef {
  uint64_t gate = 0;
  uint8_t postfix = 0;

  bool operator==(const PortRef &) const = default;
};

// Links are stored in the encoded form gate_id * 3 + postfix; -1 is null.
using Link = int64_t;
constexpr Link kNullLink = -1;

inline Link encode_link(PortRef ref) {
  return static_cast<Link>(ref.gate * 3 + ref.postfix);
}
inline PortRef decode_link(Link link) {
  return PortRef{static_cast<uint64_t>(link) / 3,
                 static_cast<uint8_t>(static_cast<uint64_t>(link) % 3)};
}

// One row of a circuit table. Exactly the first arity(type) slots of
// prev/next may be non-null. The switch flag is round-tripped verbatim and
// never interpreted.
struct GateRecord {
  uint64_t id = 0;
  GateType type = GateType::In;
  double param = 0.0;
  bool switch_flag = false;
  std::array<Link, 3> prev = {kNullLink, kNullLink, kNullLink};
  std::array<Link, 3> next = {kNullLink, kNullLink, kNullLink};

  std::optional<PortRef> prev_ref(int slot) const {
    if (prev[slot] == kNullLink) return std::nullopt;
    return decode_link(prev[slot]);
  }
  std::optional<PortRef> next_ref(int slot) const {
    if (next[slot] == kNullLink) return std::nullopt;
    return decode_link(next[slot]);
  }
  void set_prev(int slot, std::optional<PortRef> ref) {
    prev[slot] = ref ? encode_link(*ref) : kNullLink;
  }
  void set_next(int slot, std::optional<PortRef> ref) {
    next[slot] = ref ? encode_link(*ref) : kNullLink;
  }
  // The PortRef naming this gate's slot from a neighbor's perspective.
  PortRef self_ref(int slot) const {
    return PortRef{id, slot_postfix(type, slot)};
  }
};

// A gate in qubit-index form, used for import/export and synthesis.
struct GateSpec {
  GateType type = GateType::H;
  double param = 0.0;
  std::array<int, 3> qubits = {0, 0, 0};

  int qubit_count() const { return arity(type); }
};

// Normalize an angle into [0, 4*pi). Rotations have period 4*pi as matrices.
double normalize_angle(double theta);

}  // namespace qrw
