#include "qrw/gate.hpp"

#include <cmath>

namespace qrw {

int arity(GateType t) {
  switch (t) {
    case GateType::CNOT:
      return 2;
    case GateType::Toffoli:
    case GateType::CSWAP:
      return 3;
    default:
      return 1;
  }
}

bool is_rotation(GateType t) { return t == GateType::Rx || t == GateType::Rz; }

bool is_single_qubit(GateType t) { return arity(t) == 1; }

bool is_z_diagonal(GateType t) {
  switch (t) {
    case GateType::Z:
    case GateType::S:
    case GateType::Sdg:
    case GateType::T:
    case GateType::Tdg:
    case GateType::Rz:
      return true;
    default:
      return false;
  }
}

bool is_x_axis(GateType t) { return t == GateType::X || t == GateType::Rx; }

GateType inverse_type(GateType t) {
  switch (t) {
    case GateType::S:
      return GateType::Sdg;
    case GateType::Sdg:
      return GateType::S;
    case GateType::T:
      return GateType::Tdg;
    case GateType::Tdg:
      return GateType::T;
    default:
      return t;
  }
}

std::string_view gate_type_name(GateType t) {
  switch (t) {
    case GateType::In:
      return "In";
    case GateType::Out:
      return "Out";
    case GateType::H:
      return "H";
    case GateType::X:
      return "X";
    case GateType::Z:
      return "Z";
    case GateType::S:
      return "S";
    case GateType::Sdg:
      return "Sdg";
    case GateType::T:
      return "T";
    case GateType::Tdg:
      return "Tdg";
    case GateType::Rx:
      return "Rx";
    case GateType::Rz:
      return "Rz";
    case GateType::CNOT:
      return "CNOT";
    case GateType::Toffoli:
      return "Toffoli";
    case GateType::CSWAP:
      return "CSWAP";
  }
  return "?";
}

std::optional<GateType> gate_type_from_name(std::string_view name) {
  for (int i = 0; i < kNumGateTypes; i++) {
    auto t = static_cast<GateType>(i);
    if (gate_type_name(t) == name) return t;
  }
  return std::nullopt;
}

uint8_t slot_postfix(GateType t, int slot) {
  switch (arity(t)) {
    case 1:
      return 0;
    case 2:
      // slot 0 = control, slot 1 = target
      return slot == 0 ? 0 : 1;
    default:
      // slot 0 = first control, slot 1 = second control, slot 2 = target
      if (slot == 0) return 0;
      if (slot == 1) return 2;
      return 1;
  }
}

int slot_for_postfix(GateType t, uint8_t postfix) {
  switch (arity(t)) {
    case 1:
      return postfix == 0 ? 0 : -1;
    case 2:
      if (postfix == 0) return 0;
      if (postfix == 1) return 1;
      return -1;
    default:
      if (postfix == 0) return 0;
      if (postfix == 2) return 1;
      if (postfix == 1) return 2;
      return -1;
  }
}

double normalize_angle(double theta) {
  constexpr double period = 4.0 * M_PI;
  double r = std::fmod(theta, period);
  if (r < 0) r += period;
  return r;
}

}  // namespace qrw
