#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "qrw/table.hpp"

namespace qrw {

struct ParseError : std::runtime_error {
  ParseError(const std::string &msg, int line, int col)
      : std::runtime_error(msg + " at line " + std::to_string(line) +
                           ", column " + std::to_string(col)),
        line(line),
        col(col) {}
  int line;
  int col;
};

// Native tabular text format.
// Header: id,prev_q1,prev_q2,prev_q3,type,param,switch,next_q1,next_q2,next_q3,label
// Links are serialized as gate_id*3+postfix, null as the empty field; one row
// per line, rows ordered by id. Round trips byte-exact.
std::string save_native(const CircuitTable &table);
void save_native_file(const CircuitTable &table, const std::string &path);
std::unique_ptr<CircuitTable> load_native(const std::string &text);
std::unique_ptr<CircuitTable> load_native_file(const std::string &path);

// Binary snapshot: length-prefixed records (see README for the layout).
void save_snapshot(const CircuitTable &table, const std::string &path);
std::unique_ptr<CircuitTable> load_snapshot(const std::string &path);

// OpenQASM-2 subset: qreg (single register), h, x, z, s, sdg, t, tdg,
// rx(theta), rz(theta), cx, ccx, cswap. No measurement, no classical
// registers, no includes beyond the ignored qelib1.inc.
struct QasmProgram {
  int num_qubits = 0;
  std::vector<GateSpec> gates;
};

QasmProgram parse_qasm(const std::string &text);
QasmProgram parse_qasm_file(const std::string &path);
std::string emit_qasm(const CircuitTable &table);
std::string emit_qasm(const Reconstruction &rec);

std::unique_ptr<CircuitTable> table_from_qasm(const std::string &text,
                                              const std::string &label);

// Streaming QASM source: yields gates in file order without materializing
// the whole program. Used by the ingestion pipeline.
class QasmStream {
 public:
  explicit QasmStream(std::unique_ptr<std::istream> input);
  ~QasmStream();
  int num_qubits();  // parses the prologue on first call
  // Fills up to max_gates entries; returns false when the stream is done.
  bool next(std::vector<GateSpec> &out, size_t max_gates);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qrw
