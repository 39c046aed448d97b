#include "qrw/io.hpp"

#include <cassert>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>

namespace qrw {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  assert(ec == std::errc());
  return std::string(buf, ptr);
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct QasmGateDef {
  const char *name;
  GateType type;
  bool has_param;
};

constexpr QasmGateDef kQasmGates[] = {
    {"h", GateType::H, false},        {"x", GateType::X, false},
    {"z", GateType::Z, false},        {"s", GateType::S, false},
    {"sdg", GateType::Sdg, false},    {"t", GateType::T, false},
    {"tdg", GateType::Tdg, false},    {"rx", GateType::Rx, true},
    {"rz", GateType::Rz, true},       {"cx", GateType::CNOT, false},
    {"ccx", GateType::Toffoli, false}, {"cswap", GateType::CSWAP, false},
};

const char *qasm_name(GateType t) {
  for (const auto &def : kQasmGates)
    if (def.type == t) return def.name;
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Native tabular format

static const char kNativeHeader[] =
    "id,prev_q1,prev_q2,prev_q3,type,param,switch,next_q1,next_q2,next_q3,"
    "label";

std::string save_native(const CircuitTable &table) {
  std::string out = kNativeHeader;
  out += '\n';
  for (const GateRecord &r : table.rows()) {
    out += std::to_string(r.id);
    for (int k = 0; k < 3; k++) {
      out += ',';
      if (r.prev[k] != kNullLink) out += std::to_string(r.prev[k]);
    }
    out += ',';
    out += gate_type_name(r.type);
    out += ',';
    out += format_double(r.param);
    out += ',';
    out += r.switch_flag ? '1' : '0';
    for (int k = 0; k < 3; k++) {
      out += ',';
      if (r.next[k] != kNullLink) out += std::to_string(r.next[k]);
    }
    out += ',';
    out += table.label();
    out += '\n';
  }
  return out;
}

void save_native_file(const CircuitTable &table, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << save_native(table);
}

std::unique_ptr<CircuitTable> load_native(const std::string &text) {
  size_t pos = 0;
  int line_no = 0;
  std::string label;
  std::vector<GateRecord> rows;

  auto next_line = [&](std::string_view &line) {
    if (pos >= text.size()) return false;
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    line = std::string_view(text).substr(pos, end - pos);
    pos = end + 1;
    line_no++;
    return true;
  };

  std::string_view line;
  if (!next_line(line) || line != kNativeHeader)
    throw std::runtime_error("native format: bad or missing header");

  while (next_line(line)) {
    if (line.empty()) continue;
    std::array<std::string_view, 11> fields;
    size_t start = 0, field = 0;
    for (size_t i = 0; i <= line.size(); i++) {
      if (i == line.size() || line[i] == ',') {
        if (field >= fields.size())
          throw std::runtime_error("native format: too many fields on row " +
                                   std::to_string(line_no));
        fields[field++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (field != fields.size())
      throw std::runtime_error("native format: malformed row " +
                               std::to_string(line_no));

    auto parse_u64 = [&](std::string_view s) {
      uint64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        throw std::runtime_error("native format: bad integer on row " +
                                 std::to_string(line_no));
      return v;
    };
    auto parse_link = [&](std::string_view s) -> Link {
      if (s.empty()) return kNullLink;
      return static_cast<Link>(parse_u64(s));
    };

    GateRecord r;
    r.id = parse_u64(fields[0]);
    for (int k = 0; k < 3; k++) r.prev[k] = parse_link(fields[1 + k]);
    auto type = gate_type_from_name(fields[4]);
    if (!type)
      throw std::runtime_error("native format: unknown gate type on row " +
                               std::to_string(line_no));
    r.type = *type;
    {
      double v = 0;
      auto [p, ec] =
          std::from_chars(fields[5].data(), fields[5].data() + fields[5].size(), v);
      if (ec != std::errc() || p != fields[5].data() + fields[5].size())
        throw std::runtime_error("native format: bad param on row " +
                                 std::to_string(line_no));
      r.param = v;
    }
    if (fields[6] != "0" && fields[6] != "1")
      throw std::runtime_error("native format: bad switch on row " +
                               std::to_string(line_no));
    r.switch_flag = fields[6] == "1";
    for (int k = 0; k < 3; k++) r.next[k] = parse_link(fields[7 + k]);
    if (label.empty())
      label = std::string(fields[10]);
    else if (label != fields[10])
      throw std::runtime_error("native format: mixed labels on row " +
                               std::to_string(line_no));
    rows.push_back(r);
  }
  return CircuitTable::from_rows(label, std::move(rows));
}

std::unique_ptr<CircuitTable> load_native_file(const std::string &path) {
  return load_native(read_file(path));
}

// ---------------------------------------------------------------------------
// Binary snapshot
//
// Layout: magic "QRWSNAP1", u32 label length, label bytes, u64 row count,
// then per row a u32 record length followed by the packed record
// (u64 id, u8 type, u8 switch, f64 param, 6 x i64 links).

void save_snapshot(const CircuitTable &table, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  auto put = [&out](const void *p, size_t n) {
    out.write(static_cast<const char *>(p), static_cast<std::streamsize>(n));
  };
  put("QRWSNAP1", 8);
  uint32_t llen = static_cast<uint32_t>(table.label().size());
  put(&llen, 4);
  put(table.label().data(), llen);
  auto rows = table.rows();
  uint64_t count = rows.size();
  put(&count, 8);
  for (const GateRecord &r : rows) {
    uint32_t rec_len = 8 + 1 + 1 + 8 + 6 * 8;
    put(&rec_len, 4);
    put(&r.id, 8);
    uint8_t type = static_cast<uint8_t>(r.type);
    uint8_t sw = r.switch_flag ? 1 : 0;
    put(&type, 1);
    put(&sw, 1);
    put(&r.param, 8);
    for (int k = 0; k < 3; k++) put(&r.prev[k], 8);
    for (int k = 0; k < 3; k++) put(&r.next[k], 8);
  }
}

std::unique_ptr<CircuitTable> load_snapshot(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  auto get = [&in, &path](void *p, size_t n) {
    in.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("truncated snapshot " + path);
  };
  char magic[8];
  get(magic, 8);
  if (std::memcmp(magic, "QRWSNAP1", 8) != 0)
    throw std::runtime_error("not a snapshot file: " + path);
  uint32_t llen = 0;
  get(&llen, 4);
  std::string label(llen, '\0');
  get(label.data(), llen);
  uint64_t count = 0;
  get(&count, 8);
  std::vector<GateRecord> rows;
  rows.reserve(count);
  for (uint64_t i = 0; i < count; i++) {
    uint32_t rec_len = 0;
    get(&rec_len, 4);
    if (rec_len != 8 + 1 + 1 + 8 + 6 * 8)
      throw std::runtime_error("unexpected record length in " + path);
    GateRecord r;
    get(&r.id, 8);
    uint8_t type = 0, sw = 0;
    get(&type, 1);
    get(&sw, 1);
    if (type >= kNumGateTypes)
      throw std::runtime_error("bad gate type in " + path);
    r.type = static_cast<GateType>(type);
    r.switch_flag = sw != 0;
    get(&r.param, 8);
    for (int k = 0; k < 3; k++) get(&r.prev[k], 8);
    for (int k = 0; k < 3; k++) get(&r.next[k], 8);
    rows.push_back(r);
  }
  return CircuitTable::from_rows(std::move(label), std::move(rows));
}

// ---------------------------------------------------------------------------
// QASM subset

namespace {

class QasmLexer {
 public:
  explicit QasmLexer(std::istream &in) : in_(in) {}

  int line() const { return line_; }
  int col() const { return col_; }

  void skip_space() {
    while (true) {
      int c = peek();
      if (c == '/' && peek2() == '/') {
        while (peek() != '\n' && peek() != EOF) get();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
        continue;
      }
      break;
    }
  }

  bool eof() {
    skip_space();
    return peek() == EOF;
  }

  std::string ident() {
    skip_space();
    std::string s;
    int c = peek();
    if (!std::isalpha(c) && c != '_') error("expected identifier");
    while (std::isalnum(peek()) || peek() == '_') s += static_cast<char>(get());
    return s;
  }

  bool try_symbol(char sym) {
    skip_space();
    if (peek() == sym) {
      get();
      return true;
    }
    return false;
  }

  void expect(char sym) {
    skip_space();
    if (peek() != sym)
      error(std::string("expected '") + sym + "'");
    get();
  }

  long integer() {
    skip_space();
    std::string s;
    while (std::isdigit(peek())) s += static_cast<char>(get());
    if (s.empty()) error("expected integer");
    return std::stol(s);
  }

  double number() {
    skip_space();
    std::string s;
    while (std::isdigit(peek()) || peek() == '.' || peek() == 'e' ||
           peek() == 'E' ||
           ((peek() == '+' || peek() == '-') && !s.empty() &&
            (s.back() == 'e' || s.back() == 'E')))
      s += static_cast<char>(get());
    if (s.empty()) error("expected number");
    try {
      return std::stod(s);
    } catch (...) {
      error("bad numeric literal");
    }
    return 0;
  }

  // literal angle: ['-'] (number | pi ['*' num] ['/' num])
  double angle() {
    skip_space();
    double sign = 1.0;
    if (try_symbol('-')) sign = -1.0;
    skip_space();
    double v;
    if (std::isalpha(peek())) {
      std::string name = ident();
      if (name != "pi") error("unsupported parameter expression");
      v = M_PI;
      if (try_symbol('*')) v *= number();
      if (try_symbol('/')) v /= number();
    } else {
      v = number();
    }
    return sign * v;
  }

  void skip_string() {
    skip_space();
    expect('"');
    while (peek() != '"' && peek() != EOF) get();
    expect('"');
  }

  [[noreturn]] void error(const std::string &msg) {
    throw ParseError(msg, line_, col_);
  }

 private:
  int peek() {
    if (!have_) {
      cur_ = in_.get();
      have_ = true;
    }
    return cur_;
  }
  int peek2() {
    peek();
    if (!have2_) {
      cur2_ = in_.get();
      have2_ = true;
    }
    return cur2_;
  }
  int get() {
    int c = peek();
    have_ = false;
    if (have2_) {
      cur_ = cur2_;
      have_ = true;
      have2_ = false;
    }
    if (c == '\n') {
      line_++;
      col_ = 1;
    } else if (c != EOF) {
      col_++;
    }
    return c;
  }

  std::istream &in_;
  int cur_ = 0, cur2_ = 0;
  bool have_ = false, have2_ = false;
  int line_ = 1, col_ = 1;
};

class QasmParser {
 public:
  explicit QasmParser(std::istream &in) : lex_(in) {}

  int parse_prologue() {
    lex_.skip_space();
    while (!lex_.eof()) {
      std::string word = lex_.ident();
      if (word == "OPENQASM") {
        lex_.number();
        lex_.expect(';');
      } else if (word == "include") {
        lex_.skip_string();
        lex_.expect(';');
      } else if (word == "qreg") {
        reg_name_ = lex_.ident();
        lex_.expect('[');
        num_qubits_ = static_cast<int>(lex_.integer());
        lex_.expect(']');
        lex_.expect(';');
        if (num_qubits_ < 1) lex_.error("qreg needs at least one qubit");
        return num_qubits_;
      } else {
        lex_.error("expected qreg before gate statements");
      }
    }
    lex_.error("missing qreg declaration");
  }

  bool next_gate(GateSpec &out) {
    if (lex_.eof()) return false;
    std::string name = lex_.ident();
    if (name == "qreg") lex_.error("only a single qreg is supported");
    const QasmGateDef *def = nullptr;
    for (const auto &d : kQasmGates)
      if (name == d.name) def = &d;
    if (!def) lex_.error("unsupported gate '" + name + "'");
    out.type = def->type;
    out.param = 0;
    if (def->has_param) {
      lex_.expect('(');
      out.param = lex_.angle();
      lex_.expect(')');
    }
    int n = arity(def->type);
    for (int k = 0; k < n; k++) {
      if (k > 0) lex_.expect(',');
      std::string reg = lex_.ident();
      if (reg != reg_name_) lex_.error("unknown register '" + reg + "'");
      lex_.expect('[');
      long idx = lex_.integer();
      lex_.expect(']');
      if (idx < 0 || idx >= num_qubits_) lex_.error("qubit index out of range");
      out.qubits[k] = static_cast<int>(idx);
    }
    lex_.expect(';');
    return true;
  }

 private:
  QasmLexer lex_;
  std::string reg_name_;
  int num_qubits_ = 0;
};

}  // namespace

QasmProgram parse_qasm(const std::string &text) {
  std::istringstream in(text);
  QasmParser parser(in);
  QasmProgram prog;
  prog.num_qubits = parser.parse_prologue();
  GateSpec g;
  while (parser.next_gate(g)) prog.gates.push_back(g);
  return prog;
}

QasmProgram parse_qasm_file(const std::string &path) {
  return parse_qasm(read_file(path));
}

std::string emit_qasm(const Reconstruction &rec) {
  std::string out = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[" +
                    std::to_string(rec.num_qubits) + "];\n";
  for (const ReconGate &g : rec.gates) {
    const char *name = qasm_name(g.type);
    if (!name)
      throw std::runtime_error("gate type not expressible in QASM subset");
    out += name;
    if (is_rotation(g.type)) {
      out += '(';
      out += format_double(g.param);
      out += ')';
    }
    out += ' ';
    for (int k = 0; k < arity(g.type); k++) {
      if (k > 0) out += ',';
      out += "q[" + std::to_string(g.qubits[k]) + "]";
    }
    out += ";\n";
  }
  return out;
}

std::string emit_qasm(const CircuitTable &table) {
  return emit_qasm(reconstruct(table));
}

std::unique_ptr<CircuitTable> table_from_qasm(const std::string &text,
                                              const std::string &label) {
  QasmProgram prog = parse_qasm(text);
  return std::make_unique<CircuitTable>(label, prog.num_qubits, prog.gates);
}

// ---------------------------------------------------------------------------
// QasmStream

struct QasmStream::Impl {
  std::unique_ptr<std::istream> input;
  QasmParser parser;
  int num_qubits = -1;
  bool done = false;

  explicit Impl(std::unique_ptr<std::istream> in)
      : input(std::move(in)), parser(*input) {}
};

QasmStream::QasmStream(std::unique_ptr<std::istream> input)
    : impl_(std::make_unique<Impl>(std::move(input))) {}

QasmStream::~QasmStream() = default;

int QasmStream::num_qubits() {
  if (impl_->num_qubits < 0)
    impl_->num_qubits = impl_->parser.parse_prologue();
  return impl_->num_qubits;
}

bool QasmStream::next(std::vector<GateSpec> &out, size_t max_gates) {
  num_qubits();
  if (impl_->done) return false;
  GateSpec g;
  while (out.size() < max_gates) {
    if (!impl_->parser.next_gate(g)) {
      impl_->done = true;
      break;
    }
    out.push_back(g);
  }
  return !out.empty() || !impl_->done;
}

}  // namespace qrw
