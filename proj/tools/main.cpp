#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qrw/equiv.hpp"
#include "qrw/executor.hpp"
#include "qrw/gen.hpp"
#include "qrw/io.hpp"
#include "qrw/partition.hpp"
#include "qrw/perf_model.hpp"
#include "qrw/pipeline.hpp"
#include "qrw/templates.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string db = ".";
  uint64_t seed = 1;
  int threads = 1;
};

std::string snapshot_path(const Globals &g, const std::string &label) {
  return (fs::path(g.db) / (label + ".snap")).string();
}

std::unique_ptr<qrw::CircuitTable> load_label(const Globals &g,
                                              const std::string &label) {
  std::string path = snapshot_path(g, label);
  if (!fs::exists(path))
    throw std::runtime_error("no snapshot for label '" + label + "' in " +
                             g.db);
  return qrw::load_snapshot(path);
}

void store_label(const Globals &g, const qrw::CircuitTable &table) {
  fs::create_directories(g.db);
  qrw::save_snapshot(table, snapshot_path(g, table.label()));
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

class QasmGateStream : public qrw::GateStream {
 public:
  explicit QasmGateStream(qrw::QasmStream &qs) : qs_(qs) {}
  size_t next(std::vector<qrw::GateSpec> &out, size_t max) override {
    out.clear();
    qs_.next(out, max);
    return out.size();
  }

 private:
  qrw::QasmStream &qs_;
};

std::vector<size_t> parse_counts(const std::string &csv) {
  std::vector<size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(size_t(std::stod(item)));
  return out;
}

std::vector<double> parse_doubles(const std::string &csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

int cmd_ingest(const Globals &g, const std::string &input,
               const std::string &label, const std::string &target,
               size_t batch) {
  auto file = std::make_unique<std::ifstream>(input, std::ios::binary);
  if (!*file) throw std::runtime_error("cannot open " + input);
  qrw::QasmStream qs(std::move(file));
  qrw::CircuitTable table(label, qs.num_qubits());
  QasmGateStream src(qs);
  qrw::TranspileOptions opts;
  opts.batch_size = batch;
  opts.target = target == "clifford-rz" ? qrw::TargetSet::CliffordRz
                                        : qrw::TargetSet::CliffordT;
  qrw::TranspileStats stats = qrw::transpile_stream(src, table, opts);
  store_label(g, table);
  json rep = {{"label", label},
              {"gates_in", stats.gates_in},
              {"gates_out", stats.gates_out},
              {"seconds", stats.seconds},
              {"gates_per_second", stats.gates_per_second}};
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_export(const Globals &g, const std::string &label,
               const std::string &out, const std::string &format) {
  auto table = load_label(g, label);
  if (format == "native")
    write_file(out, qrw::save_native(*table));
  else
    write_file(out, qrw::emit_qasm(*table));
  return 0;
}

int cmd_rewrite(const Globals &g, const std::string &label,
                const std::string &rules, int passes, double duration,
                const std::string &report) {
  auto table = load_label(g, label);
  auto templates = qrw::parse_template_list(rules);
  json rep;
  rep["label"] = label;
  rep["rules"] = rules;
  std::ostringstream csv;
  if (duration > 0) {
    qrw::PortfolioReport pr = qrw::run_concurrent_portfolio(
        *table, templates, g.threads, duration, g.seed);
    rep["rewrites_applied"] = pr.rewrites_applied;
    rep["lock_failures"] = pr.lock_failures;
    rep["wall_s"] = pr.wall_s;
    csv << "t_s";
    for (int t = 0; t < qrw::kNumGateTypes; t++)
      csv << ',' << qrw::gate_type_name(static_cast<qrw::GateType>(t));
    csv << '\n';
    for (const auto &s : pr.series) {
      csv << s.t_s;
      for (int t = 0; t < qrw::kNumGateTypes; t++) csv << ',' << s.counts[t];
      csv << '\n';
    }
  } else {
    csv << "rule,candidates,matches,lock_failures,rewrites,S,R,C,wall\n";
    for (const qrw::RewriteTemplate *tmpl : templates) {
      qrw::PassReport r = qrw::run_pass_parallel(
          *table, *tmpl, g.threads, passes, qrw::ScanMode::IndexedScan,
          g.seed);
      rep["rules_applied"][tmpl->name()] = r.rewrites_applied;
      csv << tmpl->name() << ',' << r.candidates_seen << ',' << r.matches
          << ',' << r.lock_failures << ',' << r.rewrites_applied << ','
          << r.search_s << ',' << r.rewrite_s << ',' << r.comm_s << ','
          << r.wall_s << '\n';
    }
  }
  qrw::AuditReport audit = table->audit();
  rep["audit_ok"] = audit.ok();
  store_label(g, *table);
  if (!report.empty()) write_file(report, csv.str());
  std::cout << rep.dump(2) << "\n";
  return audit.ok() ? 0 : 1;
}

int cmd_partition(const Globals &g, const std::string &label,
                  size_t max_gates, size_t max_t, size_t max_depth,
                  size_t batch, const std::string &out_dir) {
  auto table = load_label(g, label);
  qrw::PartitionConstraints bounds;
  if (max_gates) bounds.max_gates = max_gates;
  if (max_t) bounds.max_t_gates = max_t;
  if (max_depth) bounds.max_depth = max_depth;
  auto parts = qrw::partition_circuit(*table, bounds, batch);
  fs::create_directories(out_dir);
  json manifest = json::array();
  for (const auto &p : parts) {
    std::string name = "part_" + std::to_string(p.partition_id);
    auto sub = qrw::extract_partition(*table, p, name);
    qrw::save_native_file(*sub, (fs::path(out_dir) / (name + ".csv")).string());
    manifest.push_back({{"partition_id", p.partition_id},
                        {"gates", p.gate_count},
                        {"t_gates", p.t_count},
                        {"depth", p.depth},
                        {"wires", p.wires}});
  }
  write_file((fs::path(out_dir) / "manifest.json").string(),
             manifest.dump(2));
  std::cout << json({{"partitions", parts.size()}}).dump(2) << "\n";
  return 0;
}

int cmd_check_equiv(const std::string &a, const std::string &b,
                    double timeout) {
  auto c1 = qrw::table_from_qasm(read_file(a), "c1");
  auto c2 = qrw::table_from_qasm(read_file(b), "c2");
  qrw::Verdict v = qrw::check_equivalence(*c1, *c2, timeout);
  const char *kinds[] = {"equivalent", "not_equivalent", "unknown"};
  json rep = {{"verdict", kinds[int(v.kind)]},
              {"residue_size", v.residue_size},
              {"elapsed_s", v.elapsed_s},
              {"timed_out", v.timed_out}};
  std::cout << rep.dump(2) << "\n";
  switch (v.kind) {
    case qrw::VerdictKind::Equivalent: return 0;
    case qrw::VerdictKind::NotEquivalent: return 1;
    case qrw::VerdictKind::Unknown: return 2;
  }
  return 2;
}

int cmd_bench_utility(const Globals &g, const std::string &ns,
                      const std::string &prs, const std::string &out) {
  auto Ns = parse_counts(ns);
  auto p_rs = parse_doubles(prs);
  auto rows = qrw::run_utility_benchmark(Ns, p_rs, 16, g.seed);
  std::string csv = qrw::utility_csv(rows);
  if (out.empty())
    std::cout << csv;
  else
    write_file(out, csv);
  return 0;
}

int cmd_bench_scaling(const Globals &g, const std::string &threads, size_t N,
                      double p_r, const std::string &out) {
  auto ts = parse_counts(threads);
  std::ostringstream csv;
  csv << "n,N,p_r,S,R,C,T,speedup\n";
  double t1 = 0;
  for (size_t n : ts) {
    qrw::PerfSample s = qrw::measure_pass(N, p_r, 16, int(n), g.seed);
    if (t1 == 0) t1 = s.T;
    csv << n << ',' << N << ',' << p_r << ',' << s.S << ',' << s.R << ','
        << s.C << ',' << s.T << ',' << (s.T > 0 ? t1 / s.T : 0) << '\n';
  }
  if (out.empty())
    std::cout << csv.str();
  else
    write_file(out, csv.str());
  return 0;
}

int cmd_audit(const Globals &g, const std::string &label) {
  auto table = load_label(g, label);
  qrw::AuditReport rep = table->audit();
  json issues = json::array();
  for (const auto &i : rep.issues)
    issues.push_back({{"gate_id", i.gate_id}, {"what", i.what}});
  std::cout << json({{"label", label},
                     {"rows", table->size()},
                     {"qubits", table->num_qubits()},
                     {"ok", rep.ok()},
                     {"issues", issues}})
                   .dump(2)
            << "\n";
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Transactional quantum-circuit rewrite engine"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--db", g.db, "Snapshot directory")->capture_default_str();
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")
      ->capture_default_str();

  std::string input, label, out, format = "qasm", rules, report;
  std::string target = "clifford-t", a_path, b_path, ns = "100000",
              prs = "0.001,0.01,0.1", threads_list = "1,2,4,8";
  size_t batch = 100000, max_gates = 0, max_t = 0, max_depth = 0,
         bench_n = 100000;
  int passes = 1;
  double duration = 0, timeout = 1000, bench_pr = 0.1;

  auto *ingest = app.add_subcommand("ingest", "Stream a QASM file into the store");
  ingest->add_option("--input", input)->required();
  ingest->add_option("--label", label)->required();
  ingest->add_option("--target", target)->check(CLI::IsMember({"clifford-t", "clifford-rz"}));
  ingest->add_option("--batch", batch);

  auto *exp = app.add_subcommand("export", "Write a stored circuit to a file");
  exp->add_option("--label", label)->required();
  exp->add_option("--out", out)->required();
  exp->add_option("--format", format)->check(CLI::IsMember({"qasm", "native"}));

  auto *rw = app.add_subcommand("rewrite", "Run rewrite passes or a timed portfolio");
  rw->add_option("--label", label)->required();
  rw->add_option("--rules", rules)->required();
  rw->add_option("--passes", passes);
  rw->add_option("--duration", duration, "Seconds; > 0 selects portfolio mode");
  rw->add_option("--report", report, "CSV report path");

  auto *part = app.add_subcommand("partition", "Constraint-bounded partitioning");
  part->add_option("--label", label)->required();
  part->add_option("--max-gates", max_gates);
  part->add_option("--max-t", max_t);
  part->add_option("--max-depth", max_depth);
  part->add_option("--batch", batch);
  part->add_option("--out", out)->required();

  auto *ce = app.add_subcommand("check-equiv", "Equivalence of two QASM files");
  ce->add_option("a", a_path)->required();
  ce->add_option("b", b_path)->required();
  ce->add_option("--timeout", timeout);

  auto *bench = app.add_subcommand("bench", "Benchmarks");
  auto *bu = bench->add_subcommand("utility", "Indexed vs linear search");
  bu->add_option("--n", ns, "Comma-separated gate counts");
  bu->add_option("--pr", prs, "Comma-separated match probabilities");
  bu->add_option("--out", out);
  auto *bs = bench->add_subcommand("scaling", "Thread-count scaling");
  bs->add_option("--threads", threads_list, "Comma-separated thread counts");
  bs->add_option("--n", bench_n);
  bs->add_option("--pr", bench_pr);
  bs->add_option("--out", out);
  bench->require_subcommand(1);

  auto *audit = app.add_subcommand("audit", "Full-table integrity audit");
  audit->add_option("--label", label)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(g, input, label, target, batch);
    if (*exp) return cmd_export(g, label, out, format);
    if (*rw) return cmd_rewrite(g, label, rules, passes, duration, report);
    if (*part)
      return cmd_partition(g, label, max_gates, max_t, max_depth, batch, out);
    if (*ce) return cmd_check_equiv(a_path, b_path, timeout);
    if (*bu) return cmd_bench_utility(g, ns, prs, out);
    if (*bs) return cmd_bench_scaling(g, threads_list, bench_n, bench_pr, out);
    if (*audit) return cmd_audit(g, label);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
