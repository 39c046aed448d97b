#include "qrw/perf_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "qrw/gen.hpp"

namespace qrw {

double predict_T(const PerfFit &fit, double N, double n, double p_r) {
  if (n < 1) throw std::invalid_argument("predict_T: n must be >= 1");
  return fit.s * N + fit.r * p_r * N / n + fit.c * p_r * N;
}

PerfFit fit_src(std::span<const PerfSample> samples) {
  std::set<double> ns, prs;
  for (const auto &smp : samples) {
    ns.insert(smp.n);
    prs.insert(smp.p_r);
  }
  if (samples.size() < 3 || ns.size() < 2 || prs.size() < 2)
    throw std::invalid_argument(
        "fit_src: need >= 3 samples spanning >= 2 thread counts and >= 2 "
        "match probabilities");

  // Normal equations A^T A x = A^T b over features (N, p_rN/n, p_rN).
  std::array<std::array<double, 3>, 3> ata{};
  std::array<double, 3> atb{};
  for (const auto &smp : samples) {
    std::array<double, 3> f = {smp.N, smp.p_r * smp.N / smp.n,
                               smp.p_r * smp.N};
    for (int i = 0; i < 3; i++) {
      atb[i] += f[i] * smp.T;
      for (int j = 0; j < 3; j++) ata[i][j] += f[i] * f[j];
    }
  }

  // Gaussian elimination with partial pivoting.
  std::array<std::array<double, 4>, 3> m;
  for (int i = 0; i < 3; i++) {
    for (int j = 0; j < 3; j++) m[i][j] = ata[i][j];
    m[i][3] = atb[i];
  }
  for (int col = 0; col < 3; col++) {
    int piv = col;
    for (int row = col + 1; row < 3; row++)
      if (std::fabs(m[row][col]) > std::fabs(m[piv][col])) piv = row;
    std::swap(m[col], m[piv]);
    if (std::fabs(m[col][col]) < 1e-300)
      throw std::invalid_argument("fit_src: rank-deficient sample set");
    for (int row = 0; row < 3; row++) {
      if (row == col) continue;
      double k = m[row][col] / m[col][col];
      for (int j = col; j < 4; j++) m[row][j] -= k * m[col][j];
    }
  }
  PerfFit fit;
  fit.s = m[0][3] / m[0][0];
  fit.r = m[1][3] / m[1][1];
  fit.c = m[2][3] / m[2][2];

  for (const auto &smp : samples) {
    double pred = predict_T(fit, smp.N, smp.n, smp.p_r);
    if (smp.T > 0)
      fit.max_rel_residual =
          std::max(fit.max_rel_residual, std::fabs(pred - smp.T) / smp.T);
  }
  return fit;
}

PerfSample measure_pass(size_t N, double p_r, int qubits, int threads,
                        uint64_t seed, ScanMode mode) {
  auto table = gen_flipped_cnot_circuit("bench", N, p_r, qubits, seed);
  const RewriteTemplate *g = find_template("g");
  PassReport rep = run_pass_parallel(*table, *g, threads, 1, mode, seed);
  PerfSample smp;
  smp.N = double(N);
  smp.n = double(threads);
  smp.p_r = p_r;
  smp.S = rep.search_s;
  smp.R = rep.rewrite_s;
  smp.C = rep.comm_s;
  smp.T = rep.wall_s;
  return smp;
}

std::vector<UtilityRow> run_utility_benchmark(std::span<const size_t> Ns,
                                              std::span<const double> p_rs,
                                              int qubits, uint64_t seed) {
  std::vector<UtilityRow> rows;
  const RewriteTemplate *g = find_template("g");
  for (size_t N : Ns) {
    for (double p_r : p_rs) {
      for (ScanMode mode : {ScanMode::IndexedScan, ScanMode::LinearScan}) {
        auto table = gen_flipped_cnot_circuit("bench", N, p_r, qubits, seed);
        PassConfig cfg;
        cfg.mode = mode;
        cfg.rng_seed = seed;
        PassReport rep = run_pass(*table, *g, cfg);
        UtilityRow row;
        row.engine = mode == ScanMode::IndexedScan ? "indexed" : "linear";
        row.N = N;
        row.p_r = p_r;
        row.seconds = rep.wall_s;
        row.rewrites = rep.rewrites_applied;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string utility_csv(std::span<const UtilityRow> rows) {
  std::ostringstream out;
  out << "engine,N,p_r,seconds,rewrites\n";
  for (const auto &r : rows)
    out << r.engine << ',' << r.N << ',' << r.p_r << ',' << r.seconds << ','
        << r.rewrites << '\n';
  return out.str();
}

}  // namespace qrw
