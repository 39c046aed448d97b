#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrw/templates.hpp"

namespace qrw {

enum class ScanMode {
  IndexedScan,  // enumerate candidates from the type index
  LinearScan,   // probe every id in the table (baseline engine)
  RandomSample  // repeatedly draw random index members
};

struct PassConfig {
  int pid = 0;
  int nproc = 1;
  int pass_count = 1;
  ScanMode mode = ScanMode::IndexedScan;
  uint64_t rng_seed = 0;
  // Optional wall-clock stop for long passes.
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// S/R/C split: search (candidate enumeration + pattern matching), rewrite
// (overlay mutation), communication (lock acquire/release, failed
// acquisitions, commit publication). The buckets tile the pass body so that
// S+R+C reconciles with wall time.
struct PassReport {
  uint64_t candidates_seen = 0;
  uint64_t matches = 0;
  uint64_t lock_failures = 0;
  uint64_t rewrites_applied = 0;
  double search_s = 0;
  double rewrite_s = 0;
  double comm_s = 0;
  double wall_s = 0;

  void merge(const PassReport &other);
};

// One worker's pass(es) per the sharded algorithm: visit every candidate
// with id % nproc == pid once per pass, try-lock, apply, commit; lock
// failures skip to the next candidate and are never retried in the same
// encounter.
PassReport run_pass(CircuitTable &table, const RewriteTemplate &tmpl,
                    const PassConfig &config);

// Convenience driver: nproc OS threads, one per pid, merged report.
PassReport run_pass_parallel(CircuitTable &table, const RewriteTemplate &tmpl,
                             int nproc, int pass_count,
                             ScanMode mode = ScanMode::IndexedScan,
                             uint64_t rng_seed = 0);

struct PortfolioSample {
  double t_s = 0;  // seconds since start
  std::array<uint64_t, kNumGateTypes> counts{};
};

struct PortfolioReport {
  std::vector<PortfolioSample> series;
  uint64_t rewrites_applied = 0;
  uint64_t lock_failures = 0;
  double wall_s = 0;
};

// Free-running concurrent portfolio: each thread random-samples anchors for
// its assigned template and rewrites until the deadline. Per-type gate
// counts are sampled periodically. If idle_cutoff_s > 0 the run ends early
// once no rewrite has been applied for that long (the table is at a
// fixpoint for the portfolio).
PortfolioReport run_concurrent_portfolio(
    CircuitTable &table, std::span<const RewriteTemplate *const> templates,
    int threads, double duration_s, uint64_t rng_seed,
    double sample_period_s = 0.25, double idle_cutoff_s = 0);

}  // namespace qrw
