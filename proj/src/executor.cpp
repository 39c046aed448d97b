#include "qrw/executor.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace qrw {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// One locked rewrite attempt with the time split charged to the report.
// `now` carries the running timestamp so the buckets tile the caller's loop.
void attempt_rewrite(CircuitTable &table, const RewriteTemplate &tmpl,
                     uint64_t anchor, std::mt19937_64 &rng, PassReport &rep,
                     Clock::time_point &now) {
  rep.candidates_seen++;
  std::mt19937_64 rng_replay = rng;
  auto p1 = tmpl.plan(table, anchor, &rng);
  Clock::time_point t = Clock::now();
  rep.search_s += seconds_between(now, t);
  now = t;
  if (!p1) return;
  rep.matches++;

  Transaction txn = table.begin();
  bool locked = txn.lock(p1->locks);
  t = Clock::now();
  rep.comm_s += seconds_between(now, t);
  now = t;
  if (!locked) {
    txn.abort();
    rep.lock_failures++;
    t = Clock::now();
    rep.comm_s += seconds_between(now, t);
    now = t;
    return;
  }

  auto p2 = tmpl.plan(txn, anchor, &rng_replay);
  t = Clock::now();
  rep.search_s += seconds_between(now, t);
  now = t;
  if (!p2 || p2->locks != p1->locks) {
    txn.abort();
    rep.lock_failures++;
    t = Clock::now();
    rep.comm_s += seconds_between(now, t);
    now = t;
    return;
  }

  p2->apply(txn);
  t = Clock::now();
  rep.rewrite_s += seconds_between(now, t);
  now = t;

  txn.commit();
  rep.rewrites_applied++;
  t = Clock::now();
  rep.comm_s += seconds_between(now, t);
  now = t;
}

std::vector<uint64_t> shard_candidates(const CircuitTable &table,
                                       const RewriteTemplate &tmpl,
                                       const PassConfig &cfg) {
  std::vector<uint64_t> hits;
  if (cfg.mode == ScanMode::LinearScan) {
    // Baseline engine: probe every live row, no index help.
    for (uint64_t id : table.all_ids())
      if (id % uint64_t(cfg.nproc) == uint64_t(cfg.pid)) hits.push_back(id);
  } else {
    for (GateType t : tmpl.index_types())
      for (uint64_t id : table.ids_of_type(t))
        if (id % uint64_t(cfg.nproc) == uint64_t(cfg.pid)) hits.push_back(id);
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  }
  return hits;
}

}  // namespace

void PassReport::merge(const PassReport &o) {
  candidates_seen += o.candidates_seen;
  matches += o.matches;
  lock_failures += o.lock_failures;
  rewrites_applied += o.rewrites_applied;
  search_s += o.search_s;
  rewrite_s += o.rewrite_s;
  comm_s += o.comm_s;
  wall_s = std::max(wall_s, o.wall_s);
}

PassReport run_pass(CircuitTable &table, const RewriteTemplate &tmpl,
                    const PassConfig &cfg) {
  if (cfg.pid < 0 || cfg.nproc < 1 || cfg.pid >= cfg.nproc ||
      cfg.pass_count < 1)
    throw std::invalid_argument("run_pass: bad pid/nproc/pass_count");

  PassReport rep;
  std::mt19937_64 rng(cfg.rng_seed ^ (uint64_t(cfg.pid) << 32));
  Clock::time_point start = Clock::now();
  for (int pass = 0; pass < cfg.pass_count; pass++) {
    Clock::time_point now = Clock::now();
    // Candidate list is snapshotted at pass start; rows inserted mid-pass
    // are picked up next pass.
    std::vector<uint64_t> hits = shard_candidates(table, tmpl, cfg);
    Clock::time_point t = Clock::now();
    rep.search_s += seconds_between(now, t);
    now = t;
    for (uint64_t hit : hits) {
      if (cfg.deadline && Clock::now() >= *cfg.deadline) break;
      std::vector<uint64_t> anchors = tmpl.anchors_for(table, hit);
      t = Clock::now();
      rep.search_s += seconds_between(now, t);
      now = t;
      for (uint64_t anchor : anchors)
        attempt_rewrite(table, tmpl, anchor, rng, rep, now);
    }
  }
  rep.wall_s = seconds_between(start, Clock::now());
  return rep;
}

PassReport run_pass_parallel(CircuitTable &table, const RewriteTemplate &tmpl,
                             int nproc, int pass_count, ScanMode mode,
                             uint64_t rng_seed) {
  std::vector<PassReport> reports(nproc);
  std::vector<std::thread> workers;
  Clock::time_point start = Clock::now();
  for (int pid = 0; pid < nproc; pid++) {
    workers.emplace_back([&, pid] {
      PassConfig cfg;
      cfg.pid = pid;
      cfg.nproc = nproc;
      cfg.pass_count = pass_count;
      cfg.mode = mode;
      cfg.rng_seed = rng_seed;
      reports[pid] = run_pass(table, tmpl, cfg);
    });
  }
  for (auto &w : workers) w.join();
  PassReport merged;
  for (const auto &r : reports) merged.merge(r);
  merged.wall_s = seconds_between(start, Clock::now());
  return merged;
}

PortfolioReport run_concurrent_portfolio(
    CircuitTable &table, std::span<const RewriteTemplate *const> templates,
    int threads, double duration_s, uint64_t rng_seed, double sample_period_s,
    double idle_cutoff_s) {
  if (templates.empty() || threads < 1 || duration_s <= 0)
    throw std::invalid_argument("run_concurrent_portfolio: bad arguments");

  PortfolioReport rep;
  std::atomic<bool> stop{false};
  std::atomic<uint64_t> applied{0};
  std::atomic<uint64_t> failures{0};
  Clock::time_point start = Clock::now();
  Clock::time_point deadline =
      start + std::chrono::duration_cast<Clock::duration>(
                  std::chrono::duration<double>(duration_s));

  std::vector<std::thread> workers;
  for (int i = 0; i < threads; i++) {
    const RewriteTemplate *tmpl = templates[i % templates.size()];
    workers.emplace_back([&, tmpl, i] {
      std::mt19937_64 rng(rng_seed ^ (uint64_t(i + 1) * 0x9e3779b97f4a7c15ull));
      std::vector<GateType> types = tmpl->index_types();
      while (!stop.load(std::memory_order_relaxed) &&
             Clock::now() < deadline) {
        GateType t = types[rng() % types.size()];
        auto hit = table.select_random_by_type(t, rng);
        if (!hit) continue;
        for (uint64_t anchor : tmpl->anchors_for(table, hit->id)) {
          ApplyResult r = try_rewrite(table, *tmpl, anchor, rng);
          if (r.applied) applied.fetch_add(1, std::memory_order_relaxed);
          if (r.lock_failed) failures.fetch_add(1, std::memory_order_relaxed);
        }
      }
    });
  }

  // Sampler doubles as the idle watchdog.
  uint64_t last_applied = 0;
  Clock::time_point last_progress = start;
  while (Clock::now() < deadline && !stop.load()) {
    PortfolioSample s;
    s.t_s = seconds_between(start, Clock::now());
    for (int t = 0; t < kNumGateTypes; t++)
      s.counts[t] = table.count_of_type(static_cast<GateType>(t));
    rep.series.push_back(s);

    uint64_t a = applied.load();
    if (a != last_applied) {
      last_applied = a;
      last_progress = Clock::now();
    } else if (idle_cutoff_s > 0 &&
               seconds_between(last_progress, Clock::now()) > idle_cutoff_s) {
      stop.store(true);
      break;
    }
    std::this_thread::sleep_for(
        std::chrono::duration<double>(sample_period_s));
  }
  stop.store(true);
  for (auto &w : workers) w.join();

  PortfolioSample final_s;
  final_s.t_s = seconds_between(start, Clock::now());
  for (int t = 0; t < kNumGateTypes; t++)
    final_s.counts[t] = table.count_of_type(static_cast<GateType>(t));
  rep.series.push_back(final_s);
  rep.rewrites_applied = applied.load();
  rep.lock_failures = failures.load();
  rep.wall_s = final_s.t_s;
  return rep;
}

}  // namespace qrw
