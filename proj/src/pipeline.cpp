#include "qrw/pipeline.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "qrw/templates.hpp"

namespace qrw {

size_t VectorGateStream::next(std::vector<GateSpec> &out, size_t max) {
  size_t n = std::min(max, gates_.size() - pos_);
  out.assign(gates_.begin() + std::ptrdiff_t(pos_),
             gates_.begin() + std::ptrdiff_t(pos_ + n));
  pos_ += n;
  return n;
}

size_t SyntheticGateStream::next(std::vector<GateSpec> &out, size_t max) {
  size_t n = std::min(max, count_ - pos_);
  out.clear();
  out.reserve(n);
  for (size_t i = 0; i < n; i++) out.push_back(make_(pos_ + i));
  pos_ += n;
  return n;
}

void decompose_into(const GateSpec &g, std::vector<GateSpec> &out) {
  auto expand = [&](std::vector<GateSpec> net) {
    for (GateSpec &e : net) {
      for (int k = 0; k < arity(e.type); k++)
        e.qubits[k] = g.qubits[e.qubits[k]];
      out.push_back(e);
    }
  };
  switch (g.type) {
    case GateType::Toffoli:
      expand(toffoli_clifford_t(0, 1, 2));
      break;
    case GateType::CSWAP:
      expand(cswap_clifford_t(0, 1, 2));
      break;
    case GateType::In:
    case GateType::Out:
      throw std::invalid_argument("decompose_into: pseudo-gate in stream");
    default:
      out.push_back(g);
      break;
  }
}

TranspileStats transpile_stream(GateStream &source, CircuitTable &table,
                                const TranspileOptions &opts) {
  if (opts.batch_size < 1)
    throw std::invalid_argument("batch_size must be >= 1");
  using Clock = std::chrono::steady_clock;
  auto secs = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  TranspileStats stats;
  std::mutex mtx;
  std::condition_variable cv_produce, cv_consume;
  // Bounded hand-off: at most one finished batch parked in the queue, one
  // in the producer's hands and one being inserted — two batches buffered
  // between the threads, three live in the worst case.
  std::deque<std::vector<GateSpec>> queue;
  constexpr size_t kQueueDepth = 1;
  bool done = false;
  std::exception_ptr failure;

  std::thread producer([&] {
    try {
      std::vector<GateSpec> raw;
      std::vector<GateSpec> batch;
      for (;;) {
        Clock::time_point t0 = Clock::now();
        size_t got = source.next(raw, opts.batch_size);
        if (got == 0) break;
        stats.gates_in += got;
        batch.clear();
        batch.reserve(got);
        for (const GateSpec &g : raw) decompose_into(g, batch);
        batch_live_records() += int64_t(batch.size());
        int64_t live = batch_live_records().load();
        int64_t peak = batch_peak_records().load();
        while (live > peak &&
               !batch_peak_records().compare_exchange_weak(peak, live)) {
        }
        if (opts.artificial_decompose_delay_s > 0)
          std::this_thread::sleep_for(std::chrono::duration<double>(
              opts.artificial_decompose_delay_s));
        stats.produce_s += secs(t0, Clock::now());
        std::unique_lock<std::mutex> lk(mtx);
        cv_produce.wait(lk, [&] { return queue.size() < kQueueDepth; });
        queue.push_back(std::move(batch));
        batch = {};
        cv_consume.notify_one();
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(mtx);
      failure = std::current_exception();
    }
    std::lock_guard<std::mutex> lk(mtx);
    done = true;
    cv_consume.notify_one();
  });

  Clock::time_point start = Clock::now();
  for (;;) {
    std::vector<GateSpec> batch;
    {
      std::unique_lock<std::mutex> lk(mtx);
      cv_consume.wait(lk, [&] { return !queue.empty() || done; });
      if (queue.empty()) break;
      batch = std::move(queue.front());
      queue.pop_front();
      cv_produce.notify_one();
    }
    Clock::time_point t0 = Clock::now();
    table.append_gates(batch);
    stats.gates_out += batch.size();
    batch_live_records() -= int64_t(batch.size());
    stats.consume_s += secs(t0, Clock::now());
  }
  producer.join();
  if (failure) std::rethrow_exception(failure);

  stats.seconds = secs(start, Clock::now());
  stats.gates_per_second =
      stats.seconds > 0 ? double(stats.gates_out) / stats.seconds : 0;
  return stats;
}

}  // namespace qrw
