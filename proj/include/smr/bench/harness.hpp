#ifndef SMR_BENCH_HARNESS_HPP
#define SMR_BENCH_HARNESS_HPP

#include "config.hpp"

#include "../fifo_hash_map.hpp"
#include "../harris_michael_list.hpp"
#include "../michael_scott_queue.hpp"
#include "../node_allocator.hpp"
#include "../perf_counters.hpp"
#include "../schemes.hpp"

#include <array>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <thread>
#include <vector>

namespace smr::bench {

/// Operation mix performed by one worker during one trial.
struct op_counts {
  std::uint64_t enqueues = 0;
  std::uint64_t dequeues = 0;
  std::uint64_t inserts = 0;
  std::uint64_t removes = 0;
  std::uint64_t searches = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
};

struct throughput_row {
  unsigned trial = 0;
  unsigned thread_id = 0;
  std::uint64_t ops = 0;
  std::uint64_t runtime_ns = 0;
  op_counts counts;

  double ns_per_op() const noexcept {
    return ops == 0 ? 0.0 : static_cast<double>(runtime_ns) / static_cast<double>(ops);
  }
};

/// One sample of the node counters, relative to the start of the benchmark.
/// Sample indices below `samples_per_trial` are taken while the workers run;
/// index `samples_per_trial` is taken after they have been joined. In the last
/// trial of a run the data structure is destroyed before that sample.
struct efficiency_row {
  unsigned run = 0;
  unsigned trial = 0;
  unsigned sample = 0;
  std::int64_t unreclaimed = 0;
  std::uint64_t allocated = 0;
  std::uint64_t reclaimed = 0;
  /// Nodes still linked into the structure; only set for the post-join sample.
  std::size_t live_nodes = 0;
  bool quiescent = false;
};

using throughput_sink = std::function<void(const throughput_row&)>;
using efficiency_sink = std::function<void(const efficiency_row&)>;

/// Mean over the per-thread averages of one trial.
inline double trial_ns_per_op(const std::vector<throughput_row>& rows) {
  if (rows.empty())
    return 0.0;
  double sum = 0;
  for (auto& r : rows)
    sum += r.ns_per_op();
  return sum / static_cast<double>(rows.size());
}

namespace detail {

struct worker_state {
  worker_state(const bench_config& cfg, unsigned run, unsigned trial, unsigned index) {
    std::seed_seq seq{cfg.seed + index, std::uint64_t(run), std::uint64_t(trial)};
    rng.seed(seq);
  }
  std::mt19937_64 rng;
  op_counts counts;
};

template <class Scheme>
class queue_workload {
public:
  explicit queue_workload(const bench_config& cfg) : span_(cfg.region_span) {}

  std::uint64_t batch(worker_state& s) {
    typename Scheme::region_guard region;
    for (unsigned i = 0; i < span_; ++i) {
      if (s.rng() & 1) {
        queue_.enqueue(i);
        ++s.counts.enqueues;
      } else {
        unsigned v;
        queue_.try_dequeue(v);
        ++s.counts.dequeues;
      }
    }
    return span_;
  }

  std::size_t live_nodes() const { return queue_.quiescent_node_count(); }

private:
  unsigned span_;
  michael_scott_queue<unsigned, Scheme> queue_;
};

template <class Scheme>
class list_workload {
public:
  explicit list_workload(const bench_config& cfg)
      : span_(cfg.region_span), workload_(cfg.workload), range_(cfg.key_range()) {
    // filled by a temporary thread so that the caller never becomes a participant
    std::thread([&] {
      std::mt19937_64 rng(cfg.seed);
      std::size_t n = 0;
      while (n < cfg.list_size)
        n += list_.insert(rng() % range_) ? 1 : 0;
    }).join();
  }

  std::uint64_t batch(worker_state& s) {
    typename Scheme::region_guard region;
    for (unsigned i = 0; i < span_; ++i) {
      const auto r = s.rng();
      const std::uint64_t key = r % range_;
      if ((r >> 32) % 100 < workload_) {
        if ((r >> 48) & 1) {
          list_.insert(key);
          ++s.counts.inserts;
        } else {
          list_.remove(key);
          ++s.counts.removes;
        }
      } else {
        list_.contains(key);
        ++s.counts.searches;
      }
    }
    return span_;
  }

  std::size_t live_nodes() const { return list_.quiescent_node_count(); }

private:
  unsigned span_;
  unsigned workload_;
  std::uint64_t range_;
  harris_michael_list_set<std::uint64_t, Scheme> list_;
};

/// A partial result of the simulated computation.
template <std::size_t Size>
struct partial_result {
  std::array<std::uint64_t, Size / sizeof(std::uint64_t)> data{};

  partial_result() = default;
  explicit partial_result(std::uint64_t key) {
    std::uint64_t x = key;
    for (auto& w : data) {
      x = x * 6364136223846793005ull + 1442695040888963407ull;
      w = x;
    }
  }
};

template <class Scheme, std::size_t Payload>
class hashmap_workload {
  using map_type = fifo_hash_map<std::uint64_t, partial_result<Payload>, Scheme>;

public:
  explicit hashmap_workload(const bench_config& cfg)
      : keys_(cfg.hashmap.key_space), per_simulation_(cfg.hashmap.keys_per_simulation),
        map_(cfg.hashmap.buckets, cfg.hashmap.capacity) {}

  /// One simulation: all of its partial results stay referenced until it ends.
  std::uint64_t batch(worker_state& s) {
    typename Scheme::region_guard region;
    std::vector<typename map_type::accessor> held;
    held.reserve(per_simulation_);
    std::uint64_t sink = 0;
    for (std::size_t i = 0; i < per_simulation_; ++i) {
      bool hit = false;
      auto a = map_.get_or_compute(s.rng() % keys_, [](std::uint64_t k) { return partial_result<Payload>(k); }, &hit);
      ++(hit ? s.counts.hits : s.counts.misses);
      sink += a.value().data[i % a.value().data.size()];
      held.push_back(std::move(a));
    }
    sink_.store(sink, std::memory_order_relaxed);
    return per_simulation_;
  }

  std::size_t live_nodes() const { return map_.quiescent_node_count() + map_.quiescent_queue_node_count(); }

private:
  std::uint64_t keys_;
  std::size_t per_simulation_;
  map_type map_;
  std::atomic<std::uint64_t> sink_{0};
};

/// Runs one trial: spawns the workers, releases them together and lets
/// `supervise(start)` decide when they stop.
template <class Workload, class Supervise>
std::vector<throughput_row> run_trial(const bench_config& cfg, Workload& w, unsigned run, unsigned trial,
                                      Supervise&& supervise) {
  std::vector<throughput_row> rows(cfg.threads);
  std::atomic<bool> stop{false};
  std::barrier start_line(static_cast<std::ptrdiff_t>(cfg.threads) + 1);
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < cfg.threads; ++t) {
    workers.emplace_back([&, t] {
      worker_state s(cfg, run, trial, t);
      std::uint64_t ops = 0;
      start_line.arrive_and_wait();
      const auto begin = std::chrono::steady_clock::now();
      while (!stop.load(std::memory_order_relaxed))
        ops += w.batch(s);
      const auto end = std::chrono::steady_clock::now();
      rows[t] = {trial, t, ops,
                 static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(end - begin).count()),
                 s.counts};
    });
  }
  start_line.arrive_and_wait();
  supervise(std::chrono::steady_clock::now());
  stop.store(true, std::memory_order_relaxed);
  for (auto& t : workers)
    t.join();
  return rows;
}

inline std::chrono::steady_clock::duration seconds(double s) {
  return std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(s));
}

template <class Workload>
void throughput(const bench_config& cfg, const throughput_sink& sink) {
  Workload w(cfg);
  for (unsigned trial = 0; trial < cfg.trials; ++trial) {
    auto rows = run_trial(cfg, w, 0, trial, [&](auto start) { std::this_thread::sleep_until(start + seconds(cfg.trial_seconds)); });
    for (auto& r : rows)
      sink(r);
  }
}

template <class Workload>
void efficiency(const bench_config& cfg, const efficiency_sink& sink) {
  const counter_snapshot base = perf_counters::snapshot();
  auto sample = [&](unsigned run, unsigned trial, unsigned index, bool quiescent, std::size_t live) {
    const counter_snapshot c = perf_counters::snapshot() - base;
    efficiency_row row{run, trial, index, 0, c.allocated, c.reclaimed, live, quiescent};
    row.unreclaimed = static_cast<std::int64_t>(row.allocated) - static_cast<std::int64_t>(row.reclaimed);
    sink(row);
  };
  const auto period = seconds(cfg.trial_seconds / cfg.samples_per_trial);

  for (unsigned run = 0; run < cfg.runs; ++run) {
    auto w = std::make_unique<Workload>(cfg);
    for (unsigned trial = 0; trial < cfg.trials; ++trial) {
      run_trial(cfg, *w, run, trial, [&](auto start) {
        for (unsigned s = 0; s < cfg.samples_per_trial; ++s) {
          std::this_thread::sleep_until(start + period * (s + 1));
          sample(run, trial, s, false, 0);
        }
      });
      std::size_t live = 0;
      if (trial + 1 == cfg.trials)
        w.reset();
      else
        live = w->live_nodes();
      sample(run, trial, cfg.samples_per_trial, true, live);
    }
  }
}

template <class Scheme, class F>
void with_workload(const bench_config& cfg, F&& f) {
  switch (cfg.bench) {
  case benchmark::queue:
    f(type_tag<queue_workload<Scheme>>{});
    break;
  case benchmark::list:
    f(type_tag<list_workload<Scheme>>{});
    break;
  case benchmark::hashmap:
    if (cfg.hashmap.payload == 1024)
      f(type_tag<hashmap_workload<Scheme, 1024>>{});
    else
      f(type_tag<hashmap_workload<Scheme, 256>>{});
    break;
  }
}

} // namespace detail

/// Throughput experiment for a fixed scheme.
template <class Scheme>
void run_throughput(const bench_config& cfg, const throughput_sink& sink) {
  scoped_node_allocator allocator(*find_node_allocator(cfg.allocator));
  detail::with_workload<Scheme>(cfg, [&](auto tag) { detail::throughput<typename decltype(tag)::type>(cfg, sink); });
}

/// Reclamation-efficiency experiment for a fixed scheme.
template <class Scheme>
void run_efficiency(const bench_config& cfg, const efficiency_sink& sink) {
  scoped_node_allocator allocator(*find_node_allocator(cfg.allocator));
  detail::with_workload<Scheme>(cfg, [&](auto tag) { detail::efficiency<typename decltype(tag)::type>(cfg, sink); });
}

/// Runs the experiment selected by `cfg.run_mode` with the scheme named in
/// `cfg.scheme`. Returns false if the scheme is unknown.
inline bool run(const bench_config& cfg, const throughput_sink& on_throughput, const efficiency_sink& on_efficiency) {
  return with_scheme(cfg.scheme, [&](auto tag) {
    using scheme = typename decltype(tag)::type;
    if (cfg.run_mode == mode::throughput)
      run_throughput<scheme>(cfg, on_throughput);
    else
      run_efficiency<scheme>(cfg, on_efficiency);
  });
}

} // namespace smr::bench

#endif
