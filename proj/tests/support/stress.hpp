#ifndef SMR_TESTS_STRESS_HPP
#define SMR_TESTS_STRESS_HPP

#include "canary.hpp"

#include <smr/fifo_hash_map.hpp>
#include <smr/harris_michael_list.hpp>
#include <smr/michael_scott_queue.hpp>
#include <smr/node_allocator.hpp>
#include <smr/perf_counters.hpp>

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace smr::test {

enum class structure { queue, list, hashmap };

inline const char* to_string(structure s) {
  switch (s) {
  case structure::queue:
    return "queue";
  case structure::list:
    return "list";
  case structure::hashmap:
    return "hashmap";
  }
  return "?";
}

struct stress_config {
  structure target = structure::list;
  unsigned threads = 4;
  /// Operations over all threads.
  std::uint64_t ops = 100000;
  std::uint64_t seed = 1;
  /// Barrier-separated phases; after each one thread 0 sweeps the invariants.
  unsigned phases = 4;
  std::size_t list_size = 100;
  std::size_t hash_buckets = 64;
  std::size_t hash_capacity = 200;
  std::uint64_t hash_keys = 600;
  /// Maximum number of operations inside one region_guard.
  unsigned region_span = 100;
};

struct stress_report {
  std::uint64_t ops = 0;
  std::uint64_t guard_acquisitions = 0;
  std::uint64_t canary_violations = 0;
  std::vector<std::string> invariant_failures;
  counter_snapshot counters;
  double seconds = 0;

  bool ok() const noexcept { return canary_violations == 0 && invariant_failures.empty(); }
  std::string summary() const {
    std::string s = "ops=" + std::to_string(ops) + " guards=" + std::to_string(guard_acquisitions) +
                    " canary_violations=" + std::to_string(canary_violations) +
                    " invariant_failures=" + std::to_string(invariant_failures.size());
    if (!invariant_failures.empty())
      s += " first: " + invariant_failures.front();
    return s;
  }
};

namespace detail {

/// Randomly yields or sleeps briefly, so that threads get descheduled at
/// arbitrary points even on few cores.
class jitter {
public:
  explicit jitter(std::uint64_t seed) : rng_(seed) {}
  std::mt19937_64& rng() noexcept { return rng_; }
  void operator()() {
    const auto r = rng_();
    if ((r & 63) == 0)
      std::this_thread::yield();
    else if ((r & 4095) == 1)
      std::this_thread::sleep_for(std::chrono::microseconds(r >> 58));
  }

private:
  std::mt19937_64 rng_;
};

class failure_log {
public:
  void add(std::string msg) {
    std::lock_guard lock(mutex_);
    if (failures_.size() < 16)
      failures_.push_back(std::move(msg));
  }
  std::vector<std::string> take() {
    std::lock_guard lock(mutex_);
    return std::move(failures_);
  }

private:
  std::mutex mutex_;
  std::vector<std::string> failures_;
};

/// Runs `cfg.threads` workers through `cfg.phases` phases. `work(thread,
/// jitter, ops)` performs the thread's share of one phase; `sweep(phase)` runs
/// on thread 0 while all others wait.
template <class Scheme, class Work, class Sweep>
void run_phases(const stress_config& cfg, Work&& work, Sweep&& sweep) {
  const unsigned n = std::max(1u, cfg.threads);
  const unsigned phases = std::max(1u, cfg.phases);
  std::barrier sync(static_cast<std::ptrdiff_t>(n));
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < n; ++t) {
    threads.emplace_back([&, t] {
      jitter j(cfg.seed * 0x9E3779B97F4A7C15ull + t + 1);
      const std::uint64_t share = cfg.ops / n + (t < cfg.ops % n ? 1 : 0);
      for (unsigned p = 0; p < phases; ++p) {
        const std::uint64_t ops = share / phases + (p < share % phases ? 1 : 0);
        work(t, j, ops);
        sync.arrive_and_wait();
        if (t == 0)
          sweep(p);
        sync.arrive_and_wait();
      }
    });
  }
  for (auto& t : threads)
    t.join();
}

template <class Scheme, class Op>
void in_regions(const stress_config& cfg, jitter& j, std::uint64_t ops, Op&& op) {
  std::uint64_t done = 0;
  while (done < ops) {
    const std::uint64_t span = std::min<std::uint64_t>(ops - done, 1 + j.rng()() % std::max(1u, cfg.region_span));
    typename Scheme::region_guard region;
    for (std::uint64_t i = 0; i < span; ++i) {
      op();
      j();
    }
    done += span;
  }
}

template <class Scheme>
void stress_queue(const stress_config& cfg, failure_log& log) {
  michael_scott_queue<canary_value, Scheme> q;
  const unsigned n = std::max(1u, cfg.threads);
  std::vector<std::vector<std::uint64_t>> enqueued(n);
  std::vector<std::vector<std::uint64_t>> dequeued(n);

  run_phases<Scheme>(
      cfg,
      [&](unsigned t, jitter& j, std::uint64_t ops) {
        in_regions<Scheme>(cfg, j, ops, [&] {
          if (j.rng()() & 1) {
            const std::uint64_t v = (std::uint64_t(t) << 40) | enqueued[t].size();
            enqueued[t].push_back(v);
            q.enqueue(canary_value(v));
          } else {
            canary_value v;
            if (q.try_dequeue(v))
              dequeued[t].push_back(v.checked());
          }
        });
      },
      [&](unsigned) {});

  std::vector<std::uint64_t> in;
  std::vector<std::uint64_t> out;
  for (unsigned t = 0; t < n; ++t) {
    in.insert(in.end(), enqueued[t].begin(), enqueued[t].end());
    out.insert(out.end(), dequeued[t].begin(), dequeued[t].end());
  }
  // residue; drained by a separate thread so that it can terminate cleanly
  std::thread([&] {
    canary_value v;
    while (q.try_dequeue(v))
      out.push_back(v.checked());
  }).join();
  std::sort(in.begin(), in.end());
  std::sort(out.begin(), out.end());
  if (in != out)
    log.add("queue: dequeued multiset differs from enqueued multiset (" + std::to_string(in.size()) + " in, " +
            std::to_string(out.size()) + " out)");
  // a single consumer must see the values of each producer in enqueue order
  for (unsigned t = 0; t < n; ++t) {
    std::vector<std::uint64_t> last(n, 0);
    std::vector<bool> seen(n, false);
    for (auto v : dequeued[t]) {
      const auto producer = static_cast<unsigned>(v >> 40);
      const std::uint64_t index = v & ((std::uint64_t(1) << 40) - 1);
      if (producer < n && seen[producer] && index <= last[producer]) {
        log.add("queue: consumer " + std::to_string(t) + " saw values of producer " + std::to_string(producer) +
                " out of order");
        break;
      }
      if (producer < n) {
        seen[producer] = true;
        last[producer] = index;
      }
    }
  }
}

template <class Scheme>
void stress_list(const stress_config& cfg, failure_log& log) {
  using set_type = harris_michael_list_set<canary_value, Scheme>;
  set_type list;
  const std::uint64_t range = 2 * std::max<std::size_t>(1, cfg.list_size);
  std::atomic<std::int64_t> balance{0};

  std::thread([&] {
    std::mt19937_64 rng(cfg.seed);
    std::size_t inserted = 0;
    while (inserted < cfg.list_size)
      if (list.insert(canary_value(rng() % range)))
        ++inserted;
  }).join();
  balance = static_cast<std::int64_t>(cfg.list_size);

  auto sweep = [&](unsigned phase) {
    std::vector<std::uint64_t> keys;
    list.quiescent_for_each([&](const canary_value& k) { keys.push_back(k.checked()); });
    if (!std::is_sorted(keys.begin(), keys.end()) || std::adjacent_find(keys.begin(), keys.end()) != keys.end())
      log.add("list: keys not strictly sorted after phase " + std::to_string(phase));
    if (static_cast<std::int64_t>(keys.size()) != balance.load())
      log.add("list: size " + std::to_string(keys.size()) + " differs from successful inserts minus removes " +
              std::to_string(balance.load()) + " after phase " + std::to_string(phase));
  };

  run_phases<Scheme>(
      cfg,
      [&](unsigned, jitter& j, std::uint64_t ops) {
        std::int64_t local = 0;
        in_regions<Scheme>(cfg, j, ops, [&] {
          const auto r = j.rng()();
          const canary_value key(r % range);
          switch ((r >> 32) % 4) {
          case 0:
            local += list.insert(key) ? 1 : 0;
            break;
          case 1:
            local -= list.remove(key) ? 1 : 0;
            break;
          default:
            list.contains(key);
          }
        });
        balance.fetch_add(local);
      },
      sweep);
  // marked nodes must all have been spliced out by now
  std::size_t unmarked = 0;
  list.quiescent_for_each([&](const canary_value&) { ++unmarked; });
  if (list.quiescent_node_count() != unmarked) {
    // a last traversal splices them out; only a leftover after that is an error
    std::thread([&] { list.contains(canary_value(range)); }).join();
    unmarked = 0;
    list.quiescent_for_each([&](const canary_value&) { ++unmarked; });
    if (list.quiescent_node_count() != unmarked)
      log.add("list: delete-marked nodes left after a full traversal");
  }
}

template <class Scheme>
void stress_hashmap(const stress_config& cfg, failure_log& log) {
  using payload = canary_payload<128>;
  fifo_hash_map<std::uint64_t, payload, Scheme> map(cfg.hash_buckets, cfg.hash_capacity);
  const std::uint64_t keys = std::max<std::uint64_t>(1, cfg.hash_keys);
  const payload reference(0);
  const std::uint64_t base = reference.verify();
  std::atomic<bool> over_capacity{false};

  auto sweep = [&](unsigned phase) {
    if (map.quiescent_node_count() > cfg.hash_capacity)
      log.add("hashmap: " + std::to_string(map.quiescent_node_count()) + " live entries exceed capacity after phase " +
              std::to_string(phase));
  };

  run_phases<Scheme>(
      cfg,
      [&](unsigned, jitter& j, std::uint64_t ops) {
        // a "simulation" keeps the accessors of several results alive at once
        std::vector<std::pair<typename decltype(map)::accessor, std::uint64_t>> held;
        auto check = [&](const payload& p, std::uint64_t key) {
          if (p.verify() != base + key * (sizeof(payload) / 8 - 2) || p.first_word() != key)
            log.add("hashmap: payload of key " + std::to_string(key) + " corrupted");
        };
        in_regions<Scheme>(cfg, j, ops, [&] {
          const std::uint64_t key = j.rng()() % keys;
          auto a = map.get_or_compute(key, [](std::uint64_t k) { return payload(k); });
          check(a.value(), key);
          if (map.size() > cfg.hash_capacity)
            over_capacity = true;
          held.emplace_back(std::move(a), key);
          if (held.size() > 8 || (j.rng()() & 7) == 0) {
            for (auto& [h, k] : held)
              check(h.value(), k);
            held.clear();
          }
        });
      },
      sweep);
  if (over_capacity)
    log.add("hashmap: size exceeded capacity during the run");
}

} // namespace detail

/// Randomized multi-threaded workload with canary-checked nodes. Nodes are
/// allocated from the quarantine allocator so that an access to a reclaimed
/// node reads the poisoned object rather than recycled memory.
template <class Scheme>
stress_report stress_run(const stress_config& cfg) {
  stress_report report;
  detail::failure_log log;
  const auto violations_before = canary_violations().load();
  const auto before = perf_counters::snapshot();
  const auto start = std::chrono::steady_clock::now();
  {
    scoped_node_allocator quarantine(quarantine_node_allocator);
    switch (cfg.target) {
    case structure::queue:
      detail::stress_queue<Scheme>(cfg, log);
      break;
    case structure::list:
      detail::stress_list<Scheme>(cfg, log);
      break;
    case structure::hashmap:
      detail::stress_hashmap<Scheme>(cfg, log);
      break;
    }
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.counters = perf_counters::snapshot() - before;
  report.ops = cfg.ops;
  report.guard_acquisitions = report.counters.guard_acquisitions;
  report.canary_violations = canary_violations().load() - violations_before;
  report.invariant_failures = log.take();
  drain_quarantine();
  return report;
}

} // namespace smr::test

#endif
