#ifndef SMR_PERF_COUNTERS_HPP
#define SMR_PERF_COUNTERS_HPP

#include <atomic>
#include <cstdint>

namespace smr {

/// Aggregated view of the node lifecycle counters.
struct counter_snapshot {
  std::uint64_t allocated = 0;
  std::uint64_t reclaimed = 0;
  std::uint64_t retired = 0;
  std::uint64_t scan_steps = 0;
  std::uint64_t guard_acquisitions = 0;

  std::int64_t unreclaimed() const noexcept {
    return static_cast<std::int64_t>(allocated) - static_cast<std::int64_t>(reclaimed);
  }

  friend counter_snapshot operator-(const counter_snapshot& a, const counter_snapshot& b) noexcept {
    return {a.allocated - b.allocated, a.reclaimed - b.reclaimed, a.retired - b.retired,
            a.scan_steps - b.scan_steps, a.guard_acquisitions - b.guard_acquisitions};
  }
};

/// Thread-local performance counters.
///
/// Each thread owns one cache-line sized block and is the only writer. The
/// blocks live in a push-only registry and are never freed, so a sampling
/// thread can sum them at any time; such reads are racy snapshots of monotonic
/// counters and need no ordering beyond relaxed.
class perf_counters {
public:
  struct alignas(64) block {
    std::atomic<std::uint64_t> allocated{0};
    std::atomic<std::uint64_t> reclaimed{0};
    std::atomic<std::uint64_t> retired{0};
    std::atomic<std::uint64_t> scan_steps{0};
    std::atomic<std::uint64_t> guard_acquisitions{0};
    std::atomic<bool> in_use{false};
    block* next = nullptr;

    static void bump(std::atomic<std::uint64_t>& c, std::uint64_t n = 1) noexcept {
      // single writer: a load/store pair is enough and avoids a locked RMW
      c.store(c.load(std::memory_order_relaxed) + n, std::memory_order_relaxed);
    }
  };

  static block& local() noexcept {
    if (tls_block_ == nullptr)
      tls_block_ = acquire_block();
    return *tls_block_;
  }

  static void count_allocated() noexcept { block::bump(local().allocated); }
  static void count_reclaimed() noexcept { block::bump(local().reclaimed); }
  static void count_retired(std::uint64_t n = 1) noexcept { block::bump(local().retired, n); }
  static void count_scan_steps(std::uint64_t n) noexcept { block::bump(local().scan_steps, n); }
  static void count_guard_acquisition() noexcept { block::bump(local().guard_acquisitions); }

  static counter_snapshot snapshot() noexcept {
    counter_snapshot s;
    for (block* b = registry_head().load(std::memory_order_acquire); b != nullptr; b = b->next) {
      s.allocated += b->allocated.load(std::memory_order_relaxed);
      s.reclaimed += b->reclaimed.load(std::memory_order_relaxed);
      s.retired += b->retired.load(std::memory_order_relaxed);
      s.scan_steps += b->scan_steps.load(std::memory_order_relaxed);
      s.guard_acquisitions += b->guard_acquisitions.load(std::memory_order_relaxed);
    }
    return s;
  }

private:
  static std::atomic<block*>& registry_head() noexcept {
    static std::atomic<block*> head{nullptr};
    return head;
  }

  static block* acquire_block() noexcept {
    auto& head = registry_head();
    for (block* b = head.load(std::memory_order_acquire); b != nullptr; b = b->next) {
      bool expected = false;
      if (!b->in_use.load(std::memory_order_relaxed) &&
          b->in_use.compare_exchange_strong(expected, true, std::memory_order_acquire))
        return register_release(b);
    }
    auto* b = new block();
    b->in_use.store(true, std::memory_order_relaxed);
    b->next = head.load(std::memory_order_relaxed);
    while (!head.compare_exchange_weak(b->next, b, std::memory_order_release, std::memory_order_relaxed)) {
    }
    return register_release(b);
  }

  struct releaser {
    block* owned = nullptr;
    ~releaser() {
      releaser_gone_ = true;
      if (owned != nullptr) {
        owned->in_use.store(false, std::memory_order_release);
        tls_block_ = nullptr;
      }
    }
  };

  // Counters may still be touched by other thread_local destructors after the
  // releaser is gone; such a late block stays claimed forever.
  static block* register_release(block* b) noexcept {
    if (!releaser_gone_) {
      thread_local releaser r;
      r.owned = b;
    }
    return b;
  }

  static inline thread_local block* tls_block_ = nullptr;
  static inline thread_local bool releaser_gone_ = false;
};

} // namespace smr

#endif
