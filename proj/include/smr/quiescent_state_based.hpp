#ifndef SMR_QUIESCENT_STATE_BASED_HPP
#define SMR_QUIESCENT_STATE_BASED_HPP

#include "concurrent_ptr.hpp"
#include "contract.hpp"
#include "perf_counters.hpp"
#include "reclaimable.hpp"
#include "detail/region_guard_ptr.hpp"
#include "detail/retire_list.hpp"
#include "detail/thread_registry.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>

namespace smr {

struct quiescent_state_based_config {
  /// Every n-th quiescent state tries to advance the global epoch.
  static constexpr unsigned advance_interval = 100;
};

/// Quiescent state based reclamation.
///
/// Every registered thread announces the global epoch whenever it passes a
/// quiescent state (leaving its outermost critical region). The global epoch
/// advances once all registered threads announced the current one, so unlike
/// epoch based reclamation an idle registered thread blocks progress. Nodes
/// are stamped with the global epoch and deleted two epochs later.
template <class Config = quiescent_state_based_config>
class basic_quiescent_state_based {
public:
  template <class T, unsigned MarkBits = 0>
  using guard_ptr = detail::region_guard_ptr<basic_quiescent_state_based, T, MarkBits>;

  template <class T, unsigned MarkBits = 0>
  using concurrent_ptr = smr::concurrent_ptr<T, MarkBits, guard_ptr>;

  template <class T, class Deleter = std::default_delete<T>>
  using enable_concurrent_ptr = smr::enable_concurrent_ptr<T, Deleter>;

  static constexpr const char* name = "qsr";

  class region_guard {
  public:
    region_guard() noexcept { enter_region(); }
    ~region_guard() { leave_region(); }
    region_guard(const region_guard&) = delete;
    region_guard& operator=(const region_guard&) = delete;
  };

  static void enter_region() noexcept { local().enter_region(); }
  static void leave_region() noexcept { local().leave_region(); }
  static void retire(reclaimable* node) { local().retire(node); }

  static std::uint64_t global_epoch() noexcept { return state().epoch.load(std::memory_order_acquire); }

  static std::size_t orphan_node_count() noexcept { return state().orphans.quiescent_node_count(); }
  template <class F>
  static void for_each_orphan(F&& f) {
    state().orphans.quiescent_for_each_node(std::forward<F>(f));
  }

  static bool try_advance(std::uint64_t epoch) noexcept {
    auto& s = state();
    // (1) - this seq_cst-fence pairs with the seq_cst-fences (2, 5)
    std::atomic_thread_fence(std::memory_order_seq_cst);
    bool all_current = true;
    s.registry.for_each_in_use([&](const record& r) {
      // (6) - this acquire-load synchronizes-with the release-store (4)
      if (r.local_epoch.load(std::memory_order_acquire) != epoch)
        all_current = false;
    });
    if (!all_current)
      return false;
    return s.epoch.compare_exchange_strong(epoch, epoch + 1, std::memory_order_seq_cst);
  }

private:
  struct record {
    std::atomic<std::uint64_t> local_epoch{0};
  };

  struct shared_state {
    std::atomic<std::uint64_t> epoch{0};
    detail::thread_registry<record> registry;
    detail::sublist_stack orphans;
  };

  static shared_state& state() {
    static auto* s = new shared_state();
    return *s;
  }

  static void reclaim(detail::retire_list& list, std::uint64_t epoch) noexcept {
    auto pred = [epoch](const reclaimable& n) { return n.retire_stamp + 2 <= epoch; };
    std::size_t examined = list.reclaim_prefix(pred).second;
    if (!state().orphans.empty())
      examined += detail::reclaim_sublists(state().orphans, pred).second;
    if (examined != 0)
      perf_counters::count_scan_steps(examined);
  }

  class participant {
  public:
    participant() : rec_(state().registry.acquire().first) {
      local_epoch_ = state().epoch.load(std::memory_order_acquire);
      rec_->local_epoch.store(local_epoch_, std::memory_order_relaxed);
      // (2) - this seq_cst-fence pairs with the seq_cst-fences (1, 3)
      std::atomic_thread_fence(std::memory_order_seq_cst);
    }
    participant(const participant&) = delete;
    participant& operator=(const participant&) = delete;

    ~participant() {
      SMR_CONTRACT(depth_ == 0, "thread terminated inside a critical region");
      auto& s = state();
      s.registry.release(rec_);
      for (int round = 0; round < 2 && !(retired_.empty() && s.orphans.empty()); ++round) {
        try_advance(s.epoch.load(std::memory_order_acquire));
        reclaim(retired_, s.epoch.load(std::memory_order_acquire));
      }
      s.orphans.push(std::move(retired_));
    }

    void enter_region() noexcept { ++depth_; }

    void leave_region() noexcept {
      SMR_CONTRACT(depth_ > 0, "leave_region() without matching enter_region()");
      if (--depth_ == 0)
        quiescent_state();
    }

    void retire(reclaimable* node) {
      // (3) - this seq_cst-fence pairs with the seq_cst-fences (2, 5)
      std::atomic_thread_fence(std::memory_order_seq_cst);
      node->retire_stamp = state().epoch.load(std::memory_order_seq_cst);
      retired_.push_back(node);
      perf_counters::count_retired();
    }

  private:
    void quiescent_state() noexcept {
      auto& s = state();
      const std::uint64_t epoch = s.epoch.load(std::memory_order_acquire);
      if (epoch != local_epoch_) {
        local_epoch_ = epoch;
        // (4) - this release-store synchronizes-with the acquire-load (6)
        rec_->local_epoch.store(epoch, std::memory_order_release);
        // (5) - this seq_cst-fence pairs with the seq_cst-fences (1, 3)
        std::atomic_thread_fence(std::memory_order_seq_cst);
        reclaim(retired_, epoch);
      }
      if (++checkpoints_ % Config::advance_interval == 0)
        try_advance(epoch);
    }

    record* rec_;
    unsigned depth_ = 0;
    unsigned checkpoints_ = 0;
    std::uint64_t local_epoch_ = 0;
    detail::retire_list retired_;
  };

  static participant& local() {
    thread_local participant p;
    return p;
  }
};

using quiescent_state_based = basic_quiescent_state_based<>;

} // namespace smr

#endif
