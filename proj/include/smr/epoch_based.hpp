#ifndef SMR_EPOCH_BASED_HPP
#define SMR_EPOCH_BASED_HPP

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

struct epoch_based_config {
  /// Every n-th outermost region entry tries to advance the global epoch.
  static constexpr unsigned advance_interval = 100;
};

/// Epoch based reclamation.
///
/// A thread inside a critical region announces the global epoch it observed on
/// entry; the global epoch can only advance once every thread in a critical
/// region has announced the current one. A node is stamped with the global
/// epoch at retirement and deleted once the global epoch is at least two ahead.
///
/// With `Eager == false` (ER) only guard_ptrs open critical regions, so a
/// region lasts as long as some guard holds a node. With `Eager == true` (NER)
/// `region_guard` keeps the thread inside a region across many operations.
template <bool Eager, class Config = epoch_based_config>
class basic_epoch_based {
public:
  template <class T, unsigned MarkBits = 0>
  using guard_ptr = detail::region_guard_ptr<basic_epoch_based, T, MarkBits>;

  template <class T, unsigned MarkBits = 0>
  using concurrent_ptr = smr::concurrent_ptr<T, MarkBits, guard_ptr>;

  template <class T, class Deleter = std::default_delete<T>>
  using enable_concurrent_ptr = smr::enable_concurrent_ptr<T, Deleter>;

  static constexpr const char* name = Eager ? "ner" : "er";

  class region_guard {
  public:
    region_guard() noexcept {
      if constexpr (Eager)
        enter_region();
    }
    ~region_guard() {
      if constexpr (Eager)
        leave_region();
    }
    region_guard(const region_guard&) = delete;
    region_guard& operator=(const region_guard&) = delete;
  };

  static void enter_region() noexcept { local().enter_region(); }
  static void leave_region() noexcept { local().leave_region(); }
  static void retire(reclaimable* node) { local().retire(node); }

  static std::uint64_t global_epoch() noexcept { return state().epoch.load(std::memory_order_acquire); }

  /// Nodes left behind by terminated threads; quiescent view.
  static std::size_t orphan_node_count() noexcept { return state().orphans.quiescent_node_count(); }
  template <class F>
  static void for_each_orphan(F&& f) {
    state().orphans.quiescent_for_each_node(std::forward<F>(f));
  }

  /// Attempts to advance the global epoch from `epoch`; true on success.
  static bool try_advance(std::uint64_t epoch) noexcept {
    auto& s = state();
    // (1) - this seq_cst-fence pairs with the seq_cst-fence (2): a thread
    // either sees the new epoch or is seen as inside its region.
    std::atomic_thread_fence(std::memory_order_seq_cst);
    bool all_current = true;
    s.registry.for_each_in_use([&](const record& r) {
      // (4) - this acquire-load synchronizes-with the release-store (5)
      if (r.in_critical.load(std::memory_order_acquire) && r.local_epoch.load(std::memory_order_relaxed) != epoch)
        all_current = false;
    });
    if (!all_current)
      return false;
    return s.epoch.compare_exchange_strong(epoch, epoch + 1, std::memory_order_seq_cst);
  }

private:
  struct record {
    std::atomic<std::uint64_t> local_epoch{0};
    std::atomic<bool> in_critical{false};
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

  static bool reclaimable_at(const reclaimable& n, std::uint64_t epoch) noexcept { return n.retire_stamp + 2 <= epoch; }

  static void reclaim(detail::retire_list& list, std::uint64_t epoch) noexcept {
    auto pred = [epoch](const reclaimable& n) { return reclaimable_at(n, epoch); };
    std::size_t examined = list.reclaim_prefix(pred).second;
    if (!state().orphans.empty())
      examined += detail::reclaim_sublists(state().orphans, pred).second;
    if (examined != 0)
      perf_counters::count_scan_steps(examined);
  }

  class participant {
  public:
    participant() : rec_(state().registry.acquire().first) {}
    participant(const participant&) = delete;
    participant& operator=(const participant&) = delete;

    ~participant() {
      SMR_CONTRACT(depth_ == 0, "thread terminated inside a critical region");
      auto& s = state();
      for (int round = 0; round < 2 && !(retired_.empty() && s.orphans.empty()); ++round) {
        std::uint64_t epoch = s.epoch.load(std::memory_order_acquire);
        try_advance(epoch);
        reclaim(retired_, s.epoch.load(std::memory_order_acquire));
      }
      s.orphans.push(std::move(retired_));
      s.registry.release(rec_);
    }

    void enter_region() noexcept {
      if (depth_++ != 0)
        return;
      auto& s = state();
      rec_->in_critical.store(true, std::memory_order_relaxed);
      // (2) - this seq_cst-fence pairs with the seq_cst-fences (1, 3)
      std::atomic_thread_fence(std::memory_order_seq_cst);
      const std::uint64_t epoch = s.epoch.load(std::memory_order_acquire);
      if (epoch != local_epoch_) {
        local_epoch_ = epoch;
        rec_->local_epoch.store(epoch, std::memory_order_relaxed);
        reclaim(retired_, epoch);
      }
      if (++entries_ % Config::advance_interval == 0)
        try_advance(epoch);
    }

    void leave_region() noexcept {
      SMR_CONTRACT(depth_ > 0, "leave_region() without matching enter_region()");
      // (5) - this release-store synchronizes-with the acquire-load (4)
      if (--depth_ == 0)
        rec_->in_critical.store(false, std::memory_order_release);
    }

    void retire(reclaimable* node) {
      // (3) - this seq_cst-fence pairs with the seq_cst-fence (2)
      std::atomic_thread_fence(std::memory_order_seq_cst);
      node->retire_stamp = state().epoch.load(std::memory_order_seq_cst);
      retired_.push_back(node);
      perf_counters::count_retired();
    }

  private:
    record* rec_;
    unsigned depth_ = 0;
    unsigned entries_ = 0;
    std::uint64_t local_epoch_ = ~std::uint64_t(0);
    detail::retire_list retired_;
  };

  static participant& local() {
    thread_local participant p;
    return p;
  }
};

using epoch_based = basic_epoch_based<false>;
using new_epoch_based = basic_epoch_based<true>;

} // namespace smr

#endif
