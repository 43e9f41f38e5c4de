#ifndef SMR_HAZARD_POINTER_HPP
#define SMR_HAZARD_POINTER_HPP

#include "concurrent_ptr.hpp"
#include "contract.hpp"
#include "marked_ptr.hpp"
#include "perf_counters.hpp"
#include "reclaimable.hpp"
#include "detail/retire_list.hpp"
#include "detail/thread_registry.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <utility>
#include <vector>

namespace smr {

/// Number of retired nodes a thread may accumulate before it scans the
/// hazard pointers: a constant base plus a multiple of all hazard slots.
constexpr std::size_t hp_threshold(std::size_t total_slots, std::size_t base = 100, std::size_t factor = 2) noexcept {
  return base + factor * total_slots;
}

/// The same for `threads` threads with `slots_per_thread` slots each.
constexpr std::size_t hp_threshold_for(std::size_t threads, std::size_t slots_per_thread, std::size_t base = 100,
                                       std::size_t factor = 2) noexcept {
  return hp_threshold(threads * slots_per_thread, base, factor);
}

struct hazard_pointer_config {
  /// Hazard slots every thread owns; more are added in blocks of this size.
  static constexpr std::size_t slots_per_thread = 4;
  static constexpr std::size_t threshold_base = 100;
  static constexpr std::size_t threshold_factor = 2;
};

/// Hazard pointer reclamation.
///
/// A guard_ptr publishes its target in a hazard slot and validates that the
/// source still holds it. Retired nodes are collected locally; once there are
/// more than `hp_threshold(total slots)` of them the thread scans all slots and
/// deletes every node that is not protected.
template <class Config = hazard_pointer_config>
class basic_hazard_pointer {
  using slot = std::atomic<const void*>;

  struct slot_block {
    slot slots[Config::slots_per_thread] = {};
    slot_block* next = nullptr;
  };

  struct record {
    slot_block first;
    /// Additional blocks; owned by the record and kept across reuse.
    std::atomic<slot_block*> overflow{nullptr};

    template <class F>
    void for_each_slot(F&& f) const {
      for (auto& s : first.slots)
        f(s);
      for (auto* b = overflow.load(std::memory_order_acquire); b != nullptr; b = b->next)
        for (auto& s : b->slots)
          f(s);
    }
  };

public:
  template <class T, unsigned MarkBits = 0>
  class guard_ptr;

  template <class T, unsigned MarkBits = 0>
  using concurrent_ptr = smr::concurrent_ptr<T, MarkBits, guard_ptr>;

  template <class T, class Deleter = std::default_delete<T>>
  using enable_concurrent_ptr = smr::enable_concurrent_ptr<T, Deleter>;

  static constexpr const char* name = "hpr";

  /// Hazard pointers need no critical regions.
  class region_guard {
  public:
    region_guard() noexcept {}
    region_guard(const region_guard&) = delete;
    region_guard& operator=(const region_guard&) = delete;
  };

  static void retire(reclaimable* node) { local().retire(node); }

  /// Hazard slots of all registered threads.
  static std::size_t total_slots() noexcept { return state().total_slots.load(std::memory_order_relaxed); }
  static std::size_t threshold() noexcept {
    return hp_threshold(total_slots(), Config::threshold_base, Config::threshold_factor);
  }
  /// Retired nodes the calling thread currently holds.
  static std::size_t local_retired_count() { return local().retired_.size(); }
  static std::size_t orphan_node_count() noexcept { return state().orphans.quiescent_node_count(); }
  /// Scans the hazard slots now, regardless of the threshold.
  static void scan() { local().scan(); }

  template <class T, unsigned MarkBits>
  class guard_ptr {
  public:
    using marked_ptr = smr::marked_ptr<T, MarkBits>;
    using concurrent_ptr = basic_hazard_pointer::concurrent_ptr<T, MarkBits>;

    guard_ptr() noexcept = default;
    guard_ptr(const guard_ptr&) = delete;
    guard_ptr& operator=(const guard_ptr&) = delete;

    guard_ptr(guard_ptr&& other) noexcept
        : ptr_(std::exchange(other.ptr_, marked_ptr{})), slot_(std::exchange(other.slot_, nullptr)) {}

    guard_ptr& operator=(guard_ptr&& other) noexcept {
      if (this != &other) {
        reset();
        ptr_ = std::exchange(other.ptr_, marked_ptr{});
        slot_ = std::exchange(other.slot_, nullptr);
      }
      return *this;
    }

    ~guard_ptr() { reset(); }

    void acquire(const concurrent_ptr& p, std::memory_order order = std::memory_order_seq_cst) noexcept {
      auto value = p.load(std::memory_order_relaxed);
      for (;;) {
        if (!value) {
          reset();
          return;
        }
        if (slot_ == nullptr)
          slot_ = local().acquire_slot();
        slot_->store(hazard_of(value.get()), std::memory_order_relaxed);
        // (1) - this seq_cst-fence pairs with the seq_cst-fence (3) of the scan
        std::atomic_thread_fence(std::memory_order_seq_cst);
        auto current = p.load(order);
        if (current.get() == value.get()) {
          ptr_ = current;
          perf_counters::count_guard_acquisition();
          return;
        }
        value = current;
      }
    }

    bool acquire_if_equal(const concurrent_ptr& p, const marked_ptr& expected,
                          std::memory_order order = std::memory_order_seq_cst) noexcept {
      if (!expected) {
        reset();
        return p.load(order) == expected;
      }
      if (slot_ == nullptr)
        slot_ = local().acquire_slot();
      slot_->store(hazard_of(expected.get()), std::memory_order_relaxed);
      // (2) - this seq_cst-fence pairs with the seq_cst-fence (3) of the scan
      std::atomic_thread_fence(std::memory_order_seq_cst);
      auto current = p.load(order);
      if (current != expected) {
        reset();
        return false;
      }
      ptr_ = current;
      perf_counters::count_guard_acquisition();
      return true;
    }

    void reset() noexcept {
      ptr_.reset();
      if (slot_ != nullptr) {
        slot_->store(nullptr, std::memory_order_release);
        local().release_slot(slot_);
        slot_ = nullptr;
      }
    }

    void reclaim() noexcept {
      SMR_CONTRACT(ptr_.get() != nullptr, "reclaim() called on an empty guard_ptr");
      auto* node = ptr_.get();
      reset();
      basic_hazard_pointer::retire(node);
    }

    void swap(guard_ptr& other) noexcept {
      std::swap(ptr_, other.ptr_);
      std::swap(slot_, other.slot_);
    }

    T* get() const noexcept { return ptr_.get(); }
    marked_ptr ptr() const noexcept { return ptr_; }
    std::uintptr_t mark() const noexcept { return ptr_.mark(); }
    T* operator->() const noexcept { return ptr_.get(); }
    T& operator*() const noexcept { return *ptr_.get(); }
    explicit operator bool() const noexcept { return ptr_.get() != nullptr; }
    operator marked_ptr() const noexcept { return ptr_; } // NOLINT

  private:
    // Slots hold the address of the reclaimable base, which is what the scan
    // compares against.
    static const void* hazard_of(T* p) noexcept { return static_cast<const reclaimable*>(p); }

    marked_ptr ptr_{};
    slot* slot_ = nullptr;
  };

private:
  struct shared_state {
    std::atomic<std::size_t> total_slots{0};
    detail::thread_registry<record> registry;
    detail::sublist_stack orphans;
  };

  static shared_state& state() {
    static auto* s = new shared_state();
    return *s;
  }

  class participant {
  public:
    participant() : rec_(state().registry.acquire().first) {
      rec_->for_each_slot([this](const slot& s) { free_.push_back(const_cast<slot*>(&s)); });
      capacity_ = free_.size();
      state().total_slots.fetch_add(capacity_, std::memory_order_relaxed);
    }
    participant(const participant&) = delete;
    participant& operator=(const participant&) = delete;

    ~participant() {
      SMR_CONTRACT(free_.size() == capacity_, "thread terminated while holding a guard_ptr");
      auto& s = state();
      s.total_slots.fetch_sub(capacity_, std::memory_order_relaxed);
      s.registry.release(rec_);
      scan();
      s.orphans.push(std::move(retired_));
    }

    slot* acquire_slot() {
      if (free_.empty())
        add_block();
      auto* s = free_.back();
      free_.pop_back();
      return s;
    }

    void release_slot(slot* s) { free_.push_back(s); }

    void retire(reclaimable* node) {
      retired_.push_back(node);
      perf_counters::count_retired();
      if (retired_.size() > threshold())
        scan();
    }

    void scan() {
      auto& s = state();
      // adopt nodes of terminated threads
      for (auto* sub = s.orphans.steal_all(); sub != nullptr;) {
        auto* next = sub->next;
        auto [first, last] = sub->nodes.release();
        std::size_t n = 0;
        for (auto* p = first; p != nullptr; p = p->next_retired)
          ++n;
        retired_.append(first, last, n);
        delete sub;
        sub = next;
      }

      // (3) - this seq_cst-fence pairs with the seq_cst-fences (1, 2)
      std::atomic_thread_fence(std::memory_order_seq_cst);
      hazards_.clear();
      s.registry.for_each([this](const record& r) {
        r.for_each_slot([this](const slot& sl) {
          // (4) - this acquire-load synchronizes-with the release-store in reset
          if (auto* p = sl.load(std::memory_order_acquire))
            hazards_.push_back(p);
        });
      });
      std::sort(hazards_.begin(), hazards_.end());

      auto [reclaimed, examined] = retired_.reclaim_if([this](const reclaimable& n) {
        return !std::binary_search(hazards_.begin(), hazards_.end(), static_cast<const void*>(&n));
      });
      perf_counters::count_scan_steps(examined + hazards_.size());
    }

  private:
    void add_block() {
      auto* b = new slot_block();
      for (auto& s : b->slots)
        free_.push_back(&s);
      capacity_ += Config::slots_per_thread;
      state().total_slots.fetch_add(Config::slots_per_thread, std::memory_order_relaxed);
      // Blocks are prepended: a concurrent scan either sees the new block or
      // none of its slots can be in use yet.
      b->next = rec_->overflow.load(std::memory_order_relaxed);
      rec_->overflow.store(b, std::memory_order_release);
    }

    friend class basic_hazard_pointer;

    record* rec_;
    std::vector<slot*> free_;
    std::size_t capacity_ = 0;
    detail::retire_list retired_;
    std::vector<const void*> hazards_;
  };

  static participant& local() {
    thread_local participant p;
    return p;
  }

  friend class participant;
};

using hazard_pointer = basic_hazard_pointer<>;

} // namespace smr

#endif
