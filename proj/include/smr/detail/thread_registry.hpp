#ifndef SMR_DETAIL_THREAD_REGISTRY_HPP
#define SMR_DETAIL_THREAD_REGISTRY_HPP

#include <atomic>
#include <utility>

namespace smr::detail {

/// Push-only registry of per-thread records.
///
/// Records are never freed while the registry lives: a terminating thread
/// parks its record and a new thread may claim it again. Scanning threads can
/// therefore walk the list at any time.
template <class Record>
class thread_registry {
  struct entry : Record {
    std::atomic<bool> in_use{false};
    entry* next = nullptr;
  };

public:
  thread_registry() = default;
  thread_registry(const thread_registry&) = delete;
  thread_registry& operator=(const thread_registry&) = delete;

  ~thread_registry() {
    entry* e = head_.load(std::memory_order_acquire);
    while (e != nullptr) {
      entry* next = e->next;
      delete e;
      e = next;
    }
  }

  /// Claims a parked record or allocates a new one. The second member tells
  /// whether the record is fresh.
  std::pair<Record*, bool> acquire() {
    for (entry* e = head_.load(std::memory_order_acquire); e != nullptr; e = e->next) {
      bool expected = false;
      if (!e->in_use.load(std::memory_order_relaxed) &&
          e->in_use.compare_exchange_strong(expected, true, std::memory_order_acquire, std::memory_order_relaxed))
        return {e, false};
    }
    auto* e = new entry();
    e->in_use.store(true, std::memory_order_relaxed);
    e->next = head_.load(std::memory_order_relaxed);
    while (!head_.compare_exchange_weak(e->next, e, std::memory_order_release, std::memory_order_relaxed)) {
    }
    return {e, true};
  }

  void release(Record* r) noexcept { static_cast<entry*>(r)->in_use.store(false, std::memory_order_release); }

  static bool in_use(const Record& r) noexcept {
    return static_cast<const entry&>(r).in_use.load(std::memory_order_acquire);
  }

  /// Visits every record ever created, parked or not.
  template <class F>
  void for_each(F&& f) const {
    for (entry* e = head_.load(std::memory_order_acquire); e != nullptr; e = e->next)
      f(static_cast<Record&>(*e));
  }

  template <class F>
  void for_each_in_use(F&& f) const {
    for (entry* e = head_.load(std::memory_order_acquire); e != nullptr; e = e->next)
      if (e->in_use.load(std::memory_order_acquire))
        f(static_cast<Record&>(*e));
  }

private:
  std::atomic<entry*> head_{nullptr};
};

} // namespace smr::detail

#endif
