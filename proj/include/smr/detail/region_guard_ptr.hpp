#ifndef SMR_DETAIL_REGION_GUARD_PTR_HPP
#define SMR_DETAIL_REGION_GUARD_PTR_HPP

#include "../contract.hpp"
#include "../marked_ptr.hpp"
#include "../perf_counters.hpp"

#include <atomic>
#include <utility>

namespace smr::detail {

/// guard_ptr for schemes whose protection is "being inside a critical region".
///
/// A non-empty guard keeps the owning thread inside a region; region nesting
/// is handled by the scheme, so a guard inside a region_guard only bumps a
/// depth counter. Guards are move-only: moving one transfers the region
/// reference along with the target.
template <class Scheme, class T, unsigned MarkBits>
class region_guard_ptr {
public:
  using marked_ptr = smr::marked_ptr<T, MarkBits>;
  using concurrent_ptr = typename Scheme::template concurrent_ptr<T, MarkBits>;

  region_guard_ptr() noexcept = default;
  region_guard_ptr(const region_guard_ptr&) = delete;
  region_guard_ptr& operator=(const region_guard_ptr&) = delete;

  region_guard_ptr(region_guard_ptr&& other) noexcept
      : ptr_(std::exchange(other.ptr_, marked_ptr{})), in_region_(std::exchange(other.in_region_, false)) {}

  region_guard_ptr& operator=(region_guard_ptr&& other) noexcept {
    if (this != &other) {
      reset();
      ptr_ = std::exchange(other.ptr_, marked_ptr{});
      in_region_ = std::exchange(other.in_region_, false);
    }
    return *this;
  }

  ~region_guard_ptr() { reset(); }

  /// Takes a snapshot of `p` and protects it. A null snapshot leaves the guard
  /// empty (the region is entered and left again).
  void acquire(const concurrent_ptr& p, std::memory_order order = std::memory_order_seq_cst) noexcept {
    enter();
    ptr_ = p.load(order);
    if (!ptr_)
      reset();
    else
      perf_counters::count_guard_acquisition();
  }

  /// Like acquire, but gives up if `p` does not hold `expected` (marks included).
  bool acquire_if_equal(const concurrent_ptr& p, const marked_ptr& expected,
                        std::memory_order order = std::memory_order_seq_cst) noexcept {
    enter();
    auto actual = p.load(order);
    if (!actual || actual != expected) {
      reset();
      return actual == expected;
    }
    ptr_ = actual;
    perf_counters::count_guard_acquisition();
    return true;
  }

  void reset() noexcept {
    ptr_.reset();
    if (in_region_) {
      in_region_ = false;
      Scheme::leave_region();
    }
  }

  /// Hands the target to the scheme for deferred deletion and empties the guard.
  /// The caller must already have unlinked the node.
  void reclaim() noexcept {
    SMR_CONTRACT(ptr_.get() != nullptr, "reclaim() called on an empty guard_ptr");
    Scheme::retire(ptr_.get());
    reset();
  }

  void swap(region_guard_ptr& other) noexcept {
    std::swap(ptr_, other.ptr_);
    std::swap(in_region_, other.in_region_);
  }

  T* get() const noexcept { return ptr_.get(); }
  marked_ptr ptr() const noexcept { return ptr_; }
  std::uintptr_t mark() const noexcept { return ptr_.mark(); }
  T* operator->() const noexcept { return ptr_.get(); }
  T& operator*() const noexcept { return *ptr_.get(); }
  explicit operator bool() const noexcept { return ptr_.get() != nullptr; }
  operator marked_ptr() const noexcept { return ptr_; } // NOLINT

private:
  void enter() noexcept {
    if (!in_region_) {
      Scheme::enter_region();
      in_region_ = true;
    }
  }

  marked_ptr ptr_{};
  bool in_region_ = false;
};

} // namespace smr::detail

#endif
