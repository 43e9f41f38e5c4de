#ifndef SMR_CONCURRENT_PTR_HPP
#define SMR_CONCURRENT_PTR_HPP

#include "marked_ptr.hpp"

#include <atomic>

namespace smr {

/// An atomic `marked_ptr`. It does not protect its target; only a guard_ptr does.
///
/// `GuardPtr` is the scheme's guard template, so that data structures can name
/// `concurrent_ptr::guard_ptr` without knowing the active scheme.
template <class T, unsigned MarkBits, template <class, unsigned> class GuardPtr>
class concurrent_ptr {
public:
  using marked_ptr = smr::marked_ptr<T, MarkBits>;
  using guard_ptr = GuardPtr<T, MarkBits>;

  concurrent_ptr() noexcept = default;
  concurrent_ptr(marked_ptr p) noexcept : ptr_(p) {} // NOLINT
  concurrent_ptr(const concurrent_ptr&) = delete;
  concurrent_ptr& operator=(const concurrent_ptr&) = delete;

  void store(marked_ptr p, std::memory_order order = std::memory_order_seq_cst) noexcept {
    ptr_.store(p, order);
  }
  void store(const guard_ptr& g, std::memory_order order = std::memory_order_seq_cst) noexcept {
    ptr_.store(g.get(), order);
  }

  marked_ptr load(std::memory_order order = std::memory_order_seq_cst) const noexcept {
    return ptr_.load(order);
  }

  bool compare_exchange_weak(marked_ptr& expected, marked_ptr desired,
                             std::memory_order success = std::memory_order_seq_cst,
                             std::memory_order failure = std::memory_order_seq_cst) noexcept {
    return ptr_.compare_exchange_weak(expected, desired, success, failure);
  }

  bool compare_exchange_strong(marked_ptr& expected, marked_ptr desired,
                               std::memory_order success = std::memory_order_seq_cst,
                               std::memory_order failure = std::memory_order_seq_cst) noexcept {
    return ptr_.compare_exchange_strong(expected, desired, success, failure);
  }

private:
  std::atomic<marked_ptr> ptr_{};
};

} // namespace smr

#endif
