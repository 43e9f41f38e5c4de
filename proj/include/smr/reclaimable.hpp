#ifndef SMR_RECLAIMABLE_HPP
#define SMR_RECLAIMABLE_HPP

#include "node_allocator.hpp"
#include "perf_counters.hpp"

#include <cstdint>
#include <memory>
#include <new>

namespace smr {

/// Base of every node that can be handed to a reclamation scheme.
///
/// A retired node carries the intrusive link of the retire-list it sits in and
/// the scheme-specific stamp (retire stamp, epoch or generation). Construction
/// and destruction feed the allocated/reclaimed performance counters.
class reclaimable {
public:
  reclaimable(const reclaimable&) = delete;
  reclaimable& operator=(const reclaimable&) = delete;

  /// Runs the node's deleter; called exactly once by the scheme.
  virtual void delete_self() noexcept = 0;

  reclaimable* next_retired = nullptr;
  std::uint64_t retire_stamp = 0;

  static void* operator new(std::size_t size) {
    return current_node_allocator().allocate(size, std::align_val_t{alignof(std::max_align_t)});
  }
  static void* operator new(std::size_t size, std::align_val_t align) {
    return current_node_allocator().allocate(size, align);
  }
  static void operator delete(void* p, std::size_t size) noexcept {
    current_node_allocator().deallocate(p, size, std::align_val_t{alignof(std::max_align_t)});
  }
  static void operator delete(void* p, std::size_t size, std::align_val_t align) noexcept {
    current_node_allocator().deallocate(p, size, align);
  }

protected:
  reclaimable() noexcept { perf_counters::count_allocated(); }
  virtual ~reclaimable() { perf_counters::count_reclaimed(); }
};

/// CRTP helper: derive `T` from `enable_concurrent_ptr<T>` to make it reclaimable.
template <class T, class Deleter = std::default_delete<T>>
class enable_concurrent_ptr : public reclaimable {
public:
  void delete_self() noexcept override { Deleter{}(static_cast<T*>(this)); }

protected:
  enable_concurrent_ptr() noexcept = default;
};

} // namespace smr

#endif
