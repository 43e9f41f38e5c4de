#ifndef SMR_NODE_ALLOCATOR_HPP
#define SMR_NODE_ALLOCATOR_HPP

#include <atomic>
#include <cstddef>
#include <mutex>
#include <new>
#include <string_view>
#include <vector>

namespace smr {

/// Allocation hook used for every reclaimable node.
///
/// Both built-in allocators obtain memory from the global `operator new`, so a
/// node may be released through a different allocator than the one that
/// created it.
struct node_allocator {
  const char* name;
  void* (*allocate)(std::size_t size, std::align_val_t align);
  void (*deallocate)(void* p, std::size_t size, std::align_val_t align) noexcept;
};

namespace detail {
inline void* system_allocate(std::size_t size, std::align_val_t align) {
  return ::operator new(size, align);
}
inline void system_deallocate(void* p, std::size_t size, std::align_val_t align) noexcept {
  ::operator delete(p, size, align);
}

// Freed nodes are kept mapped until drain_quarantine(), so a dangling access
// reads the poisoned object instead of recycled memory.
struct quarantine_state {
  struct entry {
    void* p;
    std::size_t size;
    std::align_val_t align;
  };
  std::mutex mutex;
  std::vector<entry> entries;
};

inline quarantine_state& quarantine() {
  static auto* q = new quarantine_state();
  return *q;
}

inline void quarantine_deallocate(void* p, std::size_t size, std::align_val_t align) noexcept {
  auto& q = quarantine();
  std::lock_guard lock(q.mutex);
  q.entries.push_back({p, size, align});
}
} // namespace detail

inline constexpr node_allocator system_node_allocator{"system", &detail::system_allocate,
                                                      &detail::system_deallocate};
inline constexpr node_allocator quarantine_node_allocator{"quarantine", &detail::system_allocate,
                                                          &detail::quarantine_deallocate};

namespace detail {
inline std::atomic<const node_allocator*>& active_allocator() {
  static std::atomic<const node_allocator*> active{&system_node_allocator};
  return active;
}
} // namespace detail

inline const node_allocator& current_node_allocator() noexcept {
  return *detail::active_allocator().load(std::memory_order_acquire);
}

inline void set_node_allocator(const node_allocator& a) noexcept {
  detail::active_allocator().store(&a, std::memory_order_release);
}

/// Looks up a built-in allocator by name; returns nullptr for unknown names.
inline const node_allocator* find_node_allocator(std::string_view name) noexcept {
  if (name == system_node_allocator.name)
    return &system_node_allocator;
  if (name == quarantine_node_allocator.name)
    return &quarantine_node_allocator;
  return nullptr;
}

/// Releases all quarantined memory. Only call once no thread can touch it.
inline std::size_t drain_quarantine() {
  auto& q = detail::quarantine();
  std::vector<detail::quarantine_state::entry> entries;
  {
    std::lock_guard lock(q.mutex);
    entries.swap(q.entries);
  }
  for (auto& e : entries)
    ::operator delete(e.p, e.size, e.align);
  return entries.size();
}

/// RAII switch of the active node allocator.
class scoped_node_allocator {
public:
  explicit scoped_node_allocator(const node_allocator& a) : previous_(&current_node_allocator()) {
    set_node_allocator(a);
  }
  ~scoped_node_allocator() { set_node_allocator(*previous_); }
  scoped_node_allocator(const scoped_node_allocator&) = delete;
  scoped_node_allocator& operator=(const scoped_node_allocator&) = delete;

private:
  const node_allocator* previous_;
};

} // namespace smr

#endif
