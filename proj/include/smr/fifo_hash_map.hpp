#ifndef SMR_FIFO_HASH_MAP_HPP
#define SMR_FIFO_HASH_MAP_HPP

#include "harris_michael_list.hpp"
#include "michael_scott_queue.hpp"

#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <thread>
#include <utility>

namespace smr {

/// Fixed-size hash map of Harris-Michael bucket lists with a capacity limit.
/// Keys are remembered in insertion order in a Michael-Scott queue; when the
/// map is full, inserting threads evict the oldest entries first.
///
/// The live entry count never exceeds the capacity: an inserter reserves a
/// slot before it inserts and gives it back if the key showed up meanwhile.
template <class Key, class Value, class Reclaimer>
class fifo_hash_map {
  using bucket_type = harris_michael_list_map<Key, Value, Reclaimer>;

public:
  using accessor = typename bucket_type::accessor;

  fifo_hash_map(std::size_t buckets, std::size_t capacity)
      : mask_(std::bit_ceil(buckets < 2 ? std::size_t(2) : buckets) - 1),
        shift_(64 - std::countr_zero(mask_ + 1)),
        buckets_(std::make_unique<bucket_type[]>(mask_ + 1)),
        capacity_(capacity) {}

  fifo_hash_map(const fifo_hash_map&) = delete;
  fifo_hash_map& operator=(const fifo_hash_map&) = delete;

  /// Returns the entry for `key`, computing and inserting it on a miss.
  /// `hit`, if given, receives whether the entry already existed.
  template <class F>
  accessor get_or_compute(const Key& key, F&& compute, bool* hit = nullptr) {
    auto& b = bucket(key);
    if (auto a = b.get(key)) {
      if (hit != nullptr)
        *hit = true;
      return a;
    }

    reserve();
    auto [a, inserted] = b.emplace_or_get(key, [&] { return compute(key); });
    if (inserted)
      fifo_.enqueue(key);
    else
      size_.fetch_sub(1, std::memory_order_relaxed);
    if (hit != nullptr)
      *hit = !inserted;
    return std::move(a);
  }

  accessor get(const Key& key) { return bucket(key).get(key); }

  /// Entries currently stored or reserved by an ongoing insertion.
  std::size_t size() const noexcept { return size_.load(std::memory_order_relaxed); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t bucket_count() const noexcept { return mask_ + 1; }

  /// Reachable list nodes over all buckets; quiescent only.
  std::size_t quiescent_node_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i <= mask_; ++i)
      n += buckets_[i].quiescent_node_count();
    return n;
  }

  /// Nodes of the eviction queue, including its dummy node; quiescent only.
  std::size_t quiescent_queue_node_count() const { return fifo_.quiescent_node_count(); }

  std::size_t bucket_index(const Key& key) const noexcept {
    return static_cast<std::size_t>((static_cast<std::uint64_t>(key) * 0x9E3779B97F4A7C15ull) >> shift_) & mask_;
  }

private:
  bucket_type& bucket(const Key& key) noexcept { return buckets_[bucket_index(key)]; }

  void reserve() {
    std::size_t n = size_.load(std::memory_order_relaxed);
    for (;;) {
      if (n < capacity_) {
        if (size_.compare_exchange_weak(n, n + 1, std::memory_order_relaxed))
          return;
        continue;
      }
      evict_one();
      n = size_.load(std::memory_order_relaxed);
    }
  }

  void evict_one() {
    Key victim;
    if (!fifo_.try_dequeue(victim)) {
      // every slot is reserved by an insertion that has not queued its key yet
      std::this_thread::yield();
      return;
    }
    if (bucket(victim).remove(victim))
      size_.fetch_sub(1, std::memory_order_relaxed);
  }

  const std::size_t mask_;
  const unsigned shift_;
  std::unique_ptr<bucket_type[]> buckets_;
  const std::size_t capacity_;
  alignas(64) std::atomic<std::size_t> size_{0};
  michael_scott_queue<Key, Reclaimer> fifo_;
};

} // namespace smr

#endif
