#ifndef SMR_MICHAEL_SCOTT_QUEUE_HPP
#define SMR_MICHAEL_SCOTT_QUEUE_HPP

#include <atomic>
#include <cstddef>
#include <optional>
#include <utility>

namespace smr {

/// Michael and Scott's lock-free FIFO queue. Dequeued dummy nodes are retired
/// through `Reclaimer`.
template <class T, class Reclaimer>
class michael_scott_queue {
public:
  michael_scott_queue();
  ~michael_scott_queue();

  michael_scott_queue(const michael_scott_queue&) = delete;
  michael_scott_queue& operator=(const michael_scott_queue&) = delete;

  void enqueue(T value);
  bool try_dequeue(T& result);

  std::optional<T> try_dequeue() {
    T result;
    if (!try_dequeue(result))
      return std::nullopt;
    return result;
  }

  /// Nodes reachable from head, including the dummy node; quiescent only.
  std::size_t quiescent_node_count() const {
    std::size_t n = 0;
    for (auto p = head_.load(std::memory_order_acquire); p; p = p->next.load(std::memory_order_acquire))
      ++n;
    return n;
  }

private:
  struct node;

  using concurrent_ptr = typename Reclaimer::template concurrent_ptr<node, 0>;
  using marked_ptr = typename concurrent_ptr::marked_ptr;
  using guard_ptr = typename concurrent_ptr::guard_ptr;

  struct node : Reclaimer::template enable_concurrent_ptr<node> {
    node() = default;
    explicit node(T&& v) : value(std::move(v)) {}

    T value{};
    concurrent_ptr next;
  };

  alignas(64) concurrent_ptr head_;
  alignas(64) concurrent_ptr tail_;
};

template <class T, class Reclaimer>
michael_scott_queue<T, Reclaimer>::michael_scott_queue() {
  auto* n = new node();
  head_.store(n, std::memory_order_relaxed);
  tail_.store(n, std::memory_order_relaxed);
}

template <class T, class Reclaimer>
michael_scott_queue<T, Reclaimer>::~michael_scott_queue() {
  // (1) - this acquire-load synchronizes-with the release-CAS (11)
  auto n = head_.load(std::memory_order_acquire);
  while (n) {
    // (2) - this acquire-load synchronizes-with the release-CAS (6)
    auto next = n->next.load(std::memory_order_acquire);
    delete n.get();
    n = next;
  }
}

template <class T, class Reclaimer>
void michael_scott_queue<T, Reclaimer>::enqueue(T value) {
  auto* n = new node(std::move(value));

  guard_ptr t;
  for (;;) {
    // (3) - this acquire-load synchronizes-with the release-CAS (5, 7, 10)
    t.acquire(tail_, std::memory_order_acquire);

    // help a lagging tail
    // (4) - this acquire-load synchronizes-with the release-CAS (6)
    auto next = t->next.load(std::memory_order_acquire);
    if (next.get() != nullptr) {
      marked_ptr expected(t.get());
      // (5) - this release-CAS synchronizes-with the acquire-load (3)
      tail_.compare_exchange_weak(expected, next, std::memory_order_release, std::memory_order_relaxed);
      continue;
    }

    marked_ptr null{};
    // (6) - this release-CAS synchronizes-with the acquire-load (2, 4, 9)
    if (t->next.compare_exchange_weak(null, n, std::memory_order_release, std::memory_order_relaxed))
      break;
  }

  marked_ptr expected = t.get();
  // (7) - this release-CAS synchronizes-with the acquire-load (3)
  tail_.compare_exchange_strong(expected, n, std::memory_order_release, std::memory_order_relaxed);
}

template <class T, class Reclaimer>
bool michael_scott_queue<T, Reclaimer>::try_dequeue(T& result) {
  guard_ptr h;
  guard_ptr next;
  for (;;) {
    // (8) - this acquire-load synchronizes-with the release-CAS (11)
    h.acquire(head_, std::memory_order_acquire);
    // (9) - this acquire-load synchronizes-with the release-CAS (6)
    next.acquire(h->next, std::memory_order_acquire);
    if (head_.load(std::memory_order_relaxed).get() != h.get())
      continue;

    if (next.get() == nullptr)
      return false;

    marked_ptr t = tail_.load(std::memory_order_relaxed);
    if (h.get() == t.get()) {
      // (10) - this release-CAS synchronizes-with the acquire-load (3)
      tail_.compare_exchange_weak(t, next, std::memory_order_release, std::memory_order_relaxed);
      continue;
    }

    marked_ptr expected(h.get());
    // (11) - this release-CAS synchronizes-with the acquire-load (1, 8)
    if (head_.compare_exchange_weak(expected, next, std::memory_order_release, std::memory_order_relaxed)) {
      // next is the new dummy; its value is no longer reachable by others
      result = std::move(next->value);
      break;
    }
  }

  h.reclaim();
  return true;
}

} // namespace smr

#endif
