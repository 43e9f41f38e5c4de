#ifndef SMR_HARRIS_MICHAEL_LIST_HPP
#define SMR_HARRIS_MICHAEL_LIST_HPP

#include <atomic>
#include <utility>

namespace smr {

/// Sorted lock-free linked list in Michael's variant of Harris' design: a node
/// is removed by first setting the mark bit of its next pointer and then
/// splicing it out; traversals splice out marked nodes they meet.
///
/// Maps keys to values; `harris_michael_list_set` is the value-less variant.
template <class Key, class Value, class Reclaimer>
class harris_michael_list_map {
  struct node;

  using concurrent_ptr = typename Reclaimer::template concurrent_ptr<node, 1>;
  using marked_ptr = typename concurrent_ptr::marked_ptr;
  using guard_ptr = typename concurrent_ptr::guard_ptr;

  struct node : Reclaimer::template enable_concurrent_ptr<node> {
    node(const Key& k, Value&& v) : key(k), value(std::move(v)) {}

    const Key key;
    Value value;
    concurrent_ptr next;
  };

public:
  /// Keeps one entry alive (guarded) while it is being used.
  class accessor {
  public:
    accessor() = default;
    const Key& key() const noexcept { return guard_->key; }
    Value& value() const noexcept { return guard_->value; }
    explicit operator bool() const noexcept { return static_cast<bool>(guard_); }
    void reset() noexcept { guard_.reset(); }

  private:
    friend class harris_michael_list_map;
    explicit accessor(guard_ptr&& g) noexcept : guard_(std::move(g)) {}
    guard_ptr guard_;
  };

  harris_michael_list_map() = default;
  harris_michael_list_map(const harris_michael_list_map&) = delete;
  harris_michael_list_map& operator=(const harris_michael_list_map&) = delete;

  /// Requires that no other thread accesses the list any more.
  ~harris_michael_list_map() {
    auto p = head_.load(std::memory_order_acquire);
    while (p) {
      auto next = p->next.load(std::memory_order_acquire);
      delete p.get();
      p = next;
    }
  }

  bool contains(const Key& key) {
    concurrent_ptr* prev;
    marked_ptr next;
    guard_ptr cur;
    guard_ptr save;
    return find(key, prev, next, cur, save);
  }

  accessor get(const Key& key) {
    concurrent_ptr* prev;
    marked_ptr next;
    guard_ptr cur;
    guard_ptr save;
    if (!find(key, prev, next, cur, save))
      return {};
    return accessor(std::move(cur));
  }

  bool insert(const Key& key, Value value = {}) {
    return emplace_or_get(key, [&] { return std::move(value); }).second;
  }

  /// Returns the entry for `key`, inserting `make_value()` if there is none.
  /// The second member is true if the entry was inserted by this call.
  template <class F>
  std::pair<accessor, bool> emplace_or_get(const Key& key, F&& make_value) {
    concurrent_ptr* prev;
    marked_ptr next;
    guard_ptr cur;
    guard_ptr save;
    node* n = nullptr;
    guard_ptr mine;
    for (;;) {
      if (find(key, prev, next, cur, save)) {
        if (n != nullptr) {
          mine.reset();
          delete n;
        }
        return {accessor(std::move(cur)), false};
      }
      if (n == nullptr) {
        n = new node(key, make_value());
        // Guard the node before it becomes reachable: a concurrent remove
        // may retire it right after the insertion.
        concurrent_ptr local(n);
        mine.acquire(local, std::memory_order_relaxed);
      }
      n->next.store(cur.get(), std::memory_order_relaxed);
      marked_ptr expected = cur.get();
      // (1) - this release-CAS synchronizes-with the acquire-loads (3, 4, 5)
      if (prev->compare_exchange_weak(expected, n, std::memory_order_release, std::memory_order_relaxed))
        return {accessor(std::move(mine)), true};
    }
  }

  bool remove(const Key& key) {
    concurrent_ptr* prev;
    marked_ptr next;
    guard_ptr cur;
    guard_ptr save;
    for (;;) {
      if (!find(key, prev, next, cur, save))
        return false;

      // (2) - this acquire-CAS synchronizes-with the release-CAS (1, 6)
      if (!cur->next.compare_exchange_weak(next, marked_ptr(next.get(), 1), std::memory_order_acquire,
                                           std::memory_order_relaxed))
        continue;

      marked_ptr expected = cur.get();
      // (6) - this release-CAS synchronizes-with the acquire-loads (3, 4, 5)
      if (prev->compare_exchange_weak(expected, next.get(), std::memory_order_release, std::memory_order_relaxed))
        cur.reclaim();
      else
        find(key, prev, next, cur, save); // splices out the marked node
      return true;
    }
  }

  /// Visits all unmarked entries; only meaningful while the list is quiescent.
  template <class F>
  void quiescent_for_each(F&& f) const {
    for (auto p = head_.load(std::memory_order_acquire); p; p = p->next.load(std::memory_order_acquire))
      if (p->next.load(std::memory_order_relaxed).mark() == 0)
        f(p->key, p->value);
  }

  /// Number of reachable nodes including marked ones; quiescent only.
  std::size_t quiescent_node_count() const {
    std::size_t n = 0;
    for (auto p = head_.load(std::memory_order_acquire); p; p = p->next.load(std::memory_order_acquire))
      ++n;
    return n;
  }

  /// Positions the cursors for `key`: on return `cur` guards the first node
  /// with a key not smaller than `key` (or is empty), `prev` is the link that
  /// pointed to it and `next` its successor. Marked nodes found on the way are
  /// spliced out and retired.
  bool find(const Key& key, concurrent_ptr*& prev, marked_ptr& next, guard_ptr& cur, guard_ptr& save) {
  retry:
    prev = &head_;
    // (3) - this acquire-load synchronizes-with the release-CAS (1, 6, 7)
    next = prev->load(std::memory_order_acquire);
    save.reset();
    for (;;) {
      // (4) - this acquire-load synchronizes-with the release-CAS (1, 6, 7)
      if (!cur.acquire_if_equal(*prev, next, std::memory_order_acquire))
        goto retry;
      if (!cur)
        return false;
      // (5) - this acquire-load synchronizes-with the release-CAS (1, 6, 7)
      next = cur->next.load(std::memory_order_acquire);
      if (next.mark() != 0) {
        // Reloads the successor and drops the mark, as in the original
        // formulation; a plain `next.get()` would do as well.
        next = cur->next.load(std::memory_order_acquire).get();
        marked_ptr expected = cur.get();
        // (7) - this release-CAS synchronizes-with the acquire-loads (3, 4, 5)
        if (!prev->compare_exchange_weak(expected, next, std::memory_order_release, std::memory_order_relaxed))
          goto retry;
        cur.reclaim();
      } else {
        if (prev->load(std::memory_order_relaxed) != cur.get())
          goto retry;
        Key ckey = cur->key;
        if (ckey >= key)
          return ckey == key;
        prev = &cur->next;
        save = std::move(cur);
      }
    }
  }

private:
  alignas(64) concurrent_ptr head_;
};

struct empty_value {};

template <class Key, class Reclaimer>
class harris_michael_list_set {
public:
  bool insert(const Key& key) { return map_.insert(key); }
  bool remove(const Key& key) { return map_.remove(key); }
  bool contains(const Key& key) { return map_.contains(key); }

  template <class F>
  void quiescent_for_each(F&& f) const {
    map_.quiescent_for_each([&](const Key& k, const empty_value&) { f(k); });
  }
  std::size_t quiescent_node_count() const { return map_.quiescent_node_count(); }

  harris_michael_list_map<Key, empty_value, Reclaimer>& map() noexcept { return map_; }

private:
  harris_michael_list_map<Key, empty_value, Reclaimer> map_;
};

} // namespace smr

#endif
