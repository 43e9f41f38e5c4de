#ifndef SMR_DETAIL_RETIRE_LIST_HPP
#define SMR_DETAIL_RETIRE_LIST_HPP

#include "../reclaimable.hpp"

#include <atomic>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <utility>

namespace smr::detail {

/// Thread-local FIFO of retired nodes, linked through `reclaimable::next_retired`.
class retire_list {
public:
  retire_list() noexcept = default;
  retire_list(const retire_list&) = delete;
  retire_list& operator=(const retire_list&) = delete;
  retire_list(retire_list&& other) noexcept { *this = std::move(other); }
  retire_list& operator=(retire_list&& other) noexcept {
    std::swap(first_, other.first_);
    std::swap(last_, other.last_);
    std::swap(size_, other.size_);
    return *this;
  }

  void push_back(reclaimable* node) noexcept {
    node->next_retired = nullptr;
    if (last_ == nullptr)
      first_ = node;
    else
      last_->next_retired = node;
    last_ = node;
    ++size_;
  }

  /// Appends a chain [first, last] holding `n` nodes.
  void append(reclaimable* first, reclaimable* last, std::size_t n) noexcept {
    if (first == nullptr)
      return;
    if (last_ == nullptr)
      first_ = first;
    else
      last_->next_retired = first;
    last_ = last;
    last_->next_retired = nullptr;
    size_ += n;
  }

  bool empty() const noexcept { return first_ == nullptr; }
  std::size_t size() const noexcept { return size_; }
  reclaimable* front() const noexcept { return first_; }
  reclaimable* back() const noexcept { return last_; }

  /// Deletes the longest prefix whose nodes satisfy `reclaimable_pred` and
  /// stops at the first node that does not. Returns (reclaimed, examined).
  template <class Pred>
  std::pair<std::size_t, std::size_t> reclaim_prefix(Pred&& reclaimable_pred) noexcept {
    std::size_t reclaimed = 0;
    std::size_t examined = 0;
    while (first_ != nullptr) {
      ++examined;
      if (!reclaimable_pred(*first_))
        break;
      auto* node = first_;
      first_ = node->next_retired;
      node->delete_self();
      ++reclaimed;
    }
    if (first_ == nullptr)
      last_ = nullptr;
    size_ -= reclaimed;
    return {reclaimed, examined};
  }

  /// Deletes every node satisfying `pred`, keeping the relative order of the rest.
  template <class Pred>
  std::pair<std::size_t, std::size_t> reclaim_if(Pred&& pred) noexcept {
    std::size_t reclaimed = 0;
    std::size_t examined = 0;
    reclaimable* keep_first = nullptr;
    reclaimable* keep_last = nullptr;
    for (auto* node = first_; node != nullptr;) {
      auto* next = node->next_retired;
      ++examined;
      if (pred(*node)) {
        node->delete_self();
        ++reclaimed;
      } else {
        node->next_retired = nullptr;
        if (keep_last == nullptr)
          keep_first = node;
        else
          keep_last->next_retired = node;
        keep_last = node;
      }
      node = next;
    }
    first_ = keep_first;
    last_ = keep_last;
    size_ -= reclaimed;
    return {reclaimed, examined};
  }

  /// Deletes every node unconditionally.
  std::size_t clear() noexcept {
    return reclaim_prefix([](const reclaimable&) { return true; }).first;
  }

  /// Detaches the whole chain, leaving this list empty.
  std::pair<reclaimable*, reclaimable*> release() noexcept {
    auto result = std::make_pair(first_, last_);
    first_ = last_ = nullptr;
    size_ = 0;
    return result;
  }

private:
  reclaimable* first_ = nullptr;
  reclaimable* last_ = nullptr;
  std::size_t size_ = 0;
};

/// Header of one sublist in a global retire-list.
struct retired_sublist {
  retire_list nodes;
  retired_sublist* next = nullptr;
};

/// Lock-free global list of retired sublists. Producers push, consumers detach
/// the whole chain at once, so there is no pop and hence no ABA on the head.
class sublist_stack {
public:
  sublist_stack() noexcept = default;
  sublist_stack(const sublist_stack&) = delete;
  sublist_stack& operator=(const sublist_stack&) = delete;
  ~sublist_stack() { delete_chain(steal_all()); }

  void push(retire_list&& nodes) {
    if (nodes.empty())
      return;
    auto* s = new retired_sublist{std::move(nodes), nullptr};
    push_chain(s, s);
  }

  /// Pushes an already linked chain of headers [first, last].
  void push_chain(retired_sublist* first, retired_sublist* last) noexcept {
    if (first == nullptr)
      return;
    last->next = head_.load(std::memory_order_relaxed);
    // (1) - this release-CAS synchronizes-with the acquire-exchange (2)
    while (!head_.compare_exchange_weak(last->next, first, std::memory_order_release,
                                        std::memory_order_relaxed)) {
    }
  }

  retired_sublist* steal_all() noexcept {
    if (head_.load(std::memory_order_relaxed) == nullptr)
      return nullptr;
    // (2) - this acquire-exchange synchronizes-with the release-CAS (1)
    return head_.exchange(nullptr, std::memory_order_acquire);
  }

  bool empty() const noexcept { return head_.load(std::memory_order_acquire) == nullptr; }

  /// Number of nodes currently stored; only meaningful when quiescent.
  std::size_t quiescent_node_count() const noexcept {
    std::size_t n = 0;
    for (auto* s = head_.load(std::memory_order_acquire); s != nullptr; s = s->next)
      n += s->nodes.size();
    return n;
  }

  template <class F>
  void quiescent_for_each_node(F&& f) const {
    for (auto* s = head_.load(std::memory_order_acquire); s != nullptr; s = s->next)
      for (auto* n = s->nodes.front(); n != nullptr; n = n->next_retired)
        f(*n);
  }

  static void delete_chain(retired_sublist* s) noexcept {
    while (s != nullptr) {
      auto* next = s->next;
      s->nodes.clear();
      delete s;
      s = next;
    }
  }

private:
  std::atomic<retired_sublist*> head_{nullptr};
};

/// Steals every sublist from `stack`, deletes the prefix of each one that
/// satisfies `pred` and pushes the remainders back in a single step.
/// Returns (reclaimed, examined).
template <class Pred>
std::pair<std::size_t, std::size_t> reclaim_sublists(sublist_stack& stack, Pred&& pred) {
  std::size_t reclaimed = 0;
  std::size_t examined = 0;
  retired_sublist* keep_first = nullptr;
  retired_sublist* keep_last = nullptr;
  auto* s = stack.steal_all();
  while (s != nullptr) {
    auto* next = s->next;
    auto [r, e] = s->nodes.reclaim_prefix(pred);
    reclaimed += r;
    examined += e;
    if (s->nodes.empty()) {
      delete s;
    } else {
      s->next = nullptr;
      if (keep_last == nullptr)
        keep_first = s;
      else
        keep_last->next = s;
      keep_last = s;
    }
    s = next;
  }
  stack.push_chain(keep_first, keep_last);
  return {reclaimed, examined};
}

} // namespace smr::detail

#endif
