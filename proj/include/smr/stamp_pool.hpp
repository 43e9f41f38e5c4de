#ifndef SMR_STAMP_POOL_HPP
#define SMR_STAMP_POOL_HPP

#include "contract.hpp"

#include <atomic>
#include <cassert>
#include <cstddef>
#include <cstdint>

namespace smr {

using stamp_t = std::uint64_t;

/// Layout of the stamp word: two flag bits below the stamp counter.
namespace stamp_bits {
inline constexpr stamp_t pending_push = 1;
inline constexpr stamp_t not_in_list = 2;
inline constexpr stamp_t flag_mask = pending_push | not_in_list;
inline constexpr stamp_t increment = 4;

constexpr stamp_t value(stamp_t s) noexcept { return s & ~flag_mask; }
} // namespace stamp_bits

/// Scheduling seam: every atomic access in the pool is preceded by
/// `Hook::step()`. The default hook compiles to nothing.
struct no_step_hook {
  static void step() noexcept {}
};

template <class Hook>
struct basic_pool_block;

/// Value of a pool link: block address, delete mark and a 17 bit version tag
/// packed into one 64 bit word as [46 bit address | 17 bit tag | 1 bit mark].
///
/// The address is stored without its (always zero) lowest bit, so any even
/// user-space address below 2^47 fits.
template <class Hook>
class block_link {
public:
  using block = basic_pool_block<Hook>;

  static constexpr unsigned tag_bits = 17;
  static constexpr std::uint64_t tag_mask = (std::uint64_t(1) << tag_bits) - 1;
  static constexpr std::uint64_t delete_mark = 1;
  static constexpr unsigned address_shift = tag_bits + 1;

  constexpr block_link() noexcept = default;
  block_link(block* b, bool marked, std::uint32_t tag) noexcept
      : bits_(encode_address(b) | (std::uint64_t(tag & tag_mask) << 1) | (marked ? delete_mark : 0)) {}

  static constexpr block_link from_bits(std::uint64_t bits) noexcept {
    block_link l;
    l.bits_ = bits;
    return l;
  }

  block* get() const noexcept { return reinterpret_cast<block*>((bits_ >> address_shift) << 1); }
  bool marked() const noexcept { return (bits_ & delete_mark) != 0; }
  std::uint32_t tag() const noexcept { return static_cast<std::uint32_t>((bits_ >> 1) & tag_mask); }
  std::uint64_t bits() const noexcept { return bits_; }

  block* operator->() const noexcept { return get(); }
  void reset() noexcept { bits_ = 0; }

  /// The value a successful update of a link currently holding `*this` writes.
  block_link successor(block* target, bool mark) const noexcept {
    return block_link(target, mark, (tag() + 1) & tag_mask);
  }

  friend bool operator==(block_link a, block_link b) noexcept { return a.bits_ == b.bits_; }
  friend bool operator!=(block_link a, block_link b) noexcept { return a.bits_ != b.bits_; }

private:
  static std::uint64_t encode_address(block* b) noexcept {
    auto raw = reinterpret_cast<std::uint64_t>(b);
    assert((raw & 1) == 0);
    assert(raw < (std::uint64_t(1) << 47));
    return (raw >> 1) << address_shift;
  }

  std::uint64_t bits_ = 0;
};

/// An atomic link. Every successful modification increments the version tag,
/// so a CAS against a stale value fails unless exactly 2^17 updates happened
/// in between.
template <class Hook>
class atomic_link {
public:
  using link = block_link<Hook>;
  using block = typename link::block;

  link load(std::memory_order order = std::memory_order_acquire) const noexcept {
    Hook::step();
    return link::from_bits(bits_.load(order));
  }

  /// Replaces `expected` by (target, mark) with the next tag. On failure
  /// `expected` receives the current value.
  bool compare_exchange(link& expected, block* target, bool mark,
                        std::memory_order success = std::memory_order_acq_rel,
                        std::memory_order failure = std::memory_order_acquire) noexcept {
    Hook::step();
    auto old_bits = expected.bits();
    bool ok = bits_.compare_exchange_strong(old_bits, expected.successor(target, mark).bits(), success, failure);
    if (!ok)
      expected = link::from_bits(old_bits);
    return ok;
  }

  /// Unconditional update that still bumps the tag; returns the stored value.
  link store(block* target, bool mark) noexcept {
    auto cur = load(std::memory_order_relaxed);
    while (!compare_exchange(cur, target, mark, std::memory_order_release, std::memory_order_relaxed)) {
    }
    return cur.successor(target, mark);
  }

  /// Sets the delete mark (if not yet set) and returns the marked value.
  link set_mark() noexcept {
    auto cur = load(std::memory_order_relaxed);
    for (;;) {
      if (cur.marked())
        return cur;
      if (compare_exchange(cur, cur.get(), true))
        return cur.successor(cur.get(), true);
    }
  }

  /// Non-atomic initialisation, only for blocks no other thread can see.
  void init(block* target, bool mark) noexcept { bits_.store(link(target, mark, 0).bits(), std::memory_order_relaxed); }

private:
  std::atomic<std::uint64_t> bits_{0};
};

template <class Hook>
class atomic_stamp {
public:
  explicit atomic_stamp(stamp_t s = 0) noexcept : value_(s) {}

  stamp_t load(std::memory_order order = std::memory_order_acquire) const noexcept {
    Hook::step();
    return value_.load(order);
  }
  void store(stamp_t s, std::memory_order order = std::memory_order_release) noexcept {
    Hook::step();
    value_.store(s, order);
  }
  stamp_t fetch_add(stamp_t s, std::memory_order order = std::memory_order_acq_rel) noexcept {
    Hook::step();
    return value_.fetch_add(s, order);
  }
  bool compare_exchange(stamp_t& expected, stamp_t desired,
                        std::memory_order success = std::memory_order_acq_rel,
                        std::memory_order failure = std::memory_order_acquire) noexcept {
    Hook::step();
    return value_.compare_exchange_strong(expected, desired, success, failure);
  }
  void init(stamp_t s) noexcept { value_.store(s, std::memory_order_relaxed); }

private:
  std::atomic<stamp_t> value_;
};

/// One element of the Stamp Pool. A block belongs to one thread and is reused
/// for all of that thread's region entries; it is never freed while the pool
/// is in use, so stale links always point to valid memory.
template <class Hook>
struct alignas(64) basic_pool_block {
  basic_pool_block() noexcept : stamp(stamp_bits::not_in_list) { prev.init(nullptr, true); }

  atomic_link<Hook> prev;
  atomic_link<Hook> next;
  atomic_stamp<Hook> stamp;
};

/// Observable state of a block, decided from (flags, prev mark, next mark).
enum class block_state { inserting, in_queue, removing, removed, invalid };

inline block_state classify_block(stamp_t stamp, bool prev_marked, bool next_marked) noexcept {
  const bool pending = (stamp & stamp_bits::pending_push) != 0;
  const bool not_in_list = (stamp & stamp_bits::not_in_list) != 0;
  if (pending && not_in_list)
    return block_state::invalid;
  if (not_in_list)
    return prev_marked ? block_state::removed : block_state::invalid;
  if (pending)
    return next_marked ? block_state::invalid : (prev_marked ? block_state::inserting : block_state::in_queue);
  if (prev_marked)
    return block_state::removing;
  return next_marked ? block_state::invalid : block_state::in_queue;
}

/// Lock-free doubly-linked list of blocks ordered by stamp.
///
/// New blocks are pushed right after `head`. The prev links (head towards
/// tail) always form a consistent list with strictly decreasing stamps; the
/// next links only serve as hints. `head` holds the next stamp to be handed
/// out and `tail` a lower bound of all stamps currently in the pool.
///
/// Memory ordering: link and stamp loads are acquire, stores release and all
/// read-modify-write operations (stamp fetch-add, link CAS, stamp CAS)
/// acquire-release, so a thread that observes a link or stamp value also
/// observes everything its writer did before. The only relaxed accesses are
/// the initial reads inside the update loops of `atomic_link::store` and
/// `set_mark`, whose value is validated by the subsequent CAS. Ordering
/// between pool operations and the protected data structures is provided by
/// the reclamation scheme (seq_cst fences around push and retire).
template <class Hook = no_step_hook>
class stamp_pool {
public:
  using block = basic_pool_block<Hook>;
  using link = block_link<Hook>;

  /// The initial stamp must be a non-zero multiple of the increment: a block
  /// being pushed temporarily shows the stamp one increment below its own.
  explicit stamp_pool(stamp_t initial_stamp = stamp_bits::increment) noexcept {
    SMR_CONTRACT(initial_stamp >= stamp_bits::increment && initial_stamp % stamp_bits::increment == 0,
                 "initial stamp must be a non-zero multiple of the stamp increment");
    head_.stamp.init(initial_stamp);
    tail_.stamp.init(initial_stamp);
    head_.prev.init(&tail_, false);
    head_.next.init(nullptr, false);
    tail_.next.init(&head_, false);
    tail_.prev.init(nullptr, false);
  }

  stamp_pool(const stamp_pool&) = delete;
  stamp_pool& operator=(const stamp_pool&) = delete;

  /// The next stamp to be assigned.
  stamp_t highest_stamp() const noexcept { return head_.stamp.load(); }
  /// A lower bound of every stamp in the pool.
  stamp_t lowest_stamp() const noexcept { return stamp_bits::value(tail_.stamp.load()); }

  void push(block& b) noexcept {
    block* self = &b;
    b.next.store(&head_, false);

    link my_prev;
    link my_prev_stored;
    stamp_t stamp;
    link head_prev = head_.prev.load();
    for (;;) {
      link head_prev2 = head_.prev.load();
      if (head_prev != head_prev2) {
        head_prev = head_prev2;
        continue;
      }
      stamp = head_.stamp.fetch_add(stamp_bits::increment);
      b.stamp.store(stamp - (stamp_bits::increment - stamp_bits::pending_push));
      if (head_.prev.load() != head_prev)
        continue;
      my_prev = head_prev;
      my_prev_stored = b.prev.store(my_prev.get(), false);
      if (head_.prev.compare_exchange(head_prev, self, false))
        break;
    }
    b.stamp.store(stamp);

    // Best effort: link us into our successor's next pointer. Give up if it is
    // already marked or our own prev changed in the meantime.
    link l = my_prev->next.load();
    for (;;) {
      if (l.get() == self || l.marked() || b.prev.load() != my_prev_stored ||
          my_prev->next.compare_exchange(l, self, false))
        break;
    }
  }

  /// Removes `b`; returns true if `b` had the lowest stamp in the pool.
  bool remove(block& b) noexcept {
    block* self = &b;
    link prev = b.prev.set_mark();
    link next = b.next.set_mark();
    const bool fully_removed = remove_from_prev_list(prev, self, next);
    if (!fully_removed)
      remove_from_next_list(prev, self, next);

    const stamp_t stamp = b.stamp.load();
    assert((stamp & stamp_bits::flag_mask) == 0);
    b.stamp.store(stamp + stamp_bits::not_in_list);
    const bool was_last = b.prev.load().get() == &tail_;
    if (was_last)
      update_tail_stamp(stamp + stamp_bits::increment);
    return was_last;
  }

  // Internal steps of push/remove, public for white-box tests.

  /// Unlinks `b` from the prev list. Returns true if `b` provably was already
  /// removed from both lists; otherwise positions (prev, next) for
  /// remove_from_next_list.
  bool remove_from_prev_list(link& prev, block* b, link& next) noexcept {
    const stamp_t my_stamp = b->stamp.load();
    link last;
    for (;;) {
      if (next.get() == prev.get()) {
        next = b->next.load();
        return false;
      }

      link prev_prev = prev->prev.load();
      stamp_t prev_stamp = prev->stamp.load();
      // prev was removed (and maybe reinserted), which requires b to be gone as well
      if (prev_stamp > my_stamp || (prev_stamp & stamp_bits::not_in_list))
        return true;

      if (prev_prev.marked()) {
        if (!mark_next(prev.get(), prev_stamp))
          return true;
        prev = prev->prev.load();
        continue;
      }

      link next_prev = next->prev.load();
      stamp_t next_stamp = next->stamp.load();
      if (next_prev != next->prev.load())
        continue;

      if (next_stamp < my_stamp) {
        next = b->next.load();
        return false;
      }

      // next might not be part of the prev list; retreat
      if (next_stamp & (stamp_bits::not_in_list | stamp_bits::pending_push)) {
        if (last.get() != nullptr) {
          next = last;
          last.reset();
        } else
          next = next->next.load();
        continue;
      }

      if (remove_or_skip_marked_block(next, last, next_prev, next_stamp))
        continue;

      if (next_prev.get() != b) {
        move_next(next_prev, next, last);
        continue;
      }

      if (next->prev.compare_exchange(next_prev, prev.get(), false))
        return false;
    }
  }

  /// Makes sure no block's next link still targets `removed`.
  void remove_from_next_list(link prev, block* removed, link next) noexcept {
    const stamp_t my_stamp = removed->stamp.load();
    link last;
    for (;;) {
      link next_prev = next->prev.load();
      stamp_t next_stamp = next->stamp.load();
      if (next_prev != next->prev.load())
        continue;

      if (next_stamp & (stamp_bits::not_in_list | stamp_bits::pending_push)) {
        if (last.get() != nullptr) {
          next = last;
          last.reset();
        } else
          next = next->next.load();
        continue;
      }

      link prev_next = prev->next.load();
      stamp_t prev_stamp = prev->stamp.load();
      if (prev_stamp > my_stamp || (prev_stamp & stamp_bits::not_in_list))
        return;

      if (prev_next.marked()) {
        prev = prev->prev.load();
        continue;
      }

      if (next.get() == prev.get())
        return;

      if (remove_or_skip_marked_block(next, last, next_prev, next_stamp))
        continue;

      if (next_prev.get() != prev.get()) {
        move_next(next_prev, next, last);
        continue;
      }

      if (next_stamp <= my_stamp || prev_next.get() == next.get())
        return;

      // If prev got marked after the update we have to help removing it, so
      // that a removed successor keeps implying a removed predecessor.
      if (next->prev.load() == next_prev && prev->next.compare_exchange(prev_next, next.get(), false) &&
          !next->next.load().marked())
        return;
    }
  }

  /// Sets the delete mark on b's next link as long as b still has `stamp`.
  /// Returns false once the stamp changed, i.e. b was removed meanwhile.
  bool mark_next(block* b, stamp_t stamp) noexcept {
    link l = b->next.load();
    while (b->stamp.load() == stamp) {
      if (l.marked() || b->next.compare_exchange(l, l.get(), true))
        return true;
    }
    return false;
  }

  /// Advances next one block in prev direction, remembering the old one in
  /// last. A successor that is linked but still flagged PendingPush gets its
  /// flag cleared; otherwise the caller would retreat from it forever.
  void move_next(link next_prev, link& next, link& last) noexcept {
    stamp_t next_prev_stamp = next_prev->stamp.load();
    if ((next_prev_stamp & stamp_bits::pending_push) && next_prev == next->prev.load()) {
      stamp_t expected = next_prev_stamp;
      const stamp_t desired = next_prev_stamp + stamp_bits::increment - stamp_bits::pending_push;
      if (!next_prev->stamp.compare_exchange(expected, desired) && expected != desired)
        return;
    }
    last = next;
    next = next_prev;
  }

  /// If next is marked: unlink it via last (when known) or retreat along next
  /// links. Returns true if the caller has to restart its loop.
  bool remove_or_skip_marked_block(link& next, link& last, link next_prev, stamp_t next_stamp) noexcept {
    if (next_prev.marked()) {
      if (last.get() != nullptr) {
        if (mark_next(next.get(), next_stamp) && last->prev.load() == next)
          last->prev.compare_exchange(next, next_prev.get(), false);
        next = last;
        last.reset();
      } else
        next = next->next.load();
      return true;
    }
    return false;
  }

  /// Raises tail's stamp to the stamp of its new predecessor when that one is
  /// cheaply identifiable, otherwise to `stamp` (the leaver's stamp plus one
  /// increment). Never lowers it.
  void update_tail_stamp(stamp_t stamp) noexcept {
    link last = tail_.next.load();
    link last_prev = last->prev.load();
    stamp_t last_stamp = last->stamp.load();
    if (last_stamp > stamp && last_prev.get() == &tail_ && tail_.next.load() == last) {
      if (last.get() != &head_)
        stamp = stamp_bits::value(last_stamp);
      else {
        // head's stamp is incremented before the new block is linked. Bumping
        // head.prev's tag makes such a pending insertion fail and retry with a
        // larger stamp; only worth it if head is more than one increment ahead.
        if (stamp < last_stamp - stamp_bits::increment &&
            head_.prev.compare_exchange(last_prev, last_prev.get(), last_prev.marked()))
          stamp = last_stamp;
      }
    }

    stamp_t tail_stamp = tail_.stamp.load();
    while (tail_stamp < stamp) {
      if (tail_.stamp.compare_exchange(tail_stamp, stamp))
        break;
    }
  }

  // Introspection for tests; only meaningful while no operation is running or
  // inside a controlled single-threaded simulation.
  const block& head() const noexcept { return head_; }
  const block& tail() const noexcept { return tail_; }
  block& head() noexcept { return head_; }
  block& tail() noexcept { return tail_; }

  /// Visits the blocks between head and tail following prev links.
  template <class F>
  void for_each_in_prev_list(F&& f, std::size_t limit = 1u << 20) const {
    const block* cur = head_.prev.load().get();
    while (cur != &tail_ && cur != nullptr && limit-- > 0) {
      f(*cur);
      cur = cur->prev.load().get();
    }
  }

private:
  block head_;
  block tail_;
};

} // namespace smr

#endif
