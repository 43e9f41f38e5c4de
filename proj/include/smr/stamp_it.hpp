#ifndef SMR_STAMP_IT_HPP
#define SMR_STAMP_IT_HPP

#include "concurrent_ptr.hpp"
#include "contract.hpp"
#include "perf_counters.hpp"
#include "reclaimable.hpp"
#include "stamp_pool.hpp"
#include "detail/region_guard_ptr.hpp"
#include "detail/retire_list.hpp"
#include "detail/thread_registry.hpp"

#include <atomic>
#include <cstddef>
#include <utility>

namespace smr {

/// Result of one reclamation pass.
struct reclaim_result {
  std::size_t reclaimed = 0;
  std::size_t scan_steps = 0;
};

/// True if a node retired with `retire_stamp` may be deleted once the lowest
/// stamp in the pool is `lowest`. `slack` is zero in any correct
/// configuration; it only exists to inject an off-by-one for mutation tests.
constexpr bool stamp_reclaimable(stamp_t retire_stamp, stamp_t lowest, stamp_t slack = 0) noexcept {
  return retire_stamp <= lowest + slack;
}

/// Deletes the stamp-ordered prefix of `list` that is reclaimable under `lowest`.
inline reclaim_result reclaim_local(detail::retire_list& list, stamp_t lowest, stamp_t slack = 0) noexcept {
  auto [reclaimed, examined] =
      list.reclaim_prefix([=](const reclaimable& n) { return stamp_reclaimable(n.retire_stamp, lowest, slack); });
  return {reclaimed, examined};
}

/// One pass over the global retire-list: every sublist is scanned up to its
/// first non-reclaimable node and the remainders are pushed back in one go.
inline reclaim_result reclaim_global(detail::sublist_stack& global, stamp_t lowest, stamp_t slack = 0) {
  auto [reclaimed, examined] = detail::reclaim_sublists(
      global, [=](const reclaimable& n) { return stamp_reclaimable(n.retire_stamp, lowest, slack); });
  return {reclaimed, examined};
}

struct stamp_it_options {
  /// Local retire-lists longer than this are moved to the global list when a
  /// non-last thread leaves its region.
  std::size_t threshold = 20;
  stamp_t initial_stamp = stamp_bits::increment;
  /// Mutation testing only: widens the reclaimability predicate.
  stamp_t unsafe_reclaim_slack = 0;
};

/// The Stamp-it scheme on top of a Stamp Pool.
///
/// A domain is an independent instance (own pool, own global retire-list).
/// Threads interact with it through `participant` handles; the process-wide
/// scheme `basic_stamp_it` keeps one participant per thread.
template <class Hook = no_step_hook>
class stamp_it_domain {
public:
  using pool_type = stamp_pool<Hook>;
  using block = typename pool_type::block;

  explicit stamp_it_domain(stamp_it_options opts = {}) : opts_(opts), pool_(opts.initial_stamp) {}

  stamp_it_domain(const stamp_it_domain&) = delete;
  stamp_it_domain& operator=(const stamp_it_domain&) = delete;

  /// Must only be destroyed when no participant is left.
  ~stamp_it_domain() { detail::sublist_stack::delete_chain(global_.steal_all()); }

  class participant {
  public:
    explicit participant(stamp_it_domain& d) : domain_(&d), block_(d.blocks_.acquire().first) {}

    participant(const participant&) = delete;
    participant& operator=(const participant&) = delete;

    ~participant() { domain_->on_thread_exit(*this); }

    void enter_region() noexcept {
      if (depth_++ == 0)
        domain_->enter(*this);
    }

    void leave_region() {
      SMR_CONTRACT(depth_ > 0, "leave_region() without matching enter_region()");
      if (--depth_ == 0)
        domain_->leave(*this);
    }

    /// Stamps `node` with the current highest stamp and appends it to the
    /// local retire-list. The node must already be unreachable.
    void retire(reclaimable* node) {
      SMR_CONTRACT(depth_ > 0, "retire() outside of a critical region");
      // (1) - this seq_cst-fence pairs with the seq_cst-fence (2): either the
      // entering thread sees the unlink, or we see its stamp.
      std::atomic_thread_fence(std::memory_order_seq_cst);
      node->retire_stamp = domain_->pool_.highest_stamp();
      local_.push_back(node);
      perf_counters::count_retired();
    }

    bool in_region() const noexcept { return depth_ > 0; }
    unsigned depth() const noexcept { return depth_; }
    stamp_t stamp() const noexcept { return stamp_bits::value(block_->stamp.load()); }
    const detail::retire_list& local_list() const noexcept { return local_; }
    block& pool_block() noexcept { return *block_; }

  private:
    friend class stamp_it_domain;

    stamp_it_domain* domain_;
    block* block_;
    unsigned depth_ = 0;
    detail::retire_list local_;
  };

  pool_type& pool() noexcept { return pool_; }
  const pool_type& pool() const noexcept { return pool_; }
  const stamp_it_options& options() const noexcept { return opts_; }

  /// Stamp-ordered sublists waiting for the last thread; quiescent view.
  std::size_t global_node_count() const noexcept { return global_.quiescent_node_count(); }
  bool global_empty() const noexcept { return global_.empty(); }
  template <class F>
  void for_each_global_node(F&& f) const {
    global_.quiescent_for_each_node(std::forward<F>(f));
  }

  bool pool_empty() const noexcept { return pool_.head().prev.load().get() == &pool_.tail(); }

private:
  void enter(participant& p) noexcept {
    pool_.push(*p.block_);
    // (2) - this seq_cst-fence pairs with the seq_cst-fence (1)
    std::atomic_thread_fence(std::memory_order_seq_cst);
  }

  void leave(participant& p) {
    const bool was_last = pool_.remove(*p.block_);
    count(reclaim_local(p.local_, pool_.lowest_stamp(), opts_.unsafe_reclaim_slack));
    if (was_last)
      drain_global();
    else if (p.local_.size() > opts_.threshold)
      global_.push(std::move(p.local_));
  }

  /// Runs reclaim_global until the lowest stamp is stable across a pass.
  void drain_global() {
    for (;;) {
      const stamp_t lowest = pool_.lowest_stamp();
      count(reclaim_global(global_, lowest, opts_.unsafe_reclaim_slack));
      if (global_.empty() || pool_.lowest_stamp() == lowest)
        break;
    }
  }

  void on_thread_exit(participant& p) {
    SMR_CONTRACT(p.depth_ == 0, "thread terminated inside a critical region");
    if (!p.local_.empty())
      global_.push(std::move(p.local_));
    // A final enter/leave makes us the last thread if nobody else is around,
    // so whatever we (or earlier leavers) left behind gets drained.
    for (int attempt = 0; attempt < 3 && !global_.empty(); ++attempt) {
      enter(p);
      leave(p);
      if (!pool_empty())
        break;
    }
    blocks_.release(p.block_);
  }

  static void count(const reclaim_result& r) noexcept {
    if (r.scan_steps != 0)
      perf_counters::count_scan_steps(r.scan_steps);
  }

  stamp_it_options opts_;
  pool_type pool_;
  detail::sublist_stack global_;
  detail::thread_registry<block> blocks_;
};

/// Compile-time configuration of the process-wide Stamp-it instance.
struct stamp_it_config {
  static constexpr std::size_t threshold = 20;
  static constexpr stamp_t initial_stamp = stamp_bits::increment;
  static constexpr stamp_t unsafe_reclaim_slack = 0;
};

/// Process-wide Stamp-it scheme; each `Config` type is a separate instance.
template <class Config = stamp_it_config>
class basic_stamp_it {
public:
  using domain_type = stamp_it_domain<>;

  template <class T, unsigned MarkBits = 0>
  using guard_ptr = detail::region_guard_ptr<basic_stamp_it, T, MarkBits>;

  template <class T, unsigned MarkBits = 0>
  using concurrent_ptr = smr::concurrent_ptr<T, MarkBits, guard_ptr>;

  template <class T, class Deleter = std::default_delete<T>>
  using enable_concurrent_ptr = smr::enable_concurrent_ptr<T, Deleter>;

  static constexpr const char* name = "stamp-it";

  /// Keeps the calling thread inside one critical region for its lifetime.
  class region_guard {
  public:
    region_guard() noexcept { enter_region(); }
    ~region_guard() { leave_region(); }
    region_guard(const region_guard&) = delete;
    region_guard& operator=(const region_guard&) = delete;
  };

  static void enter_region() noexcept { local().enter_region(); }
  static void leave_region() { local().leave_region(); }
  static void retire(reclaimable* node) { local().retire(node); }

  static domain_type& domain() {
    static auto* d = new domain_type(
        stamp_it_options{Config::threshold, Config::initial_stamp, Config::unsafe_reclaim_slack});
    return *d;
  }

  static typename domain_type::participant& local() {
    thread_local typename domain_type::participant p(domain());
    return p;
  }
};

using stamp_it = basic_stamp_it<>;

} // namespace smr

#endif
