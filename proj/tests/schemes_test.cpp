#include "support/canary.hpp"
#include "support/mutation.hpp"

#include <smr/perf_counters.hpp>
#include <smr/schemes.hpp>

#include <gtest/gtest.h>

#include <latch>
#include <thread>
#include <vector>

namespace {

using namespace smr;

template <class Scheme>
struct counted_node : Scheme::template enable_concurrent_ptr<counted_node<Scheme>> {
  explicit counted_node(int v = 0) : value(v) {}
  int value;
};

template <class Scheme>
class scheme_test : public ::testing::Test {};

using all_schemes = ::testing::Types<stamp_it, hazard_pointer, epoch_based, new_epoch_based, quiescent_state_based>;

struct scheme_name {
  template <class T>
  static std::string GetName(int) {
    std::string s = T::name;
    for (auto& c : s)
      if (c == '-')
        c = '_';
    return s;
  }
};

TYPED_TEST_SUITE(scheme_test, all_schemes, scheme_name);

TYPED_TEST(scheme_test, everything_retired_by_a_lone_thread_is_reclaimed_at_exit) {
  using scheme = TypeParam;
  using node = counted_node<scheme>;
  using concurrent_ptr = typename scheme::template concurrent_ptr<node>;

  const auto before = perf_counters::snapshot();
  std::thread([] {
    concurrent_ptr root;
    for (int i = 0; i < 1000; ++i) {
      typename scheme::region_guard region;
      root.store(new node(i));
      typename concurrent_ptr::guard_ptr g;
      g.acquire(root);
      ASSERT_EQ(g->value, i);
      root.store(nullptr);
      g.reclaim();
    }
  }).join();
  const auto delta = perf_counters::snapshot() - before;
  EXPECT_EQ(delta.allocated, 1000u);
  EXPECT_EQ(delta.retired, 1000u);
  EXPECT_EQ(delta.reclaimed, 1000u);
}

TYPED_TEST(scheme_test, guarded_node_survives_retirement_by_another_thread) {
  EXPECT_EQ(test::scripted_use_after_retire<TypeParam>(), 0u);
}

TYPED_TEST(scheme_test, acquire_if_equal_fails_on_a_different_value) {
  using scheme = TypeParam;
  using node = counted_node<scheme>;
  using concurrent_ptr = typename scheme::template concurrent_ptr<node>;
  std::thread([] {
    typename scheme::region_guard region;
    concurrent_ptr root;
    auto* a = new node(1);
    auto* b = new node(2);
    root.store(a);
    typename concurrent_ptr::guard_ptr g;
    EXPECT_FALSE(g.acquire_if_equal(root, b));
    EXPECT_FALSE(g);
    EXPECT_TRUE(g.acquire_if_equal(root, a));
    EXPECT_EQ(g->value, 1);
    g.reset();
    delete a;
    delete b;
  }).join();
}

TEST(mutation, off_by_one_reclaim_predicate_is_detected) {
  EXPECT_GT(test::scripted_use_after_retire<test::mutated_stamp_it>(), 0u);
}

struct two_slot_config : hazard_pointer_config {
  static constexpr std::size_t slots_per_thread = 2;
};
using two_slot_hp = basic_hazard_pointer<two_slot_config>;

TEST(hazard_pointer, threshold_formula) {
  EXPECT_EQ(hp_threshold_for(4, 2), 116u);
  EXPECT_EQ(hp_threshold(8), 116u);
  EXPECT_EQ(hp_threshold_for(1, 4), 108u);
}

TEST(hazard_pointer, scan_starts_when_the_threshold_is_exceeded) {
  using node = counted_node<two_slot_hp>;
  std::latch registered(3);
  std::latch finished(1);
  std::vector<std::thread> others;
  for (int i = 0; i < 3; ++i) {
    others.emplace_back([&] {
      two_slot_hp::local_retired_count(); // registers this thread
      registered.count_down();
      finished.wait();
    });
  }
  registered.wait();

  std::thread([] {
    two_slot_hp::local_retired_count();
    ASSERT_EQ(two_slot_hp::total_slots(), 8u);
    ASSERT_EQ(two_slot_hp::threshold(), 116u);
    const auto before = perf_counters::snapshot();
    for (int i = 0; i < 116; ++i)
      two_slot_hp::retire(new node(i));
    EXPECT_EQ(two_slot_hp::local_retired_count(), 116u);
    EXPECT_EQ((perf_counters::snapshot() - before).scan_steps, 0u);
    two_slot_hp::retire(new node(116));
    EXPECT_GT((perf_counters::snapshot() - before).scan_steps, 0u);
    EXPECT_EQ(two_slot_hp::local_retired_count(), 0u);
  }).join();
  finished.count_down();
  for (auto& t : others)
    t.join();
}

TEST(hazard_pointer, scan_keeps_protected_nodes) {
  using node = counted_node<hazard_pointer>;
  using concurrent_ptr = hazard_pointer::concurrent_ptr<node>;
  std::thread([] {
    concurrent_ptr root;
    root.store(new node(5));
    concurrent_ptr::guard_ptr keep;
    keep.acquire(root);
    concurrent_ptr::guard_ptr g;
    g.acquire(root);
    root.store(nullptr);
    g.reclaim();
    hazard_pointer::scan();
    EXPECT_EQ(hazard_pointer::local_retired_count(), 1u);
    EXPECT_EQ(keep->value, 5);
    keep.reset();
    hazard_pointer::scan();
    EXPECT_EQ(hazard_pointer::local_retired_count(), 0u);
  }).join();
}

TEST(epoch_based, region_blocks_the_second_advance) {
  // the eager variant announces its epoch as soon as the region_guard starts
  using node = counted_node<new_epoch_based>;
  std::thread([] {
    const auto before = perf_counters::snapshot();
    new_epoch_based::region_guard outer;
    const auto epoch = new_epoch_based::global_epoch();
    new_epoch_based::retire(new node(1));
    EXPECT_TRUE(new_epoch_based::try_advance(epoch));
    EXPECT_EQ(new_epoch_based::global_epoch(), epoch + 1);
    EXPECT_FALSE(new_epoch_based::try_advance(epoch + 1));
    EXPECT_EQ((perf_counters::snapshot() - before).reclaimed, 0u);
  }).join();
}

} // namespace
