#include "support/csv_check.hpp"

#include <smr/bench/csv.hpp>
#include <smr/bench/harness.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace smr;
using namespace smr::bench;

bench_config short_config(benchmark b, unsigned threads) {
  bench_config cfg;
  cfg.bench = b;
  cfg.threads = threads;
  cfg.trial_seconds = 0.2;
  cfg.trials = 1;
  cfg.runs = 1;
  cfg.samples_per_trial = 5;
  return cfg;
}

op_counts total(const std::vector<throughput_row>& rows) {
  op_counts c;
  for (auto& r : rows) {
    c.enqueues += r.counts.enqueues;
    c.dequeues += r.counts.dequeues;
    c.inserts += r.counts.inserts;
    c.removes += r.counts.removes;
    c.searches += r.counts.searches;
    c.hits += r.counts.hits;
    c.misses += r.counts.misses;
  }
  return c;
}

TEST(bench_config, validate_rejects_bad_values) {
  bench_config cfg;
  EXPECT_FALSE(validate(cfg));
  cfg.threads = 0;
  EXPECT_TRUE(validate(cfg));
  cfg = {};
  cfg.workload = 101;
  EXPECT_TRUE(validate(cfg));
  cfg = {};
  cfg.hashmap.payload = 512;
  EXPECT_TRUE(validate(cfg));
  cfg = {};
  cfg.allocator = "nope";
  EXPECT_TRUE(validate(cfg));
  EXPECT_EQ(parse_benchmark("q"), benchmark::queue);
  EXPECT_EQ(parse_benchmark("hashmap"), benchmark::hashmap);
  EXPECT_FALSE(parse_benchmark("x"));
}

TEST(bench_harness, queue_trial_reports_every_thread) {
  auto cfg = short_config(benchmark::queue, 1);
  cfg.trial_seconds = 1.0;
  std::vector<throughput_row> rows;
  run_throughput<stamp_it>(cfg, [&](const throughput_row& r) { rows.push_back(r); });
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GT(rows[0].ops, 0u);
  EXPECT_GT(rows[0].ns_per_op(), 0.0);
  EXPECT_GE(rows[0].runtime_ns, 900'000'000u);
  const auto c = total(rows);
  EXPECT_EQ(c.enqueues + c.dequeues, rows[0].ops);
}

TEST(bench_harness, list_workload_zero_only_searches) {
  auto cfg = short_config(benchmark::list, 2);
  cfg.workload = 0;
  std::vector<throughput_row> rows;
  run_throughput<epoch_based>(cfg, [&](const throughput_row& r) { rows.push_back(r); });
  const auto c = total(rows);
  EXPECT_EQ(c.inserts + c.removes, 0u);
  EXPECT_GT(c.searches, 0u);
}

TEST(bench_harness, list_workload_hundred_never_searches) {
  auto cfg = short_config(benchmark::list, 2);
  cfg.workload = 100;
  std::vector<throughput_row> rows;
  run_throughput<hazard_pointer>(cfg, [&](const throughput_row& r) { rows.push_back(r); });
  const auto c = total(rows);
  EXPECT_EQ(c.searches, 0u);
  EXPECT_GT(c.inserts, 0u);
  EXPECT_GT(c.removes, 0u);
}

template <class Scheme>
void expect_post_join_samples_match_live_nodes(benchmark b) {
  auto cfg = short_config(b, 1);
  cfg.trials = 3;
  cfg.list_size = 50;
  std::vector<efficiency_row> rows;
  run_efficiency<Scheme>(cfg, [&](const efficiency_row& r) { rows.push_back(r); });
  ASSERT_EQ(rows.size(), cfg.trials * (cfg.samples_per_trial + 1));
  for (auto& r : rows) {
    EXPECT_EQ(static_cast<std::int64_t>(r.allocated), static_cast<std::int64_t>(r.reclaimed) + r.unreclaimed);
    if (r.quiescent) {
      EXPECT_EQ(r.sample, cfg.samples_per_trial);
      EXPECT_EQ(r.unreclaimed, static_cast<std::int64_t>(r.live_nodes))
          << Scheme::name << " " << to_string(b) << " trial " << r.trial;
    }
  }
}

template <class Scheme>
void expect_post_join_samples_match_live_nodes() {
  for (auto b : {benchmark::queue, benchmark::list, benchmark::hashmap})
    expect_post_join_samples_match_live_nodes<Scheme>(b);
}

TEST(bench_harness, single_thread_post_join_sample_equals_live_nodes) {
  expect_post_join_samples_match_live_nodes<stamp_it>();
  expect_post_join_samples_match_live_nodes<hazard_pointer>();
  expect_post_join_samples_match_live_nodes<epoch_based>();
  expect_post_join_samples_match_live_nodes<new_epoch_based>();
  expect_post_join_samples_match_live_nodes<quiescent_state_based>();
}

TEST(bench_harness, hashmap_warms_up_across_trials) {
  auto cfg = short_config(benchmark::hashmap, 1);
  cfg.trials = 4;
  cfg.trial_seconds = 0.3;
  std::map<unsigned, std::vector<throughput_row>> by_trial;
  run_throughput<stamp_it>(cfg, [&](const throughput_row& r) { by_trial[r.trial].push_back(r); });
  ASSERT_EQ(by_trial.size(), cfg.trials);
  auto hit_rate = [&](unsigned t) {
    const auto c = total(by_trial[t]);
    return static_cast<double>(c.hits) / static_cast<double>(c.hits + c.misses);
  };
  EXPECT_LT(hit_rate(0), hit_rate(cfg.trials - 1));
  EXPECT_GT(hit_rate(cfg.trials - 1), 0.0);
}

std::string csv_for(const bench_config& cfg) {
  std::ostringstream out;
  write_header(out, cfg.run_mode);
  run(
      cfg, [&](const throughput_row& r) { write_row(out, cfg, r); },
      [&](const efficiency_row& r) { write_row(out, cfg, r); });
  return out.str();
}

TEST(bench_csv, output_matches_the_schema) {
  for (auto m : {mode::throughput, mode::efficiency}) {
    auto cfg = short_config(benchmark::list, 2);
    cfg.run_mode = m;
    cfg.scheme = "qsr";
    std::istringstream in(csv_for(cfg));
    const auto problems = test::check_bench_csv(test::read_csv(in), m);
    EXPECT_TRUE(problems.empty()) << problems.front();
  }
}

TEST(bench_csv, row_keys_are_deterministic) {
  auto cfg = short_config(benchmark::queue, 2);
  cfg.run_mode = mode::efficiency;
  cfg.trials = 2;
  cfg.runs = 2;
  auto keys = [&] {
    std::istringstream in(csv_for(cfg));
    const auto t = test::read_csv(in);
    std::vector<std::string> k;
    for (auto& r : t.rows)
      k.push_back(r[0] + r[1] + r[2] + "/" + r[3] + "/" + r[4] + "/" + r[5]);
    return k;
  };
  const auto first = keys();
  EXPECT_EQ(first.size(), 2u * 2u * (cfg.samples_per_trial + 1));
  EXPECT_EQ(first, keys());
}

TEST(bench_csv, checker_flags_broken_rows) {
  std::istringstream in(std::string(efficiency_header) + "\nqueue,stamp-it,2,0,0,0,5,9,3\nqueue,nope,2,0,0,x,1,1,0\nqueue,stamp-it,2\n");
  const auto problems = test::check_bench_csv(test::read_csv(in), mode::efficiency);
  EXPECT_EQ(problems.size(), 4u);
}

TEST(bench_harness, unknown_scheme_is_rejected) {
  bench_config cfg = short_config(benchmark::queue, 1);
  cfg.scheme = "gc";
  EXPECT_FALSE(run(cfg, {}, {}));
}

} // namespace
