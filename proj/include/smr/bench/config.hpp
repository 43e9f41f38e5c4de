#ifndef SMR_BENCH_CONFIG_HPP
#define SMR_BENCH_CONFIG_HPP

#include "../node_allocator.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace smr::bench {

enum class benchmark { queue, list, hashmap };
enum class mode { throughput, efficiency };

inline const char* to_string(benchmark b) noexcept {
  switch (b) {
  case benchmark::queue:
    return "queue";
  case benchmark::list:
    return "list";
  case benchmark::hashmap:
    return "hashmap";
  }
  return "?";
}

inline const char* to_string(mode m) noexcept { return m == mode::throughput ? "throughput" : "efficiency"; }

/// Accepts the long names and their first letter.
inline std::optional<benchmark> parse_benchmark(std::string_view s) noexcept {
  if (s == "q" || s == "queue")
    return benchmark::queue;
  if (s == "l" || s == "list")
    return benchmark::list;
  if (s == "h" || s == "hashmap")
    return benchmark::hashmap;
  return std::nullopt;
}

inline std::optional<mode> parse_mode(std::string_view s) noexcept {
  if (s == "throughput")
    return mode::throughput;
  if (s == "efficiency")
    return mode::efficiency;
  return std::nullopt;
}

/// Hash-map benchmark parameters; the defaults are the desk-scale values.
struct hashmap_config {
  std::size_t buckets = 2048;
  std::size_t capacity = 1000;
  std::uint64_t key_space = 3000;
  std::size_t keys_per_simulation = 100;
  /// Payload bytes per entry; 256 or 1024.
  std::size_t payload = 256;
};

struct bench_config {
  benchmark bench = benchmark::queue;
  mode run_mode = mode::throughput;
  std::string scheme = "stamp-it";
  unsigned threads = 2;
  double trial_seconds = 1.0;
  unsigned trials = 5;
  unsigned runs = 3;
  /// Percentage of list operations that are updates.
  unsigned workload = 20;
  std::size_t list_size = 10;
  unsigned region_span = 100;
  unsigned samples_per_trial = 50;
  std::uint64_t seed = 1;
  std::string allocator = "system";
  hashmap_config hashmap;

  /// Keys are drawn from twice the initial list size.
  std::uint64_t key_range() const noexcept { return 2 * static_cast<std::uint64_t>(list_size); }
};

/// Returns an error message for an invalid configuration.
inline std::optional<std::string> validate(const bench_config& cfg) {
  if (cfg.threads == 0)
    return "threads must be positive";
  if (!(cfg.trial_seconds > 0))
    return "trial-seconds must be positive";
  if (cfg.trials == 0)
    return "trials must be positive";
  if (cfg.runs == 0)
    return "runs must be positive";
  if (cfg.workload > 100)
    return "workload must be in [0,100]";
  if (cfg.list_size == 0)
    return "list-size must be positive";
  if (cfg.region_span == 0)
    return "region-span must be positive";
  if (cfg.samples_per_trial == 0)
    return "samples must be positive";
  if (cfg.hashmap.payload != 256 && cfg.hashmap.payload != 1024)
    return "payload must be 256 or 1024";
  if (cfg.hashmap.capacity == 0 || cfg.hashmap.key_space == 0 || cfg.hashmap.keys_per_simulation == 0)
    return "hash-map capacity, key space and keys per simulation must be positive";
  if (find_node_allocator(cfg.allocator) == nullptr)
    return "unknown allocator '" + cfg.allocator + "'";
  return std::nullopt;
}

} // namespace smr::bench

#endif
