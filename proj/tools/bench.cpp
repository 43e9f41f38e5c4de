#include <smr/bench/csv.hpp>
#include <smr/bench/harness.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  using namespace smr::bench;

  bench_config cfg;
  std::string bench_name = "q";
  std::string mode_name = "throughput";
  std::string out_path;

  CLI::App app{"Throughput and reclamation-efficiency benchmarks"};
  app.add_option("--benchmark", bench_name, "q|queue, l|list or h|hashmap")->required();
  app.add_option("--scheme", cfg.scheme, "stamp-it, hpr, er, ner or qsr")->required();
  app.add_option("--mode", mode_name, "throughput or efficiency")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads")->capture_default_str();
  app.add_option("--trial-seconds", cfg.trial_seconds, "runtime of one trial")->capture_default_str();
  app.add_option("--trials", cfg.trials, "trials per run")->capture_default_str();
  app.add_option("--runs", cfg.runs, "runs (efficiency mode)")->capture_default_str();
  app.add_option("--workload", cfg.workload, "percentage of list updates")->capture_default_str();
  app.add_option("--list-size", cfg.list_size, "initial list size")->capture_default_str();
  app.add_option("--region-span", cfg.region_span, "operations per region guard")->capture_default_str();
  app.add_option("--samples", cfg.samples_per_trial, "samples per trial (efficiency mode)")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--allocator", cfg.allocator, "system or quarantine")->capture_default_str();
  app.add_option("--buckets", cfg.hashmap.buckets, "hash-map buckets")->capture_default_str();
  app.add_option("--capacity", cfg.hashmap.capacity, "hash-map capacity")->capture_default_str();
  app.add_option("--key-space", cfg.hashmap.key_space, "possible partial results")->capture_default_str();
  app.add_option("--keys-per-simulation", cfg.hashmap.keys_per_simulation, "partial results per simulation")
      ->capture_default_str();
  app.add_option("--payload", cfg.hashmap.payload, "bytes per partial result (256 or 1024)")->capture_default_str();
  app.add_option("--out", out_path, "CSV file; stdout if omitted");
  CLI11_PARSE(app, argc, argv);

  const auto bench = parse_benchmark(bench_name);
  const auto m = parse_mode(mode_name);
  if (!bench || !m) {
    std::cerr << "error: unknown " << (!bench ? "benchmark '" + bench_name : "mode '" + mode_name) << "'\n";
    return 2;
  }
  cfg.bench = *bench;
  cfg.run_mode = *m;
  if (!smr::with_scheme(cfg.scheme, [](auto) {})) {
    std::cerr << "error: unknown scheme '" << cfg.scheme << "'\n";
    return 2;
  }
  if (auto error = validate(cfg)) {
    std::cerr << "error: " << *error << '\n';
    return 2;
  }

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "error: cannot open " << out_path << '\n';
      return 2;
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  write_header(out, cfg.run_mode);

  const bool known = run(
      cfg, [&](const throughput_row& r) { write_row(out, cfg, r); },
      [&](const efficiency_row& r) { write_row(out, cfg, r); });
  if (!known) {
    std::cerr << "error: unknown scheme '" << cfg.scheme << "'\n";
    return 2;
  }
  return out ? 0 : 1;
}
