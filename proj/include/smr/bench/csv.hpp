#ifndef SMR_BENCH_CSV_HPP
#define SMR_BENCH_CSV_HPP

#include "harness.hpp"

#include <ostream>

namespace smr::bench {

inline constexpr const char* throughput_header = "benchmark,scheme,threads,trial,thread_id,ops,runtime_ns,ns_per_op";
inline constexpr const char* efficiency_header =
    "benchmark,scheme,threads,run,trial,sample,unreclaimed,allocated,reclaimed";

inline void write_header(std::ostream& out, mode m) {
  out << (m == mode::throughput ? throughput_header : efficiency_header) << '\n';
}

inline void write_row(std::ostream& out, const bench_config& cfg, const throughput_row& r) {
  out << to_string(cfg.bench) << ',' << cfg.scheme << ',' << cfg.threads << ',' << r.trial << ',' << r.thread_id
      << ',' << r.ops << ',' << r.runtime_ns << ',' << r.ns_per_op() << '\n';
}

inline void write_row(std::ostream& out, const bench_config& cfg, const efficiency_row& r) {
  out << to_string(cfg.bench) << ',' << cfg.scheme << ',' << cfg.threads << ',' << r.run << ',' << r.trial << ','
      << r.sample << ',' << r.unreclaimed << ',' << r.allocated << ',' << r.reclaimed << '\n';
}

} // namespace smr::bench

#endif
