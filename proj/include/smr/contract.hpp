#ifndef SMR_CONTRACT_HPP
#define SMR_CONTRACT_HPP

#include <cstdio>
#include <cstdlib>

namespace smr::detail {

[[noreturn]] inline void contract_violation(const char* expr, const char* what, const char* file, int line) noexcept {
  std::fprintf(stderr, "%s:%d: contract violation: %s (%s)\n", file, line, what, expr);
  std::fflush(stderr);
  std::abort();
}

} // namespace smr::detail

// Checked in every build type; violating it is a programming error.
#define SMR_CONTRACT(cond, what)                                               \
  do {                                                                         \
    if (!(cond))                                                               \
      ::smr::detail::contract_violation(#cond, what, __FILE__, __LINE__);      \
  } while (false)

#endif
