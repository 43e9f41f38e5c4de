#ifndef SMR_SCHEMES_HPP
#define SMR_SCHEMES_HPP

#include "epoch_based.hpp"
#include "hazard_pointer.hpp"
#include "quiescent_state_based.hpp"
#include "stamp_it.hpp"

#include <array>
#include <string_view>

namespace smr {

template <class T>
struct type_tag {
  using type = T;
};

inline constexpr std::array<std::string_view, 5> scheme_names = {"stamp-it", "hpr", "er", "ner", "qsr"};

/// Calls `f(type_tag<Scheme>{})` for the scheme called `name`.
/// Returns false if the name is unknown.
template <class F>
bool with_scheme(std::string_view name, F&& f) {
  if (name == stamp_it::name)
    f(type_tag<stamp_it>{});
  else if (name == hazard_pointer::name)
    f(type_tag<hazard_pointer>{});
  else if (name == epoch_based::name)
    f(type_tag<epoch_based>{});
  else if (name == new_epoch_based::name)
    f(type_tag<new_epoch_based>{});
  else if (name == quiescent_state_based::name)
    f(type_tag<quiescent_state_based>{});
  else
    return false;
  return true;
}

} // namespace smr

#endif
