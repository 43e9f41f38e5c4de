#ifndef SMR_MARKED_PTR_HPP
#define SMR_MARKED_PTR_HPP

#include <cassert>
#include <cstdint>
#include <cstddef>

namespace smr {

/// A pointer that borrows its `MarkBits` low-order bits to store a small mark.
/// The pointee must be aligned to at least `1 << MarkBits` bytes.
template <class T, unsigned MarkBits>
class marked_ptr {
  static_assert(MarkBits < 8, "too many mark bits requested");

public:
  static constexpr unsigned number_of_mark_bits = MarkBits;
  static constexpr std::uintptr_t mark_mask = (std::uintptr_t(1) << MarkBits) - 1;

  marked_ptr() noexcept = default;
  marked_ptr(T* p, std::uintptr_t mark = 0) noexcept : bits_(make_bits(p, mark)) {} // NOLINT
  marked_ptr(std::nullptr_t) noexcept {}                                          // NOLINT

  static marked_ptr from_bits(std::uintptr_t bits) noexcept {
    marked_ptr result;
    result.bits_ = bits;
    return result;
  }

  T* get() const noexcept { return reinterpret_cast<T*>(bits_ & ~mark_mask); }
  std::uintptr_t mark() const noexcept { return bits_ & mark_mask; }
  std::uintptr_t bits() const noexcept { return bits_; }

  void reset() noexcept { bits_ = 0; }

  T* operator->() const noexcept { return get(); }
  T& operator*() const noexcept { return *get(); }
  explicit operator bool() const noexcept { return bits_ != 0; }

  // Equality compares the full packed word, marks included.
  friend bool operator==(marked_ptr lhs, marked_ptr rhs) noexcept { return lhs.bits_ == rhs.bits_; }
  friend bool operator!=(marked_ptr lhs, marked_ptr rhs) noexcept { return lhs.bits_ != rhs.bits_; }

private:
  static std::uintptr_t make_bits(T* p, std::uintptr_t mark) noexcept {
    auto raw = reinterpret_cast<std::uintptr_t>(p);
    assert((raw & mark_mask) == 0 && "pointer is not sufficiently aligned");
    assert(mark <= mark_mask && "mark does not fit into the borrowed bits");
    return raw | mark;
  }

  std::uintptr_t bits_ = 0;
};

} // namespace smr

#endif
