// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "symsc/expr.hpp"

namespace symsc {

/// LRU cache geometry. assoc == 1 is direct-mapped.
struct CacheConfig {
  uint64_t cache_size = 64 * 1024;
  uint64_t line_size = 64;
  uint64_t assoc = 1;

  uint64_t num_sets() const { return cache_size / (line_size * assoc); }
  unsigned line_bits() const { return static_cast<unsigned>(std::countr_zero(line_size)); }
  /// Byte distance between two blocks that land in the same set.
  uint64_t set_stride() const { return num_sets() * line_size; }

  void validate() const {
    if (!std::has_single_bit(cache_size) || !std::has_single_bit(line_size))
      throw Error("cache size and line size must be powers of two");
    if (line_size > cache_size)
      throw Error("line size must divide the cache size");
    if (!std::has_single_bit(assoc) || (cache_size / line_size) % assoc != 0)
      throw Error("associativity must be a power of two dividing the number of cache lines");
    if (num_sets() < 1)
      throw Error("cache must have at least one set");
  }

  std::string str() const {
    return std::to_string(cache_size) + "B/" + std::to_string(line_size) + "B/W=" + std::to_string(assoc);
  }

  friend bool operator==(const CacheConfig &, const CacheConfig &) = default;
};

/// 512-byte direct-mapped cache with one-byte lines (CLI preset "small-direct").
inline CacheConfig small_direct_preset() { return CacheConfig{512, 1, 1}; }

} // namespace symsc
