#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace dyncon {

using VertexId = std::int32_t;

// Caller bug inside the data structure (broken precondition or invariant).
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad request at the public API (duplicate insert, missing delete, bad ids).
class QueryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EdgeKey {
  VertexId a = 0;
  VertexId b = 0;

  EdgeKey() = default;
  EdgeKey(VertexId u, VertexId v) : a(u < v ? u : v), b(u < v ? v : u) {}

  [[nodiscard]] std::uint64_t packed() const {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }
  [[nodiscard]] VertexId other(VertexId v) const { return v == a ? b : a; }

  friend bool operator==(const EdgeKey& x, const EdgeKey& y) { return x.a == y.a && x.b == y.b; }
  friend bool operator!=(const EdgeKey& x, const EdgeKey& y) { return !(x == y); }
  friend bool operator<(const EdgeKey& x, const EdgeKey& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  }
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& e) const noexcept {
    std::uint64_t x = e.packed();
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return static_cast<std::size_t>(x);
  }
};

struct EdgeRecord {
  int level = 0;
  bool is_tree = false;
};

inline int floor_log2(std::uint64_t x) { return x == 0 ? 0 : 63 - __builtin_clzll(x); }

inline int ceil_log2(std::uint64_t x) { return x <= 1 ? 0 : floor_log2(x - 1) + 1; }

inline bool has_bit(std::uint64_t bitmap, int i) { return (bitmap >> i) & 1ULL; }

// Running byte counter using nominal object sizes.
class MemoryCounter {
 public:
  void add(std::int64_t bytes) {
    current_ += bytes;
    if (current_ > peak_) peak_ = current_;
  }
  void sub(std::int64_t bytes) { current_ -= bytes; }
  [[nodiscard]] std::int64_t current() const { return current_; }
  [[nodiscard]] std::int64_t peak() const { return peak_; }
  void reset_peak() { peak_ = current_; }

 private:
  std::int64_t current_ = 0;
  std::int64_t peak_ = 0;
};

struct Stats {
  std::uint64_t inserts = 0;
  std::uint64_t deletes = 0;
  std::uint64_t nontree_deletes = 0;
  std::uint64_t fetches = 0;
  std::uint64_t pushdowns = 0;
  std::uint64_t searches = 0;
  std::uint64_t links = 0;
  std::uint64_t cuts = 0;
  std::int64_t bytes = 0;
  std::int64_t peak_bytes = 0;
};

}  // namespace dyncon
