#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "dyncon/node.hpp"

using namespace dyncon;

TEST_SUITE("core") {

TEST_CASE("edge keys are canonical") {
  EdgeKey e(5, 2);
  CHECK(e.a == 2);
  CHECK(e.b == 5);
  CHECK(e == EdgeKey(2, 5));
  CHECK(e.other(2) == 5);
  CHECK(e.other(5) == 2);
  CHECK(EdgeKey(1, 9) < EdgeKey(2, 3));
  CHECK(EdgeKeyHash{}(EdgeKey(3, 4)) == EdgeKeyHash{}(EdgeKey(4, 3)));
}

TEST_CASE("log helpers") {
  CHECK(ceil_log2(1) == 0);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(5) == 3);
  CHECK(ceil_log2(8) == 3);
  CHECK(ceil_log2(9) == 4);
  CHECK(floor_log2(1) == 0);
  CHECK(floor_log2(7) == 2);
  CHECK(floor_log2(8) == 3);
}

TEST_CASE("memory counter tracks the peak") {
  MemoryCounter m;
  m.add(100);
  m.add(50);
  m.sub(120);
  CHECK(m.current() == 30);
  CHECK(m.peak() == 150);
  m.reset_peak();
  CHECK(m.peak() == 30);
}

TEST_CASE("leaf add sets the bit once") {
  VertexLeaf x;
  x.id = 0;
  CHECK(leaf_add_edge(x, EdgeKey(0, 1), 3));
  CHECK(has_bit(x.bitmap, 3));
  CHECK_FALSE(leaf_add_edge(x, EdgeKey(0, 2), 3));
  CHECK(x.sets.size() == 1);
  CHECK_THROWS_AS(leaf_add_edge(x, EdgeKey(0, 1), 5), StructuralError);
}

TEST_CASE("leaf slot index follows popcount") {
  VertexLeaf x;
  leaf_add_edge(x, EdgeKey(0, 1), 2);
  leaf_add_edge(x, EdgeKey(0, 2), 5);
  CHECK(x.slot(5) == 1);
  CHECK(x.sets[x.slot(5)].level == 5);
  CHECK(x.edges_at(5)->front() == EdgeKey(0, 2));
  CHECK(x.edges_at(4) == nullptr);
}

TEST_CASE("popcount slot locates every occupied level for all 16-bit bitmaps") {
  for (std::uint64_t bits = 0; bits < (1u << 16); ++bits) {
    VertexLeaf x;
    x.bitmap = bits;
    std::size_t k = 0;
    for (int i = 0; i < 16; ++i) {
      if (!has_bit(bits, i)) continue;
      REQUIRE(x.slot(i) == k);
      ++k;
    }
  }
}

TEST_CASE("leaf remove clears the bit with the last edge") {
  VertexLeaf x;
  leaf_add_edge(x, EdgeKey(0, 1), 3);
  leaf_add_edge(x, EdgeKey(0, 2), 3);
  CHECK_FALSE(leaf_remove_edge(x, EdgeKey(0, 1), 3));
  CHECK(leaf_remove_edge(x, EdgeKey(0, 2), 3));
  CHECK(x.bitmap == 0);
  CHECK(x.sets.empty());
  CHECK_THROWS_AS(leaf_remove_edge(x, EdgeKey(0, 2), 3), StructuralError);
}

TEST_CASE("leaf fetch returns the canonical least edge") {
  VertexLeaf x;
  leaf_add_edge(x, EdgeKey(0, 2), 3);
  leaf_add_edge(x, EdgeKey(0, 1), 3);
  CHECK(leaf_fetch_any_edge(x, 3) == EdgeKey(0, 1));
  CHECK_THROWS_AS(leaf_fetch_any_edge(x, 4), StructuralError);
}

TEST_CASE("enumerate-remove visits every edge exactly once") {
  VertexLeaf x;
  std::multiset<std::uint64_t> expected;
  for (VertexId v = 1; v <= 40; ++v) {
    leaf_add_edge(x, EdgeKey(0, v), 4);
    expected.insert(EdgeKey(0, v).packed());
  }
  std::multiset<std::uint64_t> seen;
  while (has_bit(x.bitmap, 4)) {
    const EdgeKey e = leaf_fetch_any_edge(x, 4);
    seen.insert(e.packed());
    leaf_remove_edge(x, e, 4);
  }
  CHECK(seen == expected);
}

TEST_CASE("random push-down round trips match a naive per-leaf map") {
  std::mt19937_64 rng(11);
  VertexLeaf x;
  std::map<EdgeKey, int> naive;
  for (int step = 0; step < 3000; ++step) {
    const EdgeKey e(0, 1 + static_cast<VertexId>(rng() % 64));
    auto it = naive.find(e);
    if (it == naive.end()) {
      const int level = 1 + static_cast<int>(rng() % 10);
      leaf_add_edge(x, e, level);
      naive[e] = level;
    } else if (rng() % 2 == 0 && it->second > 1) {
      leaf_remove_edge(x, e, it->second);
      --it->second;
      leaf_add_edge(x, e, it->second);
    } else {
      leaf_remove_edge(x, e, it->second);
      naive.erase(it);
    }
    std::uint64_t bits = 0;
    for (const auto& [k, l] : naive) bits |= 1ULL << l;
    REQUIRE(x.bitmap == bits);
    REQUIRE(leaf_edge_count(x) == naive.size());
    for (const auto& s : x.sets) REQUIRE_FALSE(s.edges.empty());
  }
}

}
