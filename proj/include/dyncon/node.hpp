#pragma once

#include <cstdint>
#include <vector>

#include "dyncon/types.hpp"

namespace dyncon {

struct Cluster;
class ChildContainer;

// A position inside a local tree. Clusters are the leaves of their parent's
// local tree; rank-tree and weight-balanced nodes are the internal positions.
struct LTNode {
  LTNode* up = nullptr;
  LTNode* left = nullptr;
  LTNode* right = nullptr;
  Cluster* owner = nullptr;  // set on container roots only
  Cluster* hi = nullptr;     // largest element below (weight-balanced trees)
  std::uint64_t bitmap = 0;
  std::int64_t size = 0;
  std::int32_t weight = 1;
  std::int16_t rank = 0;
  bool is_cluster = false;
  bool unmarked = true;
};

struct Cluster : LTNode {
  int level = 0;
  std::uint64_t seq = 0;
  std::int64_t key_size = 0;  // size under which the node is filed in its parent
  ChildContainer* children = nullptr;
  std::uint8_t tag = 0;
  std::uint8_t visit_side = 0;
  std::uint32_t visit_stamp = 0;
  VertexId rep = -1;  // scratch slot used by restoration bookkeeping
  bool alive = true;

  Cluster() { is_cluster = true; }
  [[nodiscard]] bool is_leaf() const { return children == nullptr; }
};

struct LevelSet {
  int level = 0;
  std::vector<EdgeKey> edges;  // sorted
};

struct VertexLeaf : Cluster {
  VertexId id = 0;
  std::vector<LevelSet> sets;  // sorted by level, never holds an empty set

  // Index of the level-i entry: number of occupied levels below i.
  [[nodiscard]] std::size_t slot(int level) const {
    return static_cast<std::size_t>(__builtin_popcountll(bitmap & ((1ULL << level) - 1)));
  }
  [[nodiscard]] const std::vector<EdgeKey>* edges_at(int level) const {
    if (!has_bit(bitmap, level)) return nullptr;
    return &sets[slot(level)].edges;
  }
};

// Leaf edge-set operations. Each returns true iff the leaf's bitmap changed.
bool leaf_add_edge(VertexLeaf& leaf, EdgeKey e, int level);
bool leaf_remove_edge(VertexLeaf& leaf, EdgeKey e, int level);
EdgeKey leaf_fetch_any_edge(const VertexLeaf& leaf, int level);
std::size_t leaf_edge_count(const VertexLeaf& leaf);

}  // namespace dyncon
