#include <algorithm>

#include "dyncon/node.hpp"

namespace dyncon {

bool leaf_add_edge(VertexLeaf& leaf, EdgeKey e, int level) {
  if (level < 0 || level > 62) throw StructuralError("leaf_add_edge: level out of range");
  for (const auto& s : leaf.sets) {
    if (std::binary_search(s.edges.begin(), s.edges.end(), e)) {
      throw StructuralError("leaf_add_edge: edge already present");
    }
  }
  const std::size_t idx = leaf.slot(level);
  if (has_bit(leaf.bitmap, level)) {
    auto& edges = leaf.sets[idx].edges;
    edges.insert(std::lower_bound(edges.begin(), edges.end(), e), e);
    return false;
  }
  LevelSet fresh;
  fresh.level = level;
  fresh.edges.push_back(e);
  leaf.sets.insert(leaf.sets.begin() + static_cast<std::ptrdiff_t>(idx), std::move(fresh));
  leaf.bitmap |= 1ULL << level;
  return true;
}

bool leaf_remove_edge(VertexLeaf& leaf, EdgeKey e, int level) {
  if (!has_bit(leaf.bitmap, level)) throw StructuralError("leaf_remove_edge: level not occupied");
  const std::size_t idx = leaf.slot(level);
  auto& edges = leaf.sets[idx].edges;
  auto it = std::lower_bound(edges.begin(), edges.end(), e);
  if (it == edges.end() || *it != e) throw StructuralError("leaf_remove_edge: edge missing");
  edges.erase(it);
  if (!edges.empty()) return false;
  leaf.sets.erase(leaf.sets.begin() + static_cast<std::ptrdiff_t>(idx));
  leaf.bitmap &= ~(1ULL << level);
  return true;
}

EdgeKey leaf_fetch_any_edge(const VertexLeaf& leaf, int level) {
  if (!has_bit(leaf.bitmap, level)) throw StructuralError("leaf_fetch_any_edge: level not occupied");
  return leaf.sets[leaf.slot(level)].edges.front();
}

std::size_t leaf_edge_count(const VertexLeaf& leaf) {
  std::size_t total = 0;
  for (const auto& s : leaf.sets) total += s.edges.size();
  return total;
}

}  // namespace dyncon
