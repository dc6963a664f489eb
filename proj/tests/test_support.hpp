#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "dyncon/cluster_forest.hpp"
#include "dyncon/oracle.hpp"

namespace testing {

using dyncon::Cluster;
using dyncon::EdgeKey;
using dyncon::VertexId;

inline std::set<VertexId> leaf_set(const Cluster* c) {
  std::set<VertexId> out;
  std::vector<const Cluster*> stack{c};
  while (!stack.empty()) {
    const Cluster* x = stack.back();
    stack.pop_back();
    if (x->is_leaf()) {
      out.insert(static_cast<const dyncon::VertexLeaf*>(x)->id);
      continue;
    }
    for (const Cluster* y : x->children->children()) stack.push_back(y);
  }
  return out;
}

// Components of the graph restricted to edges at level <= l, as vertex sets.
inline std::vector<std::set<VertexId>> level_components(const dyncon::ClusterForest& f, int l) {
  std::vector<VertexId> parent(static_cast<std::size_t>(f.n()));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<VertexId(VertexId)> find = [&](VertexId x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  for (const auto& [e, rec] : f.edges()) {
    if (rec.level <= l) parent[static_cast<std::size_t>(find(e.a))] = find(e.b);
  }
  std::vector<std::set<VertexId>> comp(static_cast<std::size_t>(f.n()));
  for (VertexId v = 0; v < f.n(); ++v) comp[static_cast<std::size_t>(find(v))].insert(v);
  std::vector<std::set<VertexId>> out(static_cast<std::size_t>(f.n()));
  for (VertexId v = 0; v < f.n(); ++v) out[static_cast<std::size_t>(v)] = comp[static_cast<std::size_t>(find(v))];
  return out;
}

// Random insert/delete driver shared by the algorithm tests.
struct RandomUpdates {
  int n;
  std::mt19937_64 rng;
  dyncon::EdgeSetOracle oracle;
  std::vector<EdgeKey> live;
  int insert_percent = 60;
  int hub = 0;  // when positive, half the endpoints come from [0, hub)

  RandomUpdates(int n_, std::uint64_t seed) : n(n_), rng(seed), oracle(n_) {}

  VertexId pick() {
    if (hub > 0 && rng() % 2 == 0) return static_cast<VertexId>(rng() % static_cast<std::uint64_t>(hub));
    return static_cast<VertexId>(rng() % static_cast<std::uint64_t>(n));
  }

  // Next batch of fresh edges (possibly empty).
  std::vector<EdgeKey> inserts(std::size_t k) {
    std::vector<EdgeKey> out;
    for (std::size_t t = 0; t < k; ++t) {
      const VertexId u = pick();
      const VertexId v = pick();
      if (u == v || oracle.contains(EdgeKey(u, v))) continue;
      oracle.insert(u, v);
      live.emplace_back(u, v);
      out.emplace_back(u, v);
    }
    return out;
  }

  std::vector<EdgeKey> deletes(std::size_t k) {
    std::vector<EdgeKey> out;
    for (std::size_t t = 0; t < k && !live.empty(); ++t) {
      const std::size_t j = rng() % live.size();
      const EdgeKey e = live[j];
      live[j] = live.back();
      live.pop_back();
      oracle.erase(e.a, e.b);
      out.push_back(e);
    }
    return out;
  }

  bool next_is_insert() { return live.empty() || static_cast<int>(rng() % 100) < insert_percent; }

  // Checks every pair when n is small, otherwise a sample.
  template <typename Algo>
  bool agrees(Algo& a, int samples = 64) {
    if (n <= 64) {
      for (VertexId u = 0; u < n; ++u) {
        for (VertexId v = u + 1; v < n; ++v) {
          if (a.connected(u, v) != oracle.connected(u, v)) return false;
        }
      }
      return true;
    }
    for (int i = 0; i < samples; ++i) {
      const VertexId u = pick();
      const VertexId v = pick();
      if (a.connected(u, v) != oracle.connected(u, v)) return false;
    }
    return true;
  }
};

}  // namespace testing
