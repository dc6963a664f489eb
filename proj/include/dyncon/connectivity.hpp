#pragma once

#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "dyncon/cluster_forest.hpp"

namespace dyncon {

// Common surface shared by every algorithm the harness can drive.
class DynamicConnectivity {
 public:
  virtual ~DynamicConnectivity() = default;
  virtual void insert(VertexId u, VertexId v) = 0;
  virtual void erase(VertexId u, VertexId v) = 0;
  [[nodiscard]] virtual bool connected(VertexId u, VertexId v) = 0;
  virtual void batch_insert(const std::vector<EdgeKey>& edges) {
    for (const EdgeKey& e : edges) insert(e.a, e.b);
  }
  virtual void batch_erase(const std::vector<EdgeKey>& edges) {
    for (const EdgeKey& e : edges) erase(e.a, e.b);
  }
  [[nodiscard]] virtual Stats stats() const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual int n() const = 0;
};

enum class SearchOutcome { Reconnected, Split };

// Sequential cluster forest (root or lowest-common-cluster insertion).
class CFConnectivity final : public DynamicConnectivity {
 public:
  CFConnectivity(int n, bool lca, bool tracking = true);

  void insert(VertexId u, VertexId v) override;
  void erase(VertexId u, VertexId v) override;
  [[nodiscard]] bool connected(VertexId u, VertexId v) override { return forest_.connected(u, v); }
  [[nodiscard]] Stats stats() const override;
  [[nodiscard]] std::string name() const override { return lca_ ? "cf-lca" : "cf-root"; }
  [[nodiscard]] int n() const override { return forest_.n(); }

  [[nodiscard]] ClusterForest& forest() { return forest_; }
  [[nodiscard]] const ClusterForest& forest() const { return forest_; }
  [[nodiscard]] bool tracking() const { return tracking_; }

  // Instrumentation for property tests.
  struct SearchProbe {
    std::uint64_t searches = 0;
    std::uint64_t splits = 0;
    std::uint64_t max_step_gap = 0;
    std::uint64_t oversized_pushes = 0;  // pushed side heavier than half the level cap
  };
  [[nodiscard]] const SearchProbe& probe() const { return probe_; }

 private:
  struct Side {
    std::vector<Cluster*> queue;
    std::size_t head = 0;
    std::vector<const LTNode*> walk;
    const VertexLeaf* leaf = nullptr;
    const std::vector<EdgeKey>* edges = nullptr;
    std::size_t cursor = 0;
    std::int64_t visited_size = 0;
    std::vector<EdgeKey> explored;
    std::unordered_set<EdgeKey, EdgeKeyHash> seen;
    std::uint64_t steps = 0;
  };

  SearchOutcome replacement_search(Cluster* p, int level, VertexId u, VertexId v, Cluster* cu, Cluster* cv,
                                   Cluster** detached);
  bool next_edge(Side& s, int level, EdgeKey* e, VertexId* from);
  void push_all(const std::vector<EdgeKey>& edges, int level);

  ClusterForest forest_;
  bool lca_;
  bool tracking_;
  std::uint32_t stamp_ = 0;
  SearchProbe probe_;
};

}  // namespace dyncon
