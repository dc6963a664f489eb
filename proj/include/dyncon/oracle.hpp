#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dyncon/cluster_forest.hpp"
#include "dyncon/connectivity.hpp"

namespace dyncon {

// Ground truth: the live edge set plus a union-find rebuilt after updates.
class EdgeSetOracle final : public DynamicConnectivity {
 public:
  explicit EdgeSetOracle(int n);

  void insert(VertexId u, VertexId v) override;
  void erase(VertexId u, VertexId v) override;
  [[nodiscard]] bool connected(VertexId u, VertexId v) override;
  [[nodiscard]] Stats stats() const override { return stats_; }
  [[nodiscard]] std::string name() const override { return "oracle"; }
  [[nodiscard]] int n() const override { return n_; }

  [[nodiscard]] bool contains(EdgeKey e) const { return live_.count(e) != 0; }
  [[nodiscard]] std::size_t edge_count() const { return live_.size(); }
  [[nodiscard]] std::vector<EdgeKey> edge_list() const;
  // Component label per vertex (smallest vertex id of the component).
  [[nodiscard]] std::vector<VertexId> components();

 private:
  void rebuild();
  VertexId find(VertexId x);

  int n_;
  std::unordered_set<EdgeKey, EdgeKeyHash> live_;
  std::vector<VertexId> parent_;
  bool dirty_ = false;
  Stats stats_;
};

// CG(c): children of c as nodes, c's level edges as a multigraph.
struct ExplicitClusterGraph {
  const Cluster* owner = nullptr;
  int level = 0;
  std::vector<Cluster*> nodes;
  std::unordered_map<const Cluster*, int> index;
  struct Edge {
    EdgeKey key;
    int x = 0;
    int y = 0;
    bool blocked = false;
    bool is_tree = false;
  };
  std::vector<Edge> edges;

  [[nodiscard]] std::vector<std::vector<int>> adjacency(bool blocked_only) const;
  [[nodiscard]] bool connected(bool tree_only) const;
  [[nodiscard]] int diameter() const;  // -1 when disconnected
  // Nodes joined to every other node by a blocked edge.
  [[nodiscard]] std::vector<int> blocked_centers() const;
  [[nodiscard]] bool has_disjoint_blocked_pair() const;
};

// Materializes CG(c) for every explicit cluster in one pass over the edge index.
std::unordered_map<const Cluster*, ExplicitClusterGraph> build_cluster_graphs(const ClusterForest& f);
ExplicitClusterGraph build_cluster_graph(const ClusterForest& f, const Cluster* c);

struct Violation {
  std::string check;
  std::string detail;
  std::uint64_t cluster = 0;  // creation sequence of the offending cluster
};

struct AuditReport {
  std::vector<Violation> violations;
  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] std::size_t count(const std::string& check) const;
  [[nodiscard]] std::string summary(std::size_t limit = 8) const;
};

struct AuditOptions {
  bool tree_connectivity = false;
  // Diameter and center checks build graphs explicitly; skip them above this n.
  int explicit_limit = 512;
};

AuditReport audit(const ClusterForest& f, const AuditOptions& opt = {});

// Seeded corruptions used to validate the auditor. Each returns false when the
// forest has no suitable site.
bool inject_size_fault(ClusterForest& f);
bool inject_bitmap_fault(ClusterForest& f);
bool inject_blocked_fault(ClusterForest& f);
bool inject_compression_fault(ClusterForest& f);
bool inject_matching_fault(ClusterForest& f);

}  // namespace dyncon
