#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyncon/cluster_forest.hpp"
#include "dyncon/connectivity.hpp"

namespace dyncon {

// Cluster forest that keeps every edge as low as the size caps allow. Each
// child of a multi-child cluster owns a blocked edge, which certifies
// connectivity locally without replacement searches.
class BlockedConnectivity final : public DynamicConnectivity {
 public:
  // Cluster graphs with at most this many children are repaired by brute force.
  static constexpr std::size_t kBruteForceLimit = 8;

  explicit BlockedConnectivity(int n, bool batch = false);

  void insert(VertexId u, VertexId v) override;
  void erase(VertexId u, VertexId v) override;
  void batch_insert(const std::vector<EdgeKey>& edges) override;
  void batch_erase(const std::vector<EdgeKey>& edges) override;
  [[nodiscard]] bool connected(VertexId u, VertexId v) override { return forest_.connected(u, v); }
  [[nodiscard]] Stats stats() const override;
  [[nodiscard]] std::string name() const override { return batch_ ? "cf-blocked-batch" : "cf-blocked"; }
  [[nodiscard]] int n() const override { return forest_.n(); }

  [[nodiscard]] ClusterForest& forest() { return forest_; }
  [[nodiscard]] const ClusterForest& forest() const { return forest_; }
  [[nodiscard]] bool batch() const { return batch_; }

  // Moves e down while it is a self-loop or unblocked.
  void push_until_blocked(EdgeKey e);
  // Pushes the edges of a star one level: all edges share the center cluster
  // and the satellites together with the center fit the level below.
  void push_down_group(const std::vector<EdgeKey>& edges, int level);
  // Pushes unblocked edges of the batch one level in star rounds; returns the
  // edges that moved.
  std::vector<EdgeKey> batch_push_down(const std::vector<EdgeKey>& edges, int level);

  struct RestoreProbe {
    std::uint64_t restorations = 0;
    std::uint64_t center_runs = 0;
    std::uint64_t brute_runs = 0;
    std::uint64_t stopped_runs = 0;
    std::uint64_t max_uncharged = 0;          // fetches without a push in one center run
    std::uint64_t max_satellite_blocked = 0;  // satellite pairs found blocked in one run
    std::uint64_t star_rounds = 0;
  };
  [[nodiscard]] const RestoreProbe& probe() const { return probe_; }

 private:
  enum class Outbound { None, Blocked, Unblocked };

  // Fetches a level-l edge leaving rep's level-(l-1) cluster, pushing self-loops on the way.
  Outbound fetch_outbound(VertexId rep, int level, EdgeKey* e);
  // Pushes fetched edges until rep's cluster has a blocked edge or none at all.
  Outbound settle(VertexId rep, int level);
  // Pushes e if it is still at level and a self-loop or unblocked.
  bool guarded_push(EdgeKey e, int level);
  void push_edge(EdgeKey e);

  void brute_restore(VertexId anchor, int level);
  void center_restore(VertexId rep1, VertexId rep2, int level);
  [[nodiscard]] bool is_center(const Cluster* p) const;
  [[nodiscard]] static VertexId any_vertex(const Cluster* c);
  static void set_marked(Cluster* c, bool marked);

  void validate_new(const std::vector<EdgeKey>& edges) const;
  void validate_live(const std::vector<EdgeKey>& edges) const;

  ClusterForest forest_;
  bool batch_;
  // During the upward sweep of a batch deletion pushes go one level at a time
  // and are queued here by their new level.
  std::vector<std::vector<EdgeKey>>* deferred_ = nullptr;
  RestoreProbe probe_;
};

}  // namespace dyncon
