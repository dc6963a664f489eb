#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <unordered_map>
#include <vector>

#include "dyncon/local_tree.hpp"
#include "dyncon/node.hpp"

namespace dyncon {

enum class Mode { Root, Lca, Blocked };

// Leveled clusters over vertex leaves. A level-l node is stored explicitly
// only when it has at least two children; in blocked mode a global root at
// level lmax+1 holds every component root.
class ClusterForest {
 public:
  ClusterForest(int n, Mode mode);
  ~ClusterForest();
  ClusterForest(const ClusterForest&) = delete;
  ClusterForest& operator=(const ClusterForest&) = delete;

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int lmax() const { return lmax_; }
  [[nodiscard]] Mode mode() const { return mode_; }
  [[nodiscard]] Cluster* global_root() const { return global_root_; }
  [[nodiscard]] VertexLeaf* leaf(VertexId v) const { return leaves_[static_cast<std::size_t>(v)]; }
  void check_vertex(VertexId v) const;

  // Structure queries.
  [[nodiscard]] static Cluster* parent_of(const Cluster* c);
  [[nodiscard]] Cluster* cluster_of(VertexId v, int l) const;
  // Topmost ancestor below the global root (the component representative).
  [[nodiscard]] Cluster* root_of(VertexId v) const;
  [[nodiscard]] bool connected(VertexId u, VertexId v) const;
  // Lowest explicit cluster holding both vertices, or nullptr when disconnected.
  [[nodiscard]] Cluster* lowest_common(VertexId u, VertexId v) const;
  [[nodiscard]] std::int64_t cap(int level) const { return std::int64_t{1} << level; }

  // Child manipulation; each call leaves sizes and bitmaps consistent up to the root.
  void add_child(Cluster* p, Cluster* c);
  void remove_child(Cluster* p, Cluster* c);
  Cluster* merge(Cluster* a, Cluster* b);

  // Edge queries.
  [[nodiscard]] EdgeKey fetch_edge(const Cluster* c, int i);
  [[nodiscard]] std::vector<EdgeKey> fetch_edges(std::size_t k, const Cluster* c, int i);
  [[nodiscard]] bool has_edge(EdgeKey e) const { return index_.count(e) != 0; }
  [[nodiscard]] const EdgeRecord* find_edge(EdgeKey e) const;
  EdgeRecord& record(EdgeKey e);
  [[nodiscard]] const std::unordered_map<EdgeKey, EdgeRecord, EdgeKeyHash>& edges() const { return index_; }
  // Raw index access for fault injection; bypasses all bookkeeping.
  [[nodiscard]] std::unordered_map<EdgeKey, EdgeRecord, EdgeKeyHash>& mutable_edges() { return index_; }

  // Edge bookkeeping.
  void attach_edge(EdgeKey e, int level, bool is_tree);
  EdgeRecord detach_edge(EdgeKey e);
  void set_edge_level(EdgeKey e, int level);

  // Moves e one level down, merging its endpoint clusters if distinct.
  // Returns the merged cluster, or nullptr for a self-loop.
  Cluster* push_down(EdgeKey e);
  // True iff e's endpoint clusters one level below differ and cannot be merged.
  [[nodiscard]] bool is_blocked(EdgeKey e) const;
  [[nodiscard]] bool is_self_loop(EdgeKey e) const;

  // Fuses a and b into one level-l cluster below p (p == nullptr for roots).
  Cluster* join_at_level(int l, Cluster* a, Cluster* b, Cluster* p);
  // Removes a single-child p, handing its child to p's parent.
  bool splice_if_trivial(Cluster* p);
  // Adds c (detached) as a new child of the level-l cluster currently represented by
  // anchor, creating that cluster if compression had elided it. Returns the new parent.
  Cluster* attach_beside(Cluster* anchor, Cluster* c, int l);

  Cluster* new_cluster(int level);
  void free_cluster(Cluster* c);
  // Re-files c in its parent's container and repairs aggregates upward.
  void propagate(Cluster* c);
  // Recomputes c's size and bitmap from its children; true iff either changed.
  bool recompute(Cluster* c);
  void reclaim();

  [[nodiscard]] Stats& stats() { return stats_; }
  [[nodiscard]] const Stats& stats() const { return stats_; }
  [[nodiscard]] MemoryCounter& memory() { return mem_; }
  [[nodiscard]] const MemoryCounter& memory() const { return mem_; }
  [[nodiscard]] std::uint64_t next_seq() { return ++seq_; }

  // Every live explicit cluster (internal nodes only, global root included).
  [[nodiscard]] std::vector<Cluster*> internal_clusters() const;
  [[nodiscard]] std::size_t internal_count() const { return live_internal_; }
  // Roots of the forest (excluding the global root).
  [[nodiscard]] std::vector<Cluster*> roots() const;

 private:
  ChildContainer* make_container(Cluster* owner);
  void leaf_bits_changed(VertexLeaf* x);

  int n_;
  int lmax_;
  Mode mode_;
  MemoryCounter mem_;
  NodePool pool_;
  std::deque<Cluster> storage_;
  std::vector<Cluster*> free_list_;
  std::vector<Cluster*> graveyard_;
  std::vector<std::unique_ptr<VertexLeaf>> leaf_storage_;
  std::vector<VertexLeaf*> leaves_;
  std::unordered_map<EdgeKey, EdgeRecord, EdgeKeyHash> index_;
  Cluster* global_root_ = nullptr;
  std::uint64_t seq_ = 0;
  std::size_t live_internal_ = 0;
  Stats stats_;
};

}  // namespace dyncon
