#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dyncon/connectivity.hpp"
#include "dyncon/types.hpp"

namespace dyncon {

// Level structure over Euler tour trees. Level-i spanning forests nest as
// F_1 within F_2 and so on up to F_L; level-i components have at most 2^i
// vertices and edges only move down.
class HdtConnectivity final : public DynamicConnectivity {
 public:
  explicit HdtConnectivity(int n, std::uint64_t seed = 1);
  ~HdtConnectivity() override = default;
  HdtConnectivity(const HdtConnectivity&) = delete;
  HdtConnectivity& operator=(const HdtConnectivity&) = delete;

  void insert(VertexId u, VertexId v) override;
  void erase(VertexId u, VertexId v) override;
  [[nodiscard]] bool connected(VertexId u, VertexId v) override;
  [[nodiscard]] Stats stats() const override;
  [[nodiscard]] std::string name() const override { return "hdt"; }
  [[nodiscard]] int n() const override { return n_; }

  [[nodiscard]] int lmax() const { return lmax_; }
  [[nodiscard]] int edge_level(EdgeKey e) const;
  [[nodiscard]] bool is_tree(EdgeKey e) const;
  // Size and nesting checks; one message per violation.
  [[nodiscard]] std::vector<std::string> audit() const;

 private:
  // Treap node in one level's Euler tour: a vertex occurrence (a == b) or a directed arc.
  struct Node {
    Node* left = nullptr;
    Node* right = nullptr;
    Node* parent = nullptr;
    std::uint32_t prio = 0;
    int count = 1;
    int vertices = 0;
    VertexId a = 0;
    VertexId b = 0;
    bool tree_mark = false;     // arc that owns a tree edge whose level equals this tour's level
    bool nontree_mark = false;  // vertex with non-tree edges at this tour's level
    bool any_tree = false;
    bool any_nontree = false;
    [[nodiscard]] bool is_vertex() const { return a == b; }
  };
  struct EdgeInfo {
    int level = 0;
    bool tree = false;
    // Arc pairs for tour levels level..lmax, lowest first.
    std::vector<std::pair<Node*, Node*>> arcs;
  };

  static void update(Node* x);
  static void pull_up(Node* x);
  static Node* join(Node* a, Node* b);
  static void split(Node* t, int k, Node** a, Node** b);
  static int index_of(Node* x);
  static Node* root_of(Node* x);

  Node* vertex_node(VertexId v, int level) {
    return &vertex_nodes_[static_cast<std::size_t>(level - 1) * static_cast<std::size_t>(n_) +
                          static_cast<std::size_t>(v)];
  }
  [[nodiscard]] const Node* vertex_node(VertexId v, int level) const {
    return &vertex_nodes_[static_cast<std::size_t>(level - 1) * static_cast<std::size_t>(n_) +
                          static_cast<std::size_t>(v)];
  }
  Node* new_arc(VertexId a, VertexId b);
  void free_arc(Node* x);
  void reroot(Node* x);
  std::pair<Node*, Node*> link(VertexId u, VertexId v, int level);
  void cut(std::pair<Node*, Node*> arcs);
  void set_tree_level(EdgeKey e, EdgeInfo& info, int level);

  std::unordered_set<VertexId>& nontree_set(VertexId v, int level);
  void add_nontree(EdgeKey e, int level);
  void remove_nontree(EdgeKey e, int level);
  void refresh_nontree_mark(VertexId v, int level);

  bool replace(VertexId u, VertexId v, int level);
  template <typename Pred, typename Fn>
  static void collect(Node* root, Pred pred, Fn fn);

  int n_;
  int lmax_;
  std::mt19937 rng_;
  MemoryCounter mem_;
  std::vector<Node> vertex_nodes_;
  std::deque<Node> arc_storage_;
  std::vector<Node*> free_arcs_;
  std::unordered_map<EdgeKey, EdgeInfo, EdgeKeyHash> edges_;
  // Non-tree adjacency keyed by vertex * (lmax + 1) + level.
  std::unordered_map<std::uint64_t, std::unordered_set<VertexId>> nontree_;
  Stats stats_;
};

}  // namespace dyncon
