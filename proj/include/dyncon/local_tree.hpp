#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "dyncon/node.hpp"

namespace dyncon {

// Free-list allocator for internal local-tree nodes with nominal byte accounting.
class NodePool {
 public:
  explicit NodePool(MemoryCounter* mem = nullptr) : mem_(mem) {}
  NodePool(const NodePool&) = delete;
  NodePool& operator=(const NodePool&) = delete;

  LTNode* acquire();
  void release(LTNode* x);
  [[nodiscard]] std::size_t live() const { return live_; }

 private:
  std::vector<std::unique_ptr<LTNode[]>> slabs_;
  std::vector<LTNode*> free_;
  std::size_t live_ = 0;
  MemoryCounter* mem_;
};

// Children of one cluster. Both implementations keep clusters as leaves of
// binary trees whose internal nodes aggregate size, bitmap and mark state;
// roots carry the owner pointer so a child finds its parent by walking up.
class ChildContainer {
 public:
  ChildContainer(Cluster* owner, NodePool* pool) : owner_(owner), pool_(pool) {}
  virtual ~ChildContainer() = default;
  ChildContainer(const ChildContainer&) = delete;
  ChildContainer& operator=(const ChildContainer&) = delete;

  virtual void insert(Cluster* c) = 0;
  virtual void erase(Cluster* c) = 0;
  // c's size, bitmap or tag changed: reposition if needed and repair aggregates.
  virtual void refresh(Cluster* c) = 0;
  // Moves every child of `other` into this container.
  virtual void absorb(ChildContainer& other) = 0;
  [[nodiscard]] virtual const std::vector<LTNode*>& roots() const = 0;

  [[nodiscard]] std::size_t count() const { return count_; }
  [[nodiscard]] std::uint64_t bitmap() const;
  [[nodiscard]] std::int64_t total_size() const;
  [[nodiscard]] Cluster* owner() const { return owner_; }

  void for_each_child(const std::function<void(Cluster*)>& fn) const;
  [[nodiscard]] std::vector<Cluster*> children() const;
  // Longest path from a child to the owner, counted in edges (owner hop included).
  [[nodiscard]] int max_depth() const;
  // Recomputes every internal aggregate; returns false with a reason on mismatch.
  bool audit(std::string* why) const;

  static void pull(LTNode* x);

 protected:
  Cluster* owner_;
  NodePool* pool_;
  std::size_t count_ = 0;
};

// Rank trees over the children, roots kept in an array sorted by rank.
// Equal-rank roots are paired only when the array grows past `threshold`.
class FlattenedLocalTree final : public ChildContainer {
 public:
  FlattenedLocalTree(Cluster* owner, NodePool* pool, int threshold)
      : ChildContainer(owner, pool), threshold_(threshold < 1 ? 1 : threshold) {}
  ~FlattenedLocalTree() override;

  void insert(Cluster* c) override;
  void erase(Cluster* c) override;
  void refresh(Cluster* c) override;
  void absorb(ChildContainer& other) override;
  [[nodiscard]] const std::vector<LTNode*>& roots() const override { return roots_; }

  void consolidate();
  [[nodiscard]] int threshold() const { return threshold_; }

 private:
  void add_root(LTNode* x);
  void sort_roots();
  void release_subtree(LTNode* x);
  std::vector<LTNode*> roots_;
  int threshold_;
};

// Children grouped into size classes floor(log2 size); each class is a
// leaf-oriented weight-balanced tree keyed by (size, creation sequence).
class BatchLocalTree final : public ChildContainer {
 public:
  static constexpr double kAlpha = 0.29;

  BatchLocalTree(Cluster* owner, NodePool* pool) : ChildContainer(owner, pool) {}
  ~BatchLocalTree() override;

  void insert(Cluster* c) override;
  void erase(Cluster* c) override;
  void refresh(Cluster* c) override;
  void absorb(ChildContainer& other) override;
  [[nodiscard]] const std::vector<LTNode*>& roots() const override { return roots_; }

  void batch_insert(const std::vector<Cluster*>& cs);
  void batch_delete(const std::vector<Cluster*>& cs);
  [[nodiscard]] std::vector<Cluster*> get_maximal_prefix(std::int64_t s) const;
  [[nodiscard]] std::vector<Cluster*> get_maximal_prefix_of_subset(const std::vector<Cluster*>& subset,
                                                                   std::int64_t s) const;
  [[nodiscard]] Cluster* smallest() const;
  [[nodiscard]] Cluster* largest() const;
  [[nodiscard]] Cluster* smallest_unmarked() const;
  [[nodiscard]] Cluster* get_unmarked() const { return smallest_unmarked(); }
  void mark(Cluster* c);
  void unmark(Cluster* c);
  // Ordered enumeration by (size, creation sequence).
  [[nodiscard]] std::vector<Cluster*> sorted_children() const;
  [[nodiscard]] int class_of(const Cluster* c) const { return floor_log2(static_cast<std::uint64_t>(c->size)); }
  [[nodiscard]] std::size_t class_count(int cls) const;

 private:
  void insert_one(Cluster* c);
  void erase_one(Cluster* c);
  void rebuild_layer();
  void set_class_root(int cls, LTNode* x);
  void retrace(LTNode* x, int cls);
  void repair_path(LTNode* x);
  LTNode* rebalance(LTNode* x, int cls);
  LTNode* rotate_left(LTNode* x, int cls);
  LTNode* rotate_right(LTNode* x, int cls);
  void replace_in_parent(LTNode* old_node, LTNode* new_node, int cls);
  void check_member(const Cluster* c) const;
  void release_subtree(LTNode* x);

  std::array<LTNode*, 64> classes_{};
  std::vector<LTNode*> roots_;
};

}  // namespace dyncon
