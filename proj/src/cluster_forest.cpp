#include "dyncon/cluster_forest.hpp"

#include <algorithm>
#include <unordered_set>

namespace dyncon {

namespace {

constexpr std::int64_t kIndexEntryBytes = 32;
constexpr std::int64_t kLevelSetBytes = 32;
constexpr std::int64_t kEdgeOccurrenceBytes = static_cast<std::int64_t>(sizeof(EdgeKey));

void fuse_marks(Cluster* into, const Cluster* from) {
  into->tag = std::max(into->tag, from->tag);
  if (into->rep < 0) into->rep = from->rep;
}

// A cluster that becomes a child of a merged node no longer stands for it.
void clear_marks(Cluster* c) {
  c->tag = 0;
  c->rep = -1;
  c->unmarked = true;
}

}  // namespace

ClusterForest::ClusterForest(int n, Mode mode) : n_(n), mode_(mode), pool_(&mem_) {
  if (n < 2) throw QueryError("cluster forest needs at least two vertices");
  if (n >= (1 << 30)) throw QueryError("vertex count too large");
  lmax_ = ceil_log2(static_cast<std::uint64_t>(n));
  leaf_storage_.reserve(static_cast<std::size_t>(n));
  leaves_.reserve(static_cast<std::size_t>(n));
  for (VertexId v = 0; v < n; ++v) {
    auto x = std::make_unique<VertexLeaf>();
    x->id = v;
    x->size = 1;
    x->key_size = 1;
    x->seq = next_seq();
    x->hi = x.get();
    leaves_.push_back(x.get());
    leaf_storage_.push_back(std::move(x));
  }
  mem_.add(static_cast<std::int64_t>(sizeof(VertexLeaf)) * n);
  if (mode_ == Mode::Blocked) {
    global_root_ = new_cluster(lmax_ + 1);
    auto* blt = static_cast<BatchLocalTree*>(global_root_->children);
    std::vector<Cluster*> all(leaves_.begin(), leaves_.end());
    blt->batch_insert(all);
    recompute(global_root_);
  }
}

ClusterForest::~ClusterForest() {
  // Containers hold pool nodes; drop them before the pool goes away.
  for (Cluster& c : storage_) {
    delete c.children;
    c.children = nullptr;
  }
}

void ClusterForest::check_vertex(VertexId v) const {
  if (v < 0 || v >= n_) throw QueryError("vertex id out of range");
}

ChildContainer* ClusterForest::make_container(Cluster* owner) {
  if (mode_ == Mode::Blocked) {
    mem_.add(static_cast<std::int64_t>(sizeof(BatchLocalTree)));
    return new BatchLocalTree(owner, &pool_);
  }
  mem_.add(static_cast<std::int64_t>(sizeof(FlattenedLocalTree)));
  return new FlattenedLocalTree(owner, &pool_, std::max(1, floor_log2(static_cast<std::uint64_t>(n_))));
}

Cluster* ClusterForest::new_cluster(int level) {
  Cluster* c;
  if (!free_list_.empty()) {
    c = free_list_.back();
    free_list_.pop_back();
    *c = Cluster{};
  } else {
    storage_.emplace_back();
    c = &storage_.back();
  }
  c->level = level;
  c->seq = next_seq();
  c->hi = c;
  c->children = make_container(c);
  ++live_internal_;
  mem_.add(static_cast<std::int64_t>(sizeof(Cluster)));
  return c;
}

void ClusterForest::free_cluster(Cluster* c) {
  if (c->children == nullptr || c->children->count() != 0) {
    throw StructuralError("free_cluster: cluster still has children");
  }
  const bool blocked = mode_ == Mode::Blocked;
  delete c->children;
  c->children = nullptr;
  mem_.sub(static_cast<std::int64_t>(blocked ? sizeof(BatchLocalTree) : sizeof(FlattenedLocalTree)));
  mem_.sub(static_cast<std::int64_t>(sizeof(Cluster)));
  c->alive = false;
  c->up = c->left = c->right = nullptr;
  c->owner = nullptr;
  --live_internal_;
  graveyard_.push_back(c);
}

void ClusterForest::reclaim() {
  free_list_.insert(free_list_.end(), graveyard_.begin(), graveyard_.end());
  graveyard_.clear();
}

Cluster* ClusterForest::parent_of(const Cluster* c) {
  const LTNode* x = c;
  while (x->up != nullptr) x = x->up;
  return x->owner;
}

Cluster* ClusterForest::cluster_of(VertexId v, int l) const {
  Cluster* x = leaves_[static_cast<std::size_t>(v)];
  for (;;) {
    Cluster* p = parent_of(x);
    if (p == nullptr || p->level > l) return x;
    x = p;
  }
}

Cluster* ClusterForest::root_of(VertexId v) const {
  Cluster* x = leaves_[static_cast<std::size_t>(v)];
  for (;;) {
    Cluster* p = parent_of(x);
    if (p == nullptr || p == global_root_) return x;
    x = p;
  }
}

bool ClusterForest::connected(VertexId u, VertexId v) const {
  check_vertex(u);
  check_vertex(v);
  return u == v || root_of(u) == root_of(v);
}

Cluster* ClusterForest::lowest_common(VertexId u, VertexId v) const {
  std::vector<Cluster*> path;
  for (Cluster* x = leaves_[static_cast<std::size_t>(u)]; x != nullptr; x = parent_of(x)) path.push_back(x);
  for (Cluster* y = leaves_[static_cast<std::size_t>(v)]; y != nullptr; y = parent_of(y)) {
    if (y == global_root_) return nullptr;
    if (std::find(path.begin(), path.end(), y) != path.end()) return y;
  }
  return nullptr;
}

bool ClusterForest::recompute(Cluster* c) {
  if (c->is_leaf()) return false;
  const std::int64_t s = c->children->total_size();
  const std::uint64_t b = c->children->bitmap();
  const bool changed = s != c->size || b != c->bitmap;
  c->size = s;
  c->bitmap = b;
  return changed;
}

void ClusterForest::propagate(Cluster* c) {
  for (;;) {
    Cluster* p = parent_of(c);
    if (p == nullptr) return;
    p->children->refresh(c);
    if (!recompute(p)) return;
    c = p;
  }
}

void ClusterForest::leaf_bits_changed(VertexLeaf* x) { propagate(x); }

void ClusterForest::add_child(Cluster* p, Cluster* c) {
  if (p->is_leaf() || c->level >= p->level) throw StructuralError("add_child: level mismatch");
  if (parent_of(c) != nullptr) throw StructuralError("add_child: child already attached");
  p->children->insert(c);
  recompute(p);
  propagate(p);
}

void ClusterForest::remove_child(Cluster* p, Cluster* c) {
  if (parent_of(c) != p) throw StructuralError("remove_child: not a child");
  p->children->erase(c);
  recompute(p);
  propagate(p);
}

Cluster* ClusterForest::merge(Cluster* a, Cluster* b) {
  if (a->level != b->level || a->is_leaf() || b->is_leaf()) throw StructuralError("merge: level mismatch");
  Cluster* p = parent_of(a);
  if (parent_of(b) != p) throw StructuralError("merge: clusters have different parents");
  if (a->size + b->size > cap(a->level)) throw StructuralError("merge: size invariant violated");
  Cluster* keep = a->children->count() >= b->children->count() ? a : b;
  Cluster* gone = keep == a ? b : a;
  if (p != nullptr) p->children->erase(gone);
  keep->children->absorb(*gone->children);
  fuse_marks(keep, gone);
  keep->unmarked = keep->unmarked && gone->unmarked;
  free_cluster(gone);
  recompute(keep);
  if (p != nullptr) {
    p->children->refresh(keep);
    recompute(p);
    propagate(p);
  }
  return keep;
}

EdgeKey ClusterForest::fetch_edge(const Cluster* c, int i) {
  if (!has_bit(c->bitmap, i)) throw StructuralError("fetch_edge: no edge at this level");
  const Cluster* x = c;
  while (!x->is_leaf()) {
    const LTNode* y = nullptr;
    for (const LTNode* r : x->children->roots()) {
      if (has_bit(r->bitmap, i)) {
        y = r;
        break;
      }
    }
    if (y == nullptr) throw StructuralError("fetch_edge: bitmap out of sync");
    while (!y->is_cluster) y = has_bit(y->left->bitmap, i) ? y->left : y->right;
    x = static_cast<const Cluster*>(y);
  }
  ++stats_.fetches;
  return leaf_fetch_any_edge(*static_cast<const VertexLeaf*>(x), i);
}

std::vector<EdgeKey> ClusterForest::fetch_edges(std::size_t k, const Cluster* c, int i) {
  std::vector<EdgeKey> out;
  if (k == 0 || !has_bit(c->bitmap, i)) return out;
  std::unordered_set<EdgeKey, EdgeKeyHash> seen;
  std::vector<const LTNode*> stack{c};
  while (!stack.empty() && out.size() < k) {
    const LTNode* x = stack.back();
    stack.pop_back();
    if (!has_bit(x->bitmap, i)) continue;
    if (!x->is_cluster) {
      stack.push_back(x->right);
      stack.push_back(x->left);
      continue;
    }
    const auto* cl = static_cast<const Cluster*>(x);
    if (cl->is_leaf()) {
      const auto* edges = static_cast<const VertexLeaf*>(cl)->edges_at(i);
      for (const EdgeKey& e : *edges) {
        if (seen.insert(e).second) {
          out.push_back(e);
          if (out.size() == k) break;
        }
      }
      continue;
    }
    const auto& rs = cl->children->roots();
    for (auto it = rs.rbegin(); it != rs.rend(); ++it) stack.push_back(*it);
  }
  stats_.fetches += out.size();
  return out;
}

const EdgeRecord* ClusterForest::find_edge(EdgeKey e) const {
  auto it = index_.find(e);
  return it == index_.end() ? nullptr : &it->second;
}

EdgeRecord& ClusterForest::record(EdgeKey e) {
  auto it = index_.find(e);
  if (it == index_.end()) throw StructuralError("edge not present");
  return it->second;
}

void ClusterForest::attach_edge(EdgeKey e, int level, bool is_tree) {
  check_vertex(e.a);
  check_vertex(e.b);
  if (e.a == e.b) throw QueryError("self-loop edges are not allowed");
  if (index_.count(e) != 0) throw StructuralError("attach_edge: edge already present");
  for (VertexId v : {e.a, e.b}) {
    VertexLeaf* x = leaves_[static_cast<std::size_t>(v)];
    if (leaf_add_edge(*x, e, level)) {
      mem_.add(kLevelSetBytes);
      leaf_bits_changed(x);
    }
  }
  index_.emplace(e, EdgeRecord{level, is_tree});
  mem_.add(kIndexEntryBytes + 2 * kEdgeOccurrenceBytes);
}

EdgeRecord ClusterForest::detach_edge(EdgeKey e) {
  auto it = index_.find(e);
  if (it == index_.end()) throw StructuralError("detach_edge: edge not present");
  const EdgeRecord rec = it->second;
  index_.erase(it);
  for (VertexId v : {e.a, e.b}) {
    VertexLeaf* x = leaves_[static_cast<std::size_t>(v)];
    if (leaf_remove_edge(*x, e, rec.level)) {
      mem_.sub(kLevelSetBytes);
      leaf_bits_changed(x);
    }
  }
  mem_.sub(kIndexEntryBytes + 2 * kEdgeOccurrenceBytes);
  return rec;
}

void ClusterForest::set_edge_level(EdgeKey e, int level) {
  EdgeRecord& rec = record(e);
  if (rec.level == level) return;
  const int old = rec.level;
  rec.level = level;
  for (VertexId v : {e.a, e.b}) {
    VertexLeaf* x = leaves_[static_cast<std::size_t>(v)];
    bool changed = false;
    if (leaf_remove_edge(*x, e, old)) {
      mem_.sub(kLevelSetBytes);
      changed = true;
    }
    if (leaf_add_edge(*x, e, level)) {
      mem_.add(kLevelSetBytes);
      changed = true;
    }
    if (changed) leaf_bits_changed(x);
  }
}

bool ClusterForest::is_self_loop(EdgeKey e) const {
  const EdgeRecord* rec = find_edge(e);
  if (rec == nullptr) throw StructuralError("is_self_loop: edge not present");
  return cluster_of(e.a, rec->level - 1) == cluster_of(e.b, rec->level - 1);
}

bool ClusterForest::is_blocked(EdgeKey e) const {
  const EdgeRecord* rec = find_edge(e);
  if (rec == nullptr) throw StructuralError("is_blocked: edge not present");
  if (rec->level < 1) return false;
  const Cluster* a = cluster_of(e.a, rec->level - 1);
  const Cluster* b = cluster_of(e.b, rec->level - 1);
  if (a == b) return false;
  return a->size + b->size > cap(rec->level - 1);
}

Cluster* ClusterForest::push_down(EdgeKey e) {
  const int level = record(e).level;
  if (level < 2) throw StructuralError("push_down: edge already at level 1");
  Cluster* a = cluster_of(e.a, level - 1);
  Cluster* b = cluster_of(e.b, level - 1);
  ++stats_.pushdowns;
  if (a == b) {
    set_edge_level(e, level - 1);
    return nullptr;
  }
  Cluster* p = parent_of(a);
  if (p == nullptr || parent_of(b) != p || p->level != level) {
    throw StructuralError("push_down: endpoint clusters do not share a level-i parent");
  }
  if (a->size + b->size > cap(level - 1)) throw StructuralError("push_down: size invariant violated");
  set_edge_level(e, level - 1);
  return join_at_level(level - 1, a, b, p);
}

Cluster* ClusterForest::join_at_level(int l, Cluster* a, Cluster* b, Cluster* p) {
  if (a == b) return a;
  if (a->level > l || b->level > l) throw StructuralError("join_at_level: cluster above target level");
  if (a->size + b->size > cap(l)) throw StructuralError("join_at_level: size invariant violated");
  Cluster* result;
  if (a->level == l && b->level == l) {
    Cluster* keep = a->children->count() >= b->children->count() ? a : b;
    Cluster* gone = keep == a ? b : a;
    if (p != nullptr) p->children->erase(gone);
    keep->children->absorb(*gone->children);
    fuse_marks(keep, gone);
    keep->unmarked = keep->unmarked && gone->unmarked;
    free_cluster(gone);
    recompute(keep);
    result = keep;
    if (p != nullptr) p->children->refresh(keep);
  } else if (a->level == l || b->level == l) {
    Cluster* host = a->level == l ? a : b;
    Cluster* guest = host == a ? b : a;
    if (p != nullptr) p->children->erase(guest);
    fuse_marks(host, guest);
    host->unmarked = host->unmarked && guest->unmarked;
    clear_marks(guest);
    host->children->insert(guest);
    recompute(host);
    result = host;
    if (p != nullptr) p->children->refresh(host);
  } else {
    Cluster* fresh = new_cluster(l);
    if (p != nullptr) {
      p->children->erase(a);
      p->children->erase(b);
    }
    fuse_marks(fresh, a);
    fuse_marks(fresh, b);
    fresh->unmarked = a->unmarked && b->unmarked;
    clear_marks(a);
    clear_marks(b);
    fresh->children->insert(a);
    fresh->children->insert(b);
    recompute(fresh);
    if (p != nullptr) p->children->insert(fresh);
    result = fresh;
  }
  if (p != nullptr) {
    recompute(p);
    propagate(p);
    splice_if_trivial(p);
  }
  return result;
}

bool ClusterForest::splice_if_trivial(Cluster* p) {
  if (p == nullptr || p == global_root_ || p->is_leaf() || !p->alive) return false;
  if (p->children->count() != 1) return false;
  Cluster* child = p->children->children().front();
  Cluster* g = parent_of(p);
  p->children->erase(child);
  // The child takes over p's place, including any restoration marks.
  child->tag = p->tag;
  child->rep = p->rep;
  child->unmarked = p->unmarked;
  if (g != nullptr) {
    g->children->erase(p);
    g->children->insert(child);
  }
  free_cluster(p);
  return true;
}

Cluster* ClusterForest::attach_beside(Cluster* anchor, Cluster* c, int l) {
  if (c->level >= l || anchor->level >= l) throw StructuralError("attach_beside: level mismatch");
  if (parent_of(c) != nullptr) throw StructuralError("attach_beside: cluster still attached");
  Cluster* g = parent_of(anchor);
  if (g != nullptr && g->level == l) {
    g->children->insert(c);
    recompute(g);
    propagate(g);
    return g;
  }
  if (g == nullptr && l > lmax_) return nullptr;
  Cluster* q = new_cluster(l);
  if (g != nullptr) g->children->erase(anchor);
  q->children->insert(anchor);
  q->children->insert(c);
  recompute(q);
  if (g != nullptr) {
    g->children->insert(q);
    recompute(g);
    propagate(g);
  }
  return q;
}

std::vector<Cluster*> ClusterForest::internal_clusters() const {
  std::vector<Cluster*> out;
  out.reserve(live_internal_);
  for (const Cluster& c : storage_) {
    if (c.alive && c.children != nullptr) out.push_back(const_cast<Cluster*>(&c));
  }
  return out;
}

std::vector<Cluster*> ClusterForest::roots() const {
  if (global_root_ != nullptr) return global_root_->children->children();
  std::vector<Cluster*> out;
  for (const Cluster& c : storage_) {
    if (c.alive && c.children != nullptr && parent_of(&c) == nullptr) out.push_back(const_cast<Cluster*>(&c));
  }
  for (VertexLeaf* x : leaves_) {
    if (parent_of(x) == nullptr) out.push_back(x);
  }
  return out;
}

}  // namespace dyncon
