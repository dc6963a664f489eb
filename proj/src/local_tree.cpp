#include "dyncon/local_tree.hpp"

#include <algorithm>
#include <unordered_map>

namespace dyncon {

namespace {

constexpr std::size_t kSlab = 1024;

bool key_less(const Cluster* x, const Cluster* y) {
  return x->key_size != y->key_size ? x->key_size < y->key_size : x->seq < y->seq;
}

void collect_clusters(const LTNode* x, std::vector<Cluster*>& out) {
  if (x->is_cluster) {
    out.push_back(static_cast<Cluster*>(const_cast<LTNode*>(x)));
    return;
  }
  collect_clusters(x->left, out);
  collect_clusters(x->right, out);
}

LTNode* leftmost(LTNode* x) {
  while (!x->is_cluster) x = x->left;
  return x;
}

LTNode* rightmost(LTNode* x) {
  while (!x->is_cluster) x = x->right;
  return x;
}

}  // namespace

LTNode* NodePool::acquire() {
  if (free_.empty()) {
    slabs_.emplace_back(new LTNode[kSlab]);
    LTNode* base = slabs_.back().get();
    for (std::size_t i = kSlab; i-- > 0;) free_.push_back(base + i);
  }
  LTNode* x = free_.back();
  free_.pop_back();
  *x = LTNode{};
  ++live_;
  if (mem_ != nullptr) mem_->add(static_cast<std::int64_t>(sizeof(LTNode)));
  return x;
}

void NodePool::release(LTNode* x) {
  free_.push_back(x);
  --live_;
  if (mem_ != nullptr) mem_->sub(static_cast<std::int64_t>(sizeof(LTNode)));
}

std::uint64_t ChildContainer::bitmap() const {
  std::uint64_t b = 0;
  for (const LTNode* r : roots()) b |= r->bitmap;
  return b;
}

std::int64_t ChildContainer::total_size() const {
  std::int64_t s = 0;
  for (const LTNode* r : roots()) s += r->size;
  return s;
}

void ChildContainer::for_each_child(const std::function<void(Cluster*)>& fn) const {
  std::vector<const LTNode*> stack(roots().begin(), roots().end());
  while (!stack.empty()) {
    const LTNode* x = stack.back();
    stack.pop_back();
    if (x->is_cluster) {
      fn(static_cast<Cluster*>(const_cast<LTNode*>(x)));
    } else {
      stack.push_back(x->right);
      stack.push_back(x->left);
    }
  }
}

std::vector<Cluster*> ChildContainer::children() const {
  std::vector<Cluster*> out;
  out.reserve(count_);
  for (const LTNode* r : roots()) collect_clusters(r, out);
  return out;
}

int ChildContainer::max_depth() const {
  int best = 0;
  std::vector<std::pair<const LTNode*, int>> stack;
  for (const LTNode* r : roots()) stack.emplace_back(r, 1);
  while (!stack.empty()) {
    auto [x, d] = stack.back();
    stack.pop_back();
    if (x->is_cluster) {
      best = std::max(best, d);
    } else {
      stack.emplace_back(x->left, d + 1);
      stack.emplace_back(x->right, d + 1);
    }
  }
  return best;
}

void ChildContainer::pull(LTNode* x) {
  const LTNode* l = x->left;
  const LTNode* r = x->right;
  x->size = l->size + r->size;
  x->bitmap = l->bitmap | r->bitmap;
  x->weight = l->weight + r->weight;
  x->unmarked = l->unmarked || r->unmarked;
  x->hi = r->hi;
}

bool ChildContainer::audit(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why != nullptr) *why = msg;
    return false;
  };
  std::size_t leaves = 0;
  struct Frame {
    const LTNode* x;
    bool done;
  };
  for (const LTNode* r : roots()) {
    if (r->up != nullptr) return fail("root has a parent pointer");
    if (r->owner != owner_) return fail("root owner mismatch");
    std::vector<Frame> stack{{r, false}};
    while (!stack.empty()) {
      Frame f = stack.back();
      stack.pop_back();
      const LTNode* x = f.x;
      if (x->is_cluster) {
        ++leaves;
        if (x->weight != 1) return fail("cluster weight is not 1");
        continue;
      }
      if (!f.done) {
        if (x->left == nullptr || x->right == nullptr) return fail("internal node missing a child");
        if (x->left->up != x || x->right->up != x) return fail("broken up pointer");
        stack.push_back({x, true});
        stack.push_back({x->left, false});
        stack.push_back({x->right, false});
        continue;
      }
      const LTNode* l = x->left;
      const LTNode* rr = x->right;
      if (x->size != l->size + rr->size) return fail("internal size mismatch");
      if (x->bitmap != (l->bitmap | rr->bitmap)) return fail("internal bitmap mismatch");
      if (x->weight != l->weight + rr->weight) return fail("internal weight mismatch");
      if (x->unmarked != (l->unmarked || rr->unmarked)) return fail("internal mark flag mismatch");
    }
  }
  if (leaves != count_) return fail("child count mismatch");
  return true;
}

// ---------------------------------------------------------------------------
// FlattenedLocalTree

FlattenedLocalTree::~FlattenedLocalTree() {
  for (LTNode* r : roots_) release_subtree(r);
}

void FlattenedLocalTree::release_subtree(LTNode* x) {
  if (x->is_cluster) return;
  release_subtree(x->left);
  release_subtree(x->right);
  pool_->release(x);
}

void FlattenedLocalTree::add_root(LTNode* x) {
  x->up = nullptr;
  x->owner = owner_;
  auto it = std::upper_bound(roots_.begin(), roots_.end(), x,
                             [](const LTNode* a, const LTNode* b) { return a->rank < b->rank; });
  roots_.insert(it, x);
}

void FlattenedLocalTree::sort_roots() {
  std::stable_sort(roots_.begin(), roots_.end(),
                   [](const LTNode* a, const LTNode* b) { return a->rank < b->rank; });
}

void FlattenedLocalTree::insert(Cluster* c) {
  c->up = nullptr;
  c->left = c->right = nullptr;
  c->weight = 1;
  c->hi = c;
  c->key_size = c->size;
  c->rank = static_cast<std::int16_t>(floor_log2(static_cast<std::uint64_t>(c->size)));
  add_root(c);
  ++count_;
  if (static_cast<int>(roots_.size()) > threshold_) consolidate();
}

void FlattenedLocalTree::consolidate() {
  std::vector<LTNode*> out;
  std::size_t i = 0;
  std::sort(roots_.begin(), roots_.end(),
            [](const LTNode* a, const LTNode* b) { return a->rank < b->rank; });
  // Sweep ranks upward, pairing equal ranks; a paired node re-enters at rank+1.
  std::vector<LTNode*> pending;
  while (i < roots_.size() || !pending.empty()) {
    int r;
    if (pending.empty()) {
      r = roots_[i]->rank;
    } else if (i < roots_.size()) {
      r = std::min<int>(roots_[i]->rank, pending.front()->rank);
    } else {
      r = pending.front()->rank;
    }
    std::vector<LTNode*> bucket;
    for (LTNode* p : pending) bucket.push_back(p);
    pending.clear();
    while (i < roots_.size() && roots_[i]->rank == r) bucket.push_back(roots_[i++]);
    std::size_t k = 0;
    for (; k + 1 < bucket.size(); k += 2) {
      LTNode* n = pool_->acquire();
      n->left = bucket[k];
      n->right = bucket[k + 1];
      bucket[k]->up = n;
      bucket[k + 1]->up = n;
      bucket[k]->owner = nullptr;
      bucket[k + 1]->owner = nullptr;
      n->rank = static_cast<std::int16_t>(r + 1);
      pull(n);
      pending.push_back(n);
    }
    if (k < bucket.size()) out.push_back(bucket[k]);
  }
  roots_.swap(out);
  for (LTNode* x : roots_) {
    x->up = nullptr;
    x->owner = owner_;
  }
}

void FlattenedLocalTree::erase(Cluster* c) {
  // Walk up to check membership before mutating.
  const LTNode* r = c;
  while (r->up != nullptr) r = r->up;
  if (r->owner != owner_) throw StructuralError("local tree: erase of absent child");
  // Ancestors are released only after the old root has been located.
  LTNode* x = c;
  LTNode* p = x->up;
  std::vector<LTNode*> freed;
  while (p != nullptr) {
    LTNode* sib = p->left == x ? p->right : p->left;
    freed.push_back(p);
    sib->up = nullptr;
    x = p;
    p = p->up;
    add_root(sib);
  }
  auto it = std::find(roots_.begin(), roots_.end(), x);
  if (it == roots_.end()) throw StructuralError("local tree: child not present");
  roots_.erase(it);
  for (LTNode* f : freed) pool_->release(f);
  c->up = nullptr;
  c->owner = nullptr;
  --count_;
  if (static_cast<int>(roots_.size()) > threshold_) consolidate();
}

void FlattenedLocalTree::refresh(Cluster* c) {
  const int rank = floor_log2(static_cast<std::uint64_t>(c->size));
  if (rank != c->rank) {
    erase(c);
    insert(c);
    return;
  }
  c->key_size = c->size;
  LTNode* x = c->up;
  while (x != nullptr) {
    const std::int64_t s = x->size;
    const std::uint64_t b = x->bitmap;
    const bool u = x->unmarked;
    pull(x);
    if (x->size == s && x->bitmap == b && x->unmarked == u) break;
    x = x->up;
  }
}

void FlattenedLocalTree::absorb(ChildContainer& other) {
  auto* o = dynamic_cast<FlattenedLocalTree*>(&other);
  if (o == nullptr) throw StructuralError("local tree: absorb across container kinds");
  for (LTNode* r : o->roots_) {
    r->owner = owner_;
    r->up = nullptr;
    roots_.push_back(r);
  }
  count_ += o->count_;
  o->roots_.clear();
  o->count_ = 0;
  sort_roots();
  if (static_cast<int>(roots_.size()) > threshold_) consolidate();
}

// ---------------------------------------------------------------------------
// BatchLocalTree

BatchLocalTree::~BatchLocalTree() {
  for (LTNode* r : classes_) {
    if (r != nullptr) release_subtree(r);
  }
}

void BatchLocalTree::release_subtree(LTNode* x) {
  if (x->is_cluster) return;
  release_subtree(x->left);
  release_subtree(x->right);
  pool_->release(x);
}

void BatchLocalTree::check_member(const Cluster* c) const {
  const LTNode* r = c;
  while (r->up != nullptr) r = r->up;
  if (r->owner != owner_) throw StructuralError("batch local tree: cluster is not a child");
  const int cls = floor_log2(static_cast<std::uint64_t>(c->key_size));
  if (classes_[static_cast<std::size_t>(cls)] != r) {
    throw StructuralError("batch local tree: cluster is not a child");
  }
}

void BatchLocalTree::rebuild_layer() {
  roots_.clear();
  for (LTNode* r : classes_) {
    if (r != nullptr) roots_.push_back(r);
  }
}

void BatchLocalTree::set_class_root(int cls, LTNode* x) {
  classes_[static_cast<std::size_t>(cls)] = x;
  if (x != nullptr) {
    x->up = nullptr;
    x->owner = owner_;
  }
}

void BatchLocalTree::replace_in_parent(LTNode* old_node, LTNode* new_node, int cls) {
  LTNode* p = old_node->up;
  if (p == nullptr) {
    old_node->owner = nullptr;
    set_class_root(cls, new_node);
    return;
  }
  if (p->left == old_node) {
    p->left = new_node;
  } else {
    p->right = new_node;
  }
  new_node->up = p;
  new_node->owner = nullptr;
}

LTNode* BatchLocalTree::rotate_left(LTNode* x, int cls) {
  LTNode* r = x->right;
  replace_in_parent(x, r, cls);
  x->right = r->left;
  x->right->up = x;
  r->left = x;
  x->up = r;
  x->owner = nullptr;
  pull(x);
  pull(r);
  return r;
}

LTNode* BatchLocalTree::rotate_right(LTNode* x, int cls) {
  LTNode* l = x->left;
  replace_in_parent(x, l, cls);
  x->left = l->right;
  x->left->up = x;
  l->right = x;
  x->up = l;
  x->owner = nullptr;
  pull(x);
  pull(l);
  return l;
}

LTNode* BatchLocalTree::rebalance(LTNode* x, int cls) {
  const double w = x->weight;
  const double d = 1.0 / (2.0 - kAlpha);
  if (x->left->weight < kAlpha * w) {
    LTNode* r = x->right;
    if (!r->is_cluster && r->left->weight >= d * r->weight) rotate_right(r, cls);
    return rotate_left(x, cls);
  }
  if (x->right->weight < kAlpha * w) {
    LTNode* l = x->left;
    if (!l->is_cluster && l->right->weight >= d * l->weight) rotate_left(l, cls);
    return rotate_right(x, cls);
  }
  return x;
}

void BatchLocalTree::retrace(LTNode* x, int cls) {
  while (x != nullptr) {
    pull(x);
    x = rebalance(x, cls);
    x = x->up;
  }
}

void BatchLocalTree::repair_path(LTNode* x) {
  while (x != nullptr) {
    const std::uint64_t b = x->bitmap;
    const bool u = x->unmarked;
    const std::int64_t s = x->size;
    pull(x);
    if (x->bitmap == b && x->unmarked == u && x->size == s) break;
    x = x->up;
  }
}

void BatchLocalTree::insert_one(Cluster* c) {
  c->up = nullptr;
  c->left = c->right = nullptr;
  c->owner = nullptr;
  c->weight = 1;
  c->hi = c;
  c->key_size = c->size;
  const int cls = floor_log2(static_cast<std::uint64_t>(c->key_size));
  LTNode* root = classes_[static_cast<std::size_t>(cls)];
  ++count_;
  if (root == nullptr) {
    set_class_root(cls, c);
    return;
  }
  LTNode* x = root;
  while (!x->is_cluster) x = key_less(c, x->left->hi) ? x->left : x->right;
  LTNode* n = pool_->acquire();
  replace_in_parent(x, n, cls);
  if (key_less(c, static_cast<Cluster*>(x))) {
    n->left = c;
    n->right = x;
  } else {
    n->left = x;
    n->right = c;
  }
  c->up = n;
  x->up = n;
  x->owner = nullptr;
  retrace(n, cls);
}

void BatchLocalTree::erase_one(Cluster* c) {
  const int cls = floor_log2(static_cast<std::uint64_t>(c->key_size));
  LTNode* p = c->up;
  --count_;
  if (p == nullptr) {
    if (classes_[static_cast<std::size_t>(cls)] != c) throw StructuralError("batch local tree: absent child");
    set_class_root(cls, nullptr);
  } else {
    LTNode* sib = p->left == c ? p->right : p->left;
    LTNode* g = p->up;
    replace_in_parent(p, sib, cls);
    pool_->release(p);
    retrace(g, cls);
  }
  c->up = nullptr;
  c->owner = nullptr;
}

void BatchLocalTree::insert(Cluster* c) {
  insert_one(c);
  rebuild_layer();
}

void BatchLocalTree::erase(Cluster* c) {
  check_member(c);
  erase_one(c);
  rebuild_layer();
}

void BatchLocalTree::refresh(Cluster* c) {
  if (c->size != c->key_size) {
    erase_one(c);
    insert_one(c);
    rebuild_layer();
    return;
  }
  repair_path(c->up);
}

void BatchLocalTree::absorb(ChildContainer& other) {
  auto* o = dynamic_cast<BatchLocalTree*>(&other);
  if (o == nullptr) throw StructuralError("local tree: absorb across container kinds");
  std::vector<Cluster*> moved = o->children();
  for (LTNode*& r : o->classes_) {
    if (r != nullptr) {
      o->release_subtree(r);
      r = nullptr;
    }
  }
  o->roots_.clear();
  o->count_ = 0;
  for (Cluster* c : moved) insert_one(c);
  rebuild_layer();
}

void BatchLocalTree::batch_insert(const std::vector<Cluster*>& cs) {
  for (Cluster* c : cs) {
    const LTNode* r = c;
    while (r->up != nullptr) r = r->up;
    if (r->owner == owner_) throw StructuralError("batch local tree: duplicate insert");
  }
  for (Cluster* c : cs) insert_one(c);
  rebuild_layer();
}

void BatchLocalTree::batch_delete(const std::vector<Cluster*>& cs) {
  for (Cluster* c : cs) check_member(c);
  for (Cluster* c : cs) erase_one(c);
  rebuild_layer();
}

std::vector<Cluster*> BatchLocalTree::get_maximal_prefix(std::int64_t s) const {
  std::vector<Cluster*> out;
  for (const LTNode* root : classes_) {
    if (root == nullptr) continue;
    if (root->size <= s) {
      collect_clusters(root, out);
      s -= root->size;
      continue;
    }
    const LTNode* x = root;
    while (!x->is_cluster) {
      if (x->left->size <= s) {
        collect_clusters(x->left, out);
        s -= x->left->size;
        x = x->right;
      } else {
        x = x->left;
      }
    }
    if (x->size <= s) out.push_back(static_cast<Cluster*>(const_cast<LTNode*>(x)));
    break;
  }
  return out;
}

std::vector<Cluster*> BatchLocalTree::get_maximal_prefix_of_subset(const std::vector<Cluster*>& subset,
                                                                   std::int64_t s) const {
  std::vector<Cluster*> out;
  if (subset.empty()) return out;
  // Mark ancestors with the subset total beneath them.
  std::unordered_map<const LTNode*, std::int64_t> sum;
  sum.reserve(subset.size() * 8);
  for (const Cluster* c : subset) {
    check_member(c);
    if (sum.count(c) != 0) continue;
    const LTNode* x = c;
    const std::int64_t w = c->size;
    while (x != nullptr) {
      sum[x] += w;
      x = x->up;
    }
  }
  auto marked = [&](const LTNode* x) -> std::int64_t {
    auto it = sum.find(x);
    return it == sum.end() ? -1 : it->second;
  };
  std::function<void(const LTNode*)> take_all = [&](const LTNode* x) {
    if (marked(x) < 0) return;
    if (x->is_cluster) {
      out.push_back(static_cast<Cluster*>(const_cast<LTNode*>(x)));
      return;
    }
    take_all(x->left);
    take_all(x->right);
  };
  for (const LTNode* root : classes_) {
    if (root == nullptr) continue;
    const std::int64_t total = marked(root);
    if (total < 0) continue;
    if (total <= s) {
      take_all(root);
      s -= total;
      continue;
    }
    const LTNode* x = root;
    while (!x->is_cluster) {
      const std::int64_t ls = marked(x->left);
      if (ls < 0) {
        x = x->right;
      } else if (ls <= s) {
        take_all(x->left);
        s -= ls;
        x = x->right;
      } else {
        x = x->left;
      }
    }
    if (marked(x) >= 0 && x->size <= s) out.push_back(static_cast<Cluster*>(const_cast<LTNode*>(x)));
    break;
  }
  return out;
}

Cluster* BatchLocalTree::smallest() const {
  for (LTNode* root : classes_) {
    if (root != nullptr) return static_cast<Cluster*>(leftmost(root));
  }
  throw QueryError("batch local tree: smallest of empty tree");
}

Cluster* BatchLocalTree::largest() const {
  for (std::size_t i = classes_.size(); i-- > 0;) {
    if (classes_[i] != nullptr) return static_cast<Cluster*>(rightmost(classes_[i]));
  }
  throw QueryError("batch local tree: largest of empty tree");
}

Cluster* BatchLocalTree::smallest_unmarked() const {
  for (LTNode* root : classes_) {
    if (root == nullptr || !root->unmarked) continue;
    LTNode* x = root;
    while (!x->is_cluster) x = x->left->unmarked ? x->left : x->right;
    return static_cast<Cluster*>(x);
  }
  return nullptr;
}

void BatchLocalTree::mark(Cluster* c) {
  if (!c->unmarked) return;
  c->unmarked = false;
  repair_path(c->up);
}

void BatchLocalTree::unmark(Cluster* c) {
  if (c->unmarked) return;
  c->unmarked = true;
  repair_path(c->up);
}

std::vector<Cluster*> BatchLocalTree::sorted_children() const {
  std::vector<Cluster*> out;
  out.reserve(count_);
  for (const LTNode* root : classes_) {
    if (root != nullptr) collect_clusters(root, out);
  }
  return out;
}

std::size_t BatchLocalTree::class_count(int cls) const {
  const LTNode* r = classes_[static_cast<std::size_t>(cls)];
  return r == nullptr ? 0 : static_cast<std::size_t>(r->weight);
}

}  // namespace dyncon
