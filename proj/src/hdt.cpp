#include "dyncon/hdt.hpp"

#include <algorithm>

namespace dyncon {

namespace {

constexpr std::int64_t kEdgeRecordBytes = 32;
constexpr std::int64_t kArcSlotBytes = 16;
constexpr std::int64_t kAdjacencySetBytes = 32;
constexpr std::int64_t kAdjacencyEntryBytes = 8;

}  // namespace

HdtConnectivity::HdtConnectivity(int n, std::uint64_t seed) : n_(n), rng_(static_cast<std::uint32_t>(seed)) {
  if (n < 2) throw QueryError("hdt needs at least two vertices");
  lmax_ = ceil_log2(static_cast<std::uint64_t>(n));
  vertex_nodes_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(lmax_));
  for (int level = 1; level <= lmax_; ++level) {
    for (VertexId v = 0; v < n; ++v) {
      Node* x = vertex_node(v, level);
      x->a = x->b = v;
      x->prio = rng_();
      update(x);
    }
  }
  mem_.add(static_cast<std::int64_t>(sizeof(Node)) * n * lmax_);
}

Stats HdtConnectivity::stats() const {
  Stats s = stats_;
  s.bytes = mem_.current();
  s.peak_bytes = mem_.peak();
  return s;
}

void HdtConnectivity::update(Node* x) {
  x->count = 1;
  x->vertices = x->is_vertex() ? 1 : 0;
  x->any_tree = x->tree_mark;
  x->any_nontree = x->nontree_mark;
  for (const Node* c : {x->left, x->right}) {
    if (c == nullptr) continue;
    x->count += c->count;
    x->vertices += c->vertices;
    x->any_tree = x->any_tree || c->any_tree;
    x->any_nontree = x->any_nontree || c->any_nontree;
  }
}

void HdtConnectivity::pull_up(Node* x) {
  for (; x != nullptr; x = x->parent) update(x);
}

HdtConnectivity::Node* HdtConnectivity::join(Node* a, Node* b) {
  if (a == nullptr) return b;
  if (b == nullptr) return a;
  if (a->prio > b->prio) {
    a->right = join(a->right, b);
    a->right->parent = a;
    update(a);
    return a;
  }
  b->left = join(a, b->left);
  b->left->parent = b;
  update(b);
  return b;
}

void HdtConnectivity::split(Node* t, int k, Node** a, Node** b) {
  if (t == nullptr) {
    *a = *b = nullptr;
    return;
  }
  const int left = t->left == nullptr ? 0 : t->left->count;
  if (left >= k) {
    split(t->left, k, a, &t->left);
    if (t->left != nullptr) t->left->parent = t;
    *b = t;
  } else {
    split(t->right, k - left - 1, &t->right, b);
    if (t->right != nullptr) t->right->parent = t;
    *a = t;
  }
  update(t);
  if (*a != nullptr) (*a)->parent = nullptr;
  if (*b != nullptr) (*b)->parent = nullptr;
}

int HdtConnectivity::index_of(Node* x) {
  int i = x->left == nullptr ? 0 : x->left->count;
  for (; x->parent != nullptr; x = x->parent) {
    if (x == x->parent->right) i += 1 + (x->parent->left == nullptr ? 0 : x->parent->left->count);
  }
  return i;
}

HdtConnectivity::Node* HdtConnectivity::root_of(Node* x) {
  while (x->parent != nullptr) x = x->parent;
  return x;
}

HdtConnectivity::Node* HdtConnectivity::new_arc(VertexId a, VertexId b) {
  Node* x;
  if (!free_arcs_.empty()) {
    x = free_arcs_.back();
    free_arcs_.pop_back();
    *x = Node{};
  } else {
    arc_storage_.emplace_back();
    x = &arc_storage_.back();
  }
  x->a = a;
  x->b = b;
  x->prio = rng_();
  update(x);
  mem_.add(static_cast<std::int64_t>(sizeof(Node)));
  return x;
}

void HdtConnectivity::free_arc(Node* x) {
  mem_.sub(static_cast<std::int64_t>(sizeof(Node)));
  free_arcs_.push_back(x);
}

void HdtConnectivity::reroot(Node* x) {
  Node* r = root_of(x);
  Node* front = nullptr;
  Node* back = nullptr;
  split(r, index_of(x), &front, &back);
  join(back, front);
}

std::pair<HdtConnectivity::Node*, HdtConnectivity::Node*> HdtConnectivity::link(VertexId u, VertexId v, int level) {
  Node* a1 = new_arc(u, v);
  Node* a2 = new_arc(v, u);
  Node* xu = vertex_node(u, level);
  Node* xv = vertex_node(v, level);
  reroot(xu);
  reroot(xv);
  join(join(join(root_of(xu), a1), root_of(xv)), a2);
  ++stats_.links;
  return {a1, a2};
}

void HdtConnectivity::cut(std::pair<Node*, Node*> arcs) {
  Node* first = arcs.first;
  Node* second = arcs.second;
  Node* r = root_of(first);
  int i1 = index_of(first);
  int i2 = index_of(second);
  if (i1 > i2) {
    std::swap(first, second);
    std::swap(i1, i2);
  }
  Node* head = nullptr;
  Node* rest = nullptr;
  split(r, i2, &head, &rest);
  Node* arc = nullptr;
  Node* tail = nullptr;
  split(rest, 1, &arc, &tail);
  Node* outer = nullptr;
  Node* middle = nullptr;
  split(head, i1, &outer, &middle);
  Node* inner = nullptr;
  split(middle, 1, &arc, &inner);
  join(outer, tail);
  free_arc(first);
  free_arc(second);
  ++stats_.cuts;
}

std::unordered_set<VertexId>& HdtConnectivity::nontree_set(VertexId v, int level) {
  const std::uint64_t key = static_cast<std::uint64_t>(v) * static_cast<std::uint64_t>(lmax_ + 1) +
                            static_cast<std::uint64_t>(level);
  auto [it, fresh] = nontree_.try_emplace(key);
  if (fresh) mem_.add(kAdjacencySetBytes);
  return it->second;
}

void HdtConnectivity::refresh_nontree_mark(VertexId v, int level) {
  const std::uint64_t key = static_cast<std::uint64_t>(v) * static_cast<std::uint64_t>(lmax_ + 1) +
                            static_cast<std::uint64_t>(level);
  auto it = nontree_.find(key);
  const bool has = it != nontree_.end() && !it->second.empty();
  if (it != nontree_.end() && it->second.empty()) {
    nontree_.erase(it);
    mem_.sub(kAdjacencySetBytes);
  }
  Node* x = vertex_node(v, level);
  if (x->nontree_mark != has) {
    x->nontree_mark = has;
    pull_up(x);
  }
}

void HdtConnectivity::add_nontree(EdgeKey e, int level) {
  nontree_set(e.a, level).insert(e.b);
  nontree_set(e.b, level).insert(e.a);
  mem_.add(2 * kAdjacencyEntryBytes);
  refresh_nontree_mark(e.a, level);
  refresh_nontree_mark(e.b, level);
}

void HdtConnectivity::remove_nontree(EdgeKey e, int level) {
  nontree_set(e.a, level).erase(e.b);
  nontree_set(e.b, level).erase(e.a);
  mem_.sub(2 * kAdjacencyEntryBytes);
  refresh_nontree_mark(e.a, level);
  refresh_nontree_mark(e.b, level);
}

void HdtConnectivity::set_tree_level(EdgeKey e, EdgeInfo& info, int level) {
  Node* old = info.arcs.front().first;
  old->tree_mark = false;
  pull_up(old);
  auto arcs = link(e.a, e.b, level);
  arcs.first->tree_mark = true;
  pull_up(arcs.first);
  info.arcs.insert(info.arcs.begin(), arcs);
  info.level = level;
  mem_.add(kArcSlotBytes);
  ++stats_.pushdowns;
}

template <typename Pred, typename Fn>
void HdtConnectivity::collect(Node* root, Pred pred, Fn fn) {
  std::vector<Node*> stack{root};
  while (!stack.empty()) {
    Node* x = stack.back();
    stack.pop_back();
    if (x == nullptr || !pred(x)) continue;
    fn(x);
    stack.push_back(x->left);
    stack.push_back(x->right);
  }
}

void HdtConnectivity::insert(VertexId u, VertexId v) {
  if (u < 0 || u >= n_ || v < 0 || v >= n_) throw QueryError("vertex id out of range");
  if (u == v) throw QueryError("self-loop edges are not allowed");
  const EdgeKey e(u, v);
  if (edges_.count(e) != 0) throw QueryError("edge already present");
  ++stats_.inserts;
  EdgeInfo info;
  info.level = lmax_;
  mem_.add(kEdgeRecordBytes);
  if (root_of(vertex_node(u, lmax_)) != root_of(vertex_node(v, lmax_))) {
    info.tree = true;
    auto arcs = link(e.a, e.b, lmax_);
    arcs.first->tree_mark = true;
    pull_up(arcs.first);
    info.arcs.push_back(arcs);
    mem_.add(kArcSlotBytes);
    edges_.emplace(e, std::move(info));
  } else {
    edges_.emplace(e, std::move(info));
    add_nontree(e, lmax_);
  }
}

void HdtConnectivity::erase(VertexId u, VertexId v) {
  if (u < 0 || u >= n_ || v < 0 || v >= n_) throw QueryError("vertex id out of range");
  const EdgeKey e(u, v);
  auto it = edges_.find(e);
  if (it == edges_.end()) throw QueryError("edge not present");
  ++stats_.deletes;
  const int level = it->second.level;
  mem_.sub(kEdgeRecordBytes);
  if (!it->second.tree) {
    ++stats_.nontree_deletes;
    edges_.erase(it);
    remove_nontree(e, level);
    return;
  }
  ++stats_.searches;
  for (const auto& arcs : it->second.arcs) cut(arcs);
  mem_.sub(kArcSlotBytes * static_cast<std::int64_t>(it->second.arcs.size()));
  edges_.erase(it);
  for (int i = level; i <= lmax_; ++i) {
    if (replace(e.a, e.b, i)) break;
  }
}

bool HdtConnectivity::replace(VertexId u, VertexId v, int level) {
  Node* ru = root_of(vertex_node(u, level));
  Node* rv = root_of(vertex_node(v, level));
  Node* small = ru->vertices <= rv->vertices ? ru : rv;
  const VertexId anchor = small == ru ? u : v;

  if (level >= 2) {
    std::vector<EdgeKey> demote;
    collect(small, [](const Node* x) { return x->any_tree; },
            [&](const Node* x) {
              if (x->tree_mark) demote.emplace_back(x->a, x->b);
            });
    for (const EdgeKey& t : demote) set_tree_level(t, edges_.at(t), level - 1);
  }

  std::vector<VertexId> holders;
  collect(root_of(vertex_node(anchor, level)), [](const Node* x) { return x->any_nontree; },
          [&](const Node* x) {
            if (x->nontree_mark) holders.push_back(x->a);
          });
  for (VertexId x : holders) {
    const std::uint64_t key = static_cast<std::uint64_t>(x) * static_cast<std::uint64_t>(lmax_ + 1) +
                              static_cast<std::uint64_t>(level);
    auto found = nontree_.find(key);
    if (found == nontree_.end()) continue;
    const std::vector<VertexId> ys(found->second.begin(), found->second.end());
    for (VertexId y : ys) {
      ++stats_.fetches;
      const EdgeKey f(x, y);
      EdgeInfo& info = edges_.at(f);
      remove_nontree(f, level);
      if (root_of(vertex_node(y, level)) != root_of(vertex_node(anchor, level))) {
        info.tree = true;
        for (int i = level; i <= lmax_; ++i) {
          auto arcs = link(f.a, f.b, i);
          if (i == level) {
            arcs.first->tree_mark = true;
            pull_up(arcs.first);
          }
          info.arcs.push_back(arcs);
          mem_.add(kArcSlotBytes);
        }
        return true;
      }
      info.level = level - 1;
      add_nontree(f, level - 1);
      ++stats_.pushdowns;
    }
  }
  return false;
}

bool HdtConnectivity::connected(VertexId u, VertexId v) {
  if (u < 0 || u >= n_ || v < 0 || v >= n_) throw QueryError("vertex id out of range");
  if (u == v) return true;
  return root_of(vertex_node(u, lmax_)) == root_of(vertex_node(v, lmax_));
}

int HdtConnectivity::edge_level(EdgeKey e) const {
  auto it = edges_.find(e);
  if (it == edges_.end()) throw QueryError("edge not present");
  return it->second.level;
}

bool HdtConnectivity::is_tree(EdgeKey e) const {
  auto it = edges_.find(e);
  if (it == edges_.end()) throw QueryError("edge not present");
  return it->second.tree;
}

std::vector<std::string> HdtConnectivity::audit() const {
  std::vector<std::string> out;
  auto root = [](const Node* x) {
    while (x->parent != nullptr) x = x->parent;
    return x;
  };
  for (int level = 1; level <= lmax_; ++level) {
    for (VertexId v = 0; v < n_; ++v) {
      const Node* r = root(vertex_node(v, level));
      if (r->vertices > (1 << level)) {
        out.push_back("size: level " + std::to_string(level) + " component of " + std::to_string(v) +
                      " has " + std::to_string(r->vertices) + " vertices");
      }
      if (r->count != 3 * r->vertices - 2) {
        out.push_back("tour: level " + std::to_string(level) + " tour length mismatch at " + std::to_string(v));
      }
    }
  }
  for (const auto& [e, info] : edges_) {
    if (info.tree) {
      if (info.arcs.size() != static_cast<std::size_t>(lmax_ - info.level + 1)) {
        out.push_back("nesting: tree edge missing from a higher forest");
        continue;
      }
      for (int i = info.level; i <= lmax_; ++i) {
        const auto& arcs = info.arcs[static_cast<std::size_t>(i - info.level)];
        if (root(arcs.first) != root(vertex_node(e.a, i)) || root(arcs.second) != root(vertex_node(e.b, i))) {
          out.push_back("nesting: tree edge arcs detached at level " + std::to_string(i));
        }
      }
    } else if (root(vertex_node(e.a, info.level)) != root(vertex_node(e.b, info.level))) {
      out.push_back("nesting: non-tree edge endpoints split at its level");
    }
  }
  return out;
}

}  // namespace dyncon
