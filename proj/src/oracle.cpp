#include "dyncon/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace dyncon {

// ---------------------------------------------------------------------------
// EdgeSetOracle

EdgeSetOracle::EdgeSetOracle(int n) : n_(n), parent_(static_cast<std::size_t>(n)) {
  if (n < 1) throw QueryError("oracle needs at least one vertex");
  std::iota(parent_.begin(), parent_.end(), 0);
}

void EdgeSetOracle::insert(VertexId u, VertexId v) {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) throw QueryError("vertex id out of range");
  if (u == v) throw QueryError("self-loop edges are not allowed");
  if (!live_.insert(EdgeKey(u, v)).second) throw QueryError("edge already present");
  ++stats_.inserts;
  if (!dirty_) {
    const VertexId a = find(u);
    const VertexId b = find(v);
    if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
}

void EdgeSetOracle::erase(VertexId u, VertexId v) {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) throw QueryError("vertex id out of range");
  if (live_.erase(EdgeKey(u, v)) == 0) throw QueryError("edge not present");
  ++stats_.deletes;
  dirty_ = true;
}

VertexId EdgeSetOracle::find(VertexId x) {
  while (parent_[static_cast<std::size_t>(x)] != x) {
    auto& p = parent_[static_cast<std::size_t>(x)];
    p = parent_[static_cast<std::size_t>(p)];
    x = p;
  }
  return x;
}

void EdgeSetOracle::rebuild() {
  std::iota(parent_.begin(), parent_.end(), 0);
  for (const EdgeKey& e : live_) {
    const VertexId a = find(e.a);
    const VertexId b = find(e.b);
    if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  dirty_ = false;
}

bool EdgeSetOracle::connected(VertexId u, VertexId v) {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) throw QueryError("vertex id out of range");
  if (dirty_) rebuild();
  return find(u) == find(v);
}

std::vector<EdgeKey> EdgeSetOracle::edge_list() const {
  std::vector<EdgeKey> out(live_.begin(), live_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VertexId> EdgeSetOracle::components() {
  if (dirty_) rebuild();
  std::vector<VertexId> out(static_cast<std::size_t>(n_));
  for (VertexId v = 0; v < n_; ++v) out[static_cast<std::size_t>(v)] = find(v);
  return out;
}

// ---------------------------------------------------------------------------
// Cluster graphs

std::vector<std::vector<int>> ExplicitClusterGraph::adjacency(bool blocked_only) const {
  std::vector<std::vector<int>> adj(nodes.size());
  for (const Edge& e : edges) {
    if (e.x == e.y || (blocked_only && !e.blocked)) continue;
    adj[static_cast<std::size_t>(e.x)].push_back(e.y);
    adj[static_cast<std::size_t>(e.y)].push_back(e.x);
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

bool ExplicitClusterGraph::connected(bool tree_only) const {
  if (nodes.size() <= 1) return true;
  std::vector<int> uf(nodes.size());
  std::iota(uf.begin(), uf.end(), 0);
  auto find = [&](int x) {
    while (uf[static_cast<std::size_t>(x)] != x) x = uf[static_cast<std::size_t>(x)] = uf[static_cast<std::size_t>(uf[static_cast<std::size_t>(x)])];
    return x;
  };
  std::size_t parts = nodes.size();
  for (const Edge& e : edges) {
    if (tree_only && !e.is_tree) continue;
    const int a = find(e.x);
    const int b = find(e.y);
    if (a != b) {
      uf[static_cast<std::size_t>(a)] = b;
      --parts;
    }
  }
  return parts == 1;
}

int ExplicitClusterGraph::diameter() const {
  const auto adj = adjacency(false);
  const std::size_t k = nodes.size();
  if (k <= 1) return 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (adj[i].size() == k - 1) return k == 2 ? 1 : (connected(false) ? std::min<int>(2, static_cast<int>(k) - 1) : -1);
  }
  int best = 0;
  std::vector<int> dist(k);
  for (std::size_t s = 0; s < k; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<int> q;
    dist[s] = 0;
    q.push(static_cast<int>(s));
    while (!q.empty()) {
      const int x = q.front();
      q.pop();
      for (int y : adj[static_cast<std::size_t>(x)]) {
        if (dist[static_cast<std::size_t>(y)] < 0) {
          dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
          q.push(y);
        }
      }
    }
    for (int d : dist) {
      if (d < 0) return -1;
      best = std::max(best, d);
    }
  }
  return best;
}

std::vector<int> ExplicitClusterGraph::blocked_centers() const {
  const auto adj = adjacency(true);
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (adj[i].size() + 1 == nodes.size()) out.push_back(static_cast<int>(i));
  }
  return out;
}

bool ExplicitClusterGraph::has_disjoint_blocked_pair() const {
  std::vector<std::pair<int, int>> pairs;
  for (const Edge& e : edges) {
    if (e.blocked && e.x != e.y) pairs.emplace_back(std::min(e.x, e.y), std::max(e.x, e.y));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  if (pairs.size() <= 1) return false;
  // Pairwise intersecting edges form a star or a triangle.
  for (int hub : {pairs[0].first, pairs[0].second}) {
    bool star = true;
    for (const auto& p : pairs) {
      if (p.first != hub && p.second != hub) {
        star = false;
        break;
      }
    }
    if (star) return false;
  }
  if (pairs.size() == 3) {
    std::vector<int> vs;
    for (const auto& p : pairs) {
      vs.push_back(p.first);
      vs.push_back(p.second);
    }
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    if (vs.size() == 3) return false;
  }
  return true;
}

namespace {

// Ancestor chains for every vertex, so cluster_of is a short scan.
struct Chains {
  std::vector<std::vector<Cluster*>> up;

  explicit Chains(const ClusterForest& f) : up(static_cast<std::size_t>(f.n())) {
    for (VertexId v = 0; v < f.n(); ++v) {
      auto& ch = up[static_cast<std::size_t>(v)];
      for (Cluster* x = f.leaf(v); x != nullptr; x = ClusterForest::parent_of(x)) {
        ch.push_back(x);
        if (ch.size() > 200) break;
      }
    }
  }
  [[nodiscard]] Cluster* at(VertexId v, int l) const {
    const auto& ch = up[static_cast<std::size_t>(v)];
    Cluster* best = ch.front();
    for (Cluster* x : ch) {
      if (x->level > l) break;
      best = x;
    }
    return best;
  }
};

void add_graph_edges(const ClusterForest& f, const Chains& ch,
                     std::unordered_map<const Cluster*, ExplicitClusterGraph>& graphs) {
  for (const auto& [key, rec] : f.edges()) {
    Cluster* a = ch.at(key.a, rec.level - 1);
    Cluster* b = ch.at(key.b, rec.level - 1);
    Cluster* owner;
    if (a == b) {
      owner = ch.at(key.a, rec.level);
      if (owner->level != rec.level) continue;
      a = b = nullptr;
      auto it = graphs.find(owner);
      if (it == graphs.end()) continue;
      // A self-loop sits on the child holding both endpoints.
      Cluster* child = ch.at(key.a, rec.level - 1);
      const int x = it->second.index.at(child);
      it->second.edges.push_back({key, x, x, false, rec.is_tree});
      continue;
    }
    owner = ClusterForest::parent_of(a);
    if (owner == nullptr || ClusterForest::parent_of(b) != owner || owner->level != rec.level) continue;
    auto it = graphs.find(owner);
    if (it == graphs.end()) continue;
    ExplicitClusterGraph& g = it->second;
    ExplicitClusterGraph::Edge e;
    e.key = key;
    e.x = g.index.at(a);
    e.y = g.index.at(b);
    e.blocked = a->size + b->size > f.cap(rec.level - 1);
    e.is_tree = rec.is_tree;
    g.edges.push_back(e);
  }
}

ExplicitClusterGraph make_graph(const Cluster* c) {
  ExplicitClusterGraph g;
  g.owner = c;
  g.level = c->level;
  g.nodes = c->children->children();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) g.index[g.nodes[i]] = static_cast<int>(i);
  return g;
}

}  // namespace

std::unordered_map<const Cluster*, ExplicitClusterGraph> build_cluster_graphs(const ClusterForest& f) {
  std::unordered_map<const Cluster*, ExplicitClusterGraph> graphs;
  for (Cluster* c : f.internal_clusters()) graphs.emplace(c, make_graph(c));
  Chains ch(f);
  add_graph_edges(f, ch, graphs);
  return graphs;
}

ExplicitClusterGraph build_cluster_graph(const ClusterForest& f, const Cluster* c) {
  std::unordered_map<const Cluster*, ExplicitClusterGraph> graphs;
  graphs.emplace(c, make_graph(c));
  Chains ch(f);
  add_graph_edges(f, ch, graphs);
  return std::move(graphs.at(c));
}

// ---------------------------------------------------------------------------
// Audit

std::size_t AuditReport::count(const std::string& check) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.check == check; }));
}

std::string AuditReport::summary(std::size_t limit) const {
  if (violations.empty()) return "clean";
  std::ostringstream os;
  os << violations.size() << " violation(s):";
  for (std::size_t i = 0; i < violations.size() && i < limit; ++i) {
    os << " [" << violations[i].check << " #" << violations[i].cluster << ": " << violations[i].detail << "]";
  }
  return os.str();
}

AuditReport audit(const ClusterForest& f, const AuditOptions& opt) {
  AuditReport rep;
  auto flag = [&](const char* check, const std::string& detail, const Cluster* c) {
    rep.violations.push_back({check, detail, c == nullptr ? 0 : c->seq});
  };
  const bool blocked = f.mode() == Mode::Blocked;
  const int top = blocked ? f.lmax() + 1 : f.lmax();

  // Leaves and the edge index.
  std::size_t occurrences = 0;
  for (VertexId v = 0; v < f.n(); ++v) {
    const VertexLeaf* x = f.leaf(v);
    if (x->size != 1 || x->level != 0) flag("size-sum", "leaf size or level wrong", x);
    std::uint64_t bits = 0;
    int prev = -1;
    for (const LevelSet& s : x->sets) {
      if (s.edges.empty()) flag("bitmap", "empty level set kept", x);
      if (s.level <= prev) flag("bitmap", "level sets out of order", x);
      prev = s.level;
      bits |= 1ULL << s.level;
      if (!std::is_sorted(s.edges.begin(), s.edges.end())) flag("edge-index", "level set unsorted", x);
      for (const EdgeKey& e : s.edges) {
        ++occurrences;
        const EdgeRecord* rec = f.find_edge(e);
        if (rec == nullptr || rec->level != s.level || (e.a != v && e.b != v)) {
          flag("edge-index", "leaf edge disagrees with index", x);
        }
      }
    }
    if (bits != x->bitmap) flag("bitmap", "leaf bitmap differs from occupied levels", x);
    if (ClusterForest::parent_of(x) == nullptr && blocked) flag("structure", "leaf detached from global root", x);
  }
  if (occurrences != 2 * f.edges().size()) flag("edge-index", "edge occurrence count mismatch", nullptr);
  for (const auto& [e, rec] : f.edges()) {
    if (rec.level < 1 || rec.level > f.lmax()) flag("edge-index", "edge level out of range", nullptr);
    if (f.root_of(e.a) != f.root_of(e.b)) flag("edge-index", "edge spans two components", nullptr);
  }

  // Internal clusters.
  const double depth_cap = 4.0 * std::max(1.0, std::log2(static_cast<double>(f.n())));
  for (const Cluster* c : f.internal_clusters()) {
    std::string why;
    if (!c->children->audit(&why)) flag("container", why, c);
    if (c->size != c->children->total_size()) flag("size-sum", "size differs from child total", c);
    if (c->bitmap != c->children->bitmap()) flag("bitmap", "bitmap differs from child OR", c);
    if (c->size > f.cap(c->level)) flag("invariant1", "size exceeds 2^level", c);
    if (c->level < 1 || c->level > top) flag("structure", "level out of range", c);
    if (c != f.global_root() && c->children->count() < 2) flag("compression", "explicit cluster with one child", c);
    if (c->children->max_depth() > depth_cap) flag("depth", "local tree too deep", c);
    c->children->for_each_child([&](Cluster* x) {
      if (x->level >= c->level) flag("structure", "child level not below parent", c);
      if (ClusterForest::parent_of(x) != c) flag("structure", "child parent pointer wrong", c);
    });
    const Cluster* p = ClusterForest::parent_of(c);
    if (blocked && c != f.global_root() && p == nullptr) flag("structure", "cluster detached from global root", c);
  }

  // Cluster graphs.
  auto graphs = build_cluster_graphs(f);
  Chains ch(f);
  for (const auto& [e, rec] : f.edges()) {
    const Cluster* a = ch.at(e.a, rec.level - 1);
    const Cluster* b = ch.at(e.b, rec.level - 1);
    if (a == b) continue;
    const Cluster* p = ClusterForest::parent_of(a);
    if (p == nullptr || p != ClusterForest::parent_of(b) || p->level != rec.level) {
      flag("edge-index", "edge endpoints not siblings at its level", p);
    }
  }
  const bool small = f.n() <= opt.explicit_limit;
  for (const auto& [c, g] : graphs) {
    if (c == f.global_root()) continue;
    if (!g.connected(false)) flag("connectivity", "cluster graph disconnected", c);
    if (opt.tree_connectivity && !g.connected(true)) flag("tree-connectivity", "tree edges do not span", c);
    if (!blocked) continue;
    std::vector<char> touched(g.nodes.size(), 0);
    for (const auto& e : g.edges) {
      if (e.blocked) touched[static_cast<std::size_t>(e.x)] = touched[static_cast<std::size_t>(e.y)] = 1;
    }
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      if (touched[i] == 0) flag("invariant2", "child without a blocked edge", c);
    }
    if (g.has_disjoint_blocked_pair()) flag("matching", "two disjoint blocked edges", c);
    for (const auto& e : g.edges) {
      if (e.blocked || e.x == e.y) continue;
      const Cluster* x = g.nodes[static_cast<std::size_t>(e.x)];
      const Cluster* y = g.nodes[static_cast<std::size_t>(e.y)];
      if (x->level == g.level - 1 && y->level == g.level - 1) {
        flag("unblocked-isolated", "unblocked edge between non-isolated clusters", c);
      }
    }
    if (!small || g.nodes.size() < 2) continue;
    const int d = g.diameter();
    if (d < 0 || d > 2) flag("diameter", "cluster graph diameter above 2", c);
    const auto centers = g.blocked_centers();
    if (centers.empty()) {
      flag("center", "no node adjacent to all others by blocked edges", c);
    } else if (g.nodes.size() >= 4) {
      std::int64_t biggest = 0;
      for (const Cluster* x : g.nodes) biggest = std::max(biggest, x->size);
      bool heavy = false;
      for (int i : centers) heavy = heavy || g.nodes[static_cast<std::size_t>(i)]->size == biggest;
      if (!heavy) flag("heavy-center", "center is not a largest child", c);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Fault injection

bool inject_size_fault(ClusterForest& f) {
  for (Cluster* c : f.internal_clusters()) {
    if (c == f.global_root()) continue;
    c->size = f.cap(c->level) + 1;
    return true;
  }
  return false;
}

bool inject_bitmap_fault(ClusterForest& f) {
  for (VertexId v = 0; v < f.n(); ++v) {
    VertexLeaf* x = f.leaf(v);
    if (x->bitmap != 0) {
      x->bitmap ^= 1ULL << (63 - 1);
      return true;
    }
  }
  return false;
}

bool inject_blocked_fault(ClusterForest& f) {
  // Silently drop the only blocked edge of some child.
  auto graphs = build_cluster_graphs(f);
  for (Cluster* c : f.internal_clusters()) {
    if (c == f.global_root()) continue;
    const ExplicitClusterGraph& g = graphs.at(c);
    std::vector<int> hits(g.nodes.size(), 0);
    for (const auto& e : g.edges) {
      if (e.blocked) {
        ++hits[static_cast<std::size_t>(e.x)];
        ++hits[static_cast<std::size_t>(e.y)];
      }
    }
    for (const auto& e : g.edges) {
      if (!e.blocked) continue;
      if (hits[static_cast<std::size_t>(e.x)] == 1 || hits[static_cast<std::size_t>(e.y)] == 1) {
        const EdgeKey key = e.key;
        const EdgeRecord rec = *f.find_edge(key);
        for (VertexId v : {key.a, key.b}) leaf_remove_edge(*f.leaf(v), key, rec.level);
        f.mutable_edges().erase(key);
        return true;
      }
    }
  }
  return false;
}

bool inject_compression_fault(ClusterForest& f) {
  for (Cluster* c : f.internal_clusters()) {
    Cluster* victim = nullptr;
    c->children->for_each_child([&](Cluster* x) {
      if (victim == nullptr && x->level + 1 < c->level) victim = x;
    });
    if (victim == nullptr) continue;
    Cluster* wrap = f.new_cluster(victim->level + 1);
    c->children->erase(victim);
    wrap->children->insert(victim);
    f.recompute(wrap);
    c->children->insert(wrap);
    return true;
  }
  return false;
}

bool inject_matching_fault(ClusterForest& f) {
  // Two raw edges between disjoint child pairs, with the children inflated so
  // both read as blocked.
  for (Cluster* c : f.internal_clusters()) {
    if (c == f.global_root() || c->children->count() < 4) continue;
    std::vector<Cluster*> kids = c->children->children();
    std::vector<VertexId> reps;
    for (std::size_t i = 0; i < 4; ++i) {
      const Cluster* x = kids[i];
      while (!x->is_leaf()) x = x->children->children().front();
      reps.push_back(static_cast<const VertexLeaf*>(x)->id);
    }
    const int level = c->level;
    for (std::size_t i = 0; i < 4; i += 2) {
      const EdgeKey e(reps[i], reps[i + 1]);
      if (f.has_edge(e)) f.detach_edge(e);
      f.attach_edge(e, level, false);
    }
    for (std::size_t i = 0; i < 4; ++i) kids[i]->size = f.cap(level - 1);
    return true;
  }
  return false;
}

}  // namespace dyncon
