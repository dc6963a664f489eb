#include "dyncon/blocked.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace dyncon {

namespace {

BatchLocalTree* blt(const Cluster* c) { return static_cast<BatchLocalTree*>(c->children); }

}  // namespace

BlockedConnectivity::BlockedConnectivity(int n, bool batch) : forest_(n, Mode::Blocked), batch_(batch) {}

Stats BlockedConnectivity::stats() const {
  Stats s = forest_.stats();
  s.bytes = forest_.memory().current();
  s.peak_bytes = forest_.memory().peak();
  return s;
}

VertexId BlockedConnectivity::any_vertex(const Cluster* c) {
  const LTNode* x = c;
  for (;;) {
    if (x->is_cluster) {
      const auto* cl = static_cast<const Cluster*>(x);
      if (cl->is_leaf()) return static_cast<const VertexLeaf*>(cl)->id;
      x = cl->children->roots().front();
    } else {
      x = x->left;
    }
  }
}

void BlockedConnectivity::set_marked(Cluster* c, bool marked) {
  Cluster* p = ClusterForest::parent_of(c);
  if (p == nullptr) {
    c->unmarked = !marked;
    return;
  }
  if (marked) {
    blt(p)->mark(c);
  } else {
    blt(p)->unmark(c);
  }
}

void BlockedConnectivity::push_until_blocked(EdgeKey e) {
  for (;;) {
    const EdgeRecord* rec = forest_.find_edge(e);
    if (rec == nullptr || rec->level < 2) return;
    const int l = rec->level;
    const Cluster* a = forest_.cluster_of(e.a, l - 1);
    const Cluster* b = forest_.cluster_of(e.b, l - 1);
    if (a != b && a->size + b->size > forest_.cap(l - 1)) return;
    forest_.push_down(e);
  }
}

void BlockedConnectivity::push_edge(EdgeKey e) {
  if (deferred_ == nullptr) {
    push_until_blocked(e);
    return;
  }
  forest_.push_down(e);
  (*deferred_)[static_cast<std::size_t>(forest_.record(e).level)].push_back(e);
}

bool BlockedConnectivity::guarded_push(EdgeKey e, int level) {
  const EdgeRecord* rec = forest_.find_edge(e);
  if (rec == nullptr || rec->level != level || level < 2) return false;
  const Cluster* a = forest_.cluster_of(e.a, level - 1);
  const Cluster* b = forest_.cluster_of(e.b, level - 1);
  if (a != b && a->size + b->size > forest_.cap(level - 1)) return false;
  push_edge(e);
  return true;
}

BlockedConnectivity::Outbound BlockedConnectivity::fetch_outbound(VertexId rep, int level, EdgeKey* e) {
  for (;;) {
    const Cluster* x = forest_.cluster_of(rep, level - 1);
    if (!has_bit(x->bitmap, level)) return Outbound::None;
    const EdgeKey f = forest_.fetch_edge(x, level);
    const Cluster* a = forest_.cluster_of(f.a, level - 1);
    const Cluster* b = forest_.cluster_of(f.b, level - 1);
    if (a == b) {
      push_edge(f);
      continue;
    }
    *e = f;
    return a->size + b->size > forest_.cap(level - 1) ? Outbound::Blocked : Outbound::Unblocked;
  }
}

BlockedConnectivity::Outbound BlockedConnectivity::settle(VertexId rep, int level) {
  for (;;) {
    EdgeKey e;
    const Outbound o = fetch_outbound(rep, level, &e);
    if (o != Outbound::Unblocked) return o;
    push_edge(e);
  }
}

bool BlockedConnectivity::is_center(const Cluster* p) const {
  const Cluster* g = ClusterForest::parent_of(p);
  if (g == nullptr || g == forest_.global_root() || g->level != p->level + 1) return false;
  const Cluster* big = blt(g)->largest();
  return big == p || big->size <= p->size;
}

void BlockedConnectivity::validate_new(const std::vector<EdgeKey>& edges) const {
  std::unordered_set<EdgeKey, EdgeKeyHash> seen;
  for (const EdgeKey& e : edges) {
    forest_.check_vertex(e.a);
    forest_.check_vertex(e.b);
    if (e.a == e.b) throw QueryError("self-loop edges are not allowed");
    if (forest_.has_edge(e)) throw QueryError("edge already present");
    if (!seen.insert(e).second) throw QueryError("edge repeated in batch");
  }
}

void BlockedConnectivity::validate_live(const std::vector<EdgeKey>& edges) const {
  std::unordered_set<EdgeKey, EdgeKeyHash> seen;
  for (const EdgeKey& e : edges) {
    forest_.check_vertex(e.a);
    forest_.check_vertex(e.b);
    if (!forest_.has_edge(e)) throw QueryError("edge not present");
    if (!seen.insert(e).second) throw QueryError("edge repeated in batch");
  }
}

void BlockedConnectivity::insert(VertexId u, VertexId v) {
  forest_.check_vertex(u);
  forest_.check_vertex(v);
  if (u == v) throw QueryError("self-loop edges are not allowed");
  const EdgeKey e(u, v);
  if (forest_.has_edge(e)) throw QueryError("edge already present");
  ++forest_.stats().inserts;
  forest_.attach_edge(e, forest_.lmax() + 1, false);
  push_until_blocked(e);
  forest_.reclaim();
}

void BlockedConnectivity::erase(VertexId u, VertexId v) {
  forest_.check_vertex(u);
  forest_.check_vertex(v);
  const EdgeKey e(u, v);
  if (!forest_.has_edge(e)) throw QueryError("edge not present");
  const EdgeRecord rec = forest_.detach_edge(e);
  ++forest_.stats().deletes;
  const Cluster* a = forest_.cluster_of(u, rec.level - 1);
  const Cluster* b = forest_.cluster_of(v, rec.level - 1);
  if (a == b || a->size + b->size <= forest_.cap(rec.level - 1)) {
    ++forest_.stats().nontree_deletes;
    forest_.reclaim();
    return;
  }
  ++forest_.stats().searches;
  const VertexId reps[2] = {u, v};
  for (int l = rec.level;; ++l) {
    // 0 pending, 1 blocked edge found, 2 no outbound edge.
    int state[2] = {0, 0};
    bool merged = false;
    while (!merged && (state[0] == 0 || state[1] == 0)) {
      for (int k = 0; k < 2 && !merged; ++k) {
        if (state[k] != 0) continue;
        EdgeKey f;
        const Outbound o = fetch_outbound(reps[k], l, &f);
        if (o == Outbound::Unblocked) {
          push_edge(f);
        } else {
          state[k] = o == Outbound::Blocked ? 1 : 2;
        }
        merged = forest_.cluster_of(u, l - 1) == forest_.cluster_of(v, l - 1);
      }
    }
    if (merged) {
      settle(u, l);
      break;
    }
    if (state[0] == 1 && state[1] == 1) break;
    const VertexId wrep = state[0] == 2 ? u : v;
    const VertexId keep = wrep == u ? v : u;
    Cluster* w = forest_.cluster_of(wrep, l - 1);
    Cluster* p = ClusterForest::parent_of(w);
    if (p == nullptr || p->level != l) throw StructuralError("delete: fragment lost its parent");
    const bool center = is_center(p);
    forest_.remove_child(p, w);
    Cluster* q = forest_.attach_beside(p, w, l + 1);
    forest_.splice_if_trivial(p);
    if (q == nullptr || q == forest_.global_root()) break;
    ++probe_.restorations;
    if (q->children->count() <= kBruteForceLimit) {
      brute_restore(wrep, l + 1);
    } else if (center) {
      center_restore(keep, wrep, l + 1);
    }
  }
  forest_.reclaim();
}

void BlockedConnectivity::brute_restore(VertexId anchor, int level) {
  ++probe_.brute_runs;
  const Cluster* g = forest_.cluster_of(anchor, level);
  if (g->level != level) return;
  std::vector<VertexId> reps;
  g->children->for_each_child([&](Cluster* c) { reps.push_back(any_vertex(c)); });
  for (VertexId r : reps) settle(r, level);
}

void BlockedConnectivity::center_restore(VertexId rep1, VertexId rep2, int level) {
  const int cl = level - 1;
  const std::int64_t thr = forest_.cap(cl);
  auto graph = [&]() -> Cluster* {
    Cluster* g = forest_.cluster_of(rep1, level);
    return g->level == level ? g : nullptr;
  };
  if (graph() == nullptr) return;
  const VertexId centers[2] = {rep1, rep2};
  if (forest_.cluster_of(rep1, cl) == forest_.cluster_of(rep2, cl)) return;
  ++probe_.center_runs;

  std::vector<VertexId> touched{rep1, rep2};
  for (int j = 0; j < 2; ++j) {
    Cluster* c = forest_.cluster_of(centers[j], cl);
    c->tag = static_cast<std::uint8_t>(4 + j);
    set_marked(c, true);
  }
  auto reset = [&]() {
    for (VertexId r : touched) {
      Cluster* c = forest_.cluster_of(r, cl);
      c->tag = 0;
      c->rep = -1;
      set_marked(c, false);
    }
  };

  // Satellites attached to each center fragment, ordered by size.
  std::set<std::pair<std::int64_t, VertexId>> s[2];
  std::unordered_map<VertexId, std::int64_t> entry;
  std::int64_t n[2] = {0, 0};
  struct Attach {
    EdgeKey e;
    VertexId sat;
    int j;
  };
  std::vector<Attach> a_edges;
  std::uint64_t uncharged = 0;
  std::uint64_t sat_blocked = 0;
  int stop = -1;

  while (stop < 0) {
    Cluster* g = graph();
    if (g == nullptr) break;
    Cluster* x = blt(g)->smallest_unmarked();
    if (x == nullptr) break;
    const VertexId xr = any_vertex(x);
    touched.push_back(xr);
    EdgeKey e;
    const Outbound o = fetch_outbound(xr, level, &e);
    x = forest_.cluster_of(xr, cl);
    if (o == Outbound::None) {
      set_marked(x, true);
      ++uncharged;
      continue;
    }
    const VertexId ex = forest_.cluster_of(e.a, cl) == x ? e.a : e.b;
    const VertexId ey = e.other(ex);
    Cluster* y = forest_.cluster_of(ey, cl);
    if (y->tag >= 4) {
      const int j = y->tag - 4;
      x->tag = static_cast<std::uint8_t>(2 + j);
      x->rep = xr;
      s[j].insert({x->size, xr});
      entry[xr] = x->size;
      n[j] += x->size;
      a_edges.push_back({e, xr, j});
      set_marked(x, true);
      ++uncharged;
    } else if (o == Outbound::Unblocked) {
      const int yt = y->tag;
      const VertexId yr = y->rep;
      const std::int64_t xs = x->size;
      push_edge(e);
      if ((yt == 2 || yt == 3) && yr >= 0) {
        const int j = yt - 2;
        s[j].erase({entry[yr], yr});
        entry[yr] = forest_.cluster_of(yr, cl)->size;
        s[j].insert({entry[yr], yr});
        n[j] += xs;
      }
    } else {
      touched.push_back(ey);
      set_marked(x, true);
      set_marked(y, true);
      ++uncharged;
      ++sat_blocked;
    }
    for (int j = 0; j < 2 && stop < 0; ++j) {
      if (s[j].size() < 2) continue;
      auto it = s[j].rbegin();
      const std::int64_t last = it->first;
      const std::int64_t second = std::next(it)->first;
      if (n[j] - last > thr && n[j] - second > thr) stop = j;
    }
  }
  probe_.max_uncharged = std::max(probe_.max_uncharged, uncharged);
  probe_.max_satellite_blocked = std::max(probe_.max_satellite_blocked, sat_blocked);

  auto largest_of = [&](int j, int rank) -> const Cluster* {
    if (static_cast<int>(s[j].size()) <= rank) return nullptr;
    auto it = s[j].rbegin();
    std::advance(it, rank);
    return forest_.cluster_of(it->second, cl);
  };

  if (stop < 0) {
    for (const Attach& at : a_edges) {
      const Cluster* sat = forest_.cluster_of(at.sat, cl);
      if (n[at.j] > thr && sat == largest_of(at.j, 0)) continue;
      guarded_push(at.e, level);
    }
    for (VertexId r : centers) settle(r, level);
    reset();
    return;
  }

  ++probe_.stopped_runs;
  const VertexId urep = centers[1 - stop];
  const Cluster* uc = forest_.cluster_of(urep, cl);
  const Cluster* pc = forest_.cluster_of(centers[stop], cl);
  std::vector<EdgeKey> between;
  std::vector<EdgeKey> outward;
  std::vector<EdgeKey> loops;
  if (uc != pc) {
    for (const EdgeKey& f : forest_.fetch_edges(std::numeric_limits<std::size_t>::max(), uc, level)) {
      const Cluster* fa = forest_.cluster_of(f.a, cl);
      const Cluster* fb = forest_.cluster_of(f.b, cl);
      if (fa == fb) {
        loops.push_back(f);
      } else if ((fa == uc ? fb : fa) == pc) {
        between.push_back(f);
      } else {
        outward.push_back(f);
      }
    }
  }
  for (const EdgeKey& f : loops) guarded_push(f, level);
  if (between.size() > a_edges.size() && between.size() > outward.size()) {
    for (const EdgeKey& f : between) guarded_push(f, level);
    reset();
    return;
  }
  for (const EdgeKey& f : outward) guarded_push(f, level);
  const Cluster* top1 = largest_of(stop, 0);
  const Cluster* top2 = largest_of(stop, 1);
  for (const Attach& at : a_edges) {
    const Cluster* sat = forest_.cluster_of(at.sat, cl);
    if (at.j == stop && (sat == top1 || sat == top2)) continue;
    guarded_push(at.e, level);
  }
  reset();
  touched.clear();
  for (;;) {
    Cluster* g = graph();
    if (g == nullptr) break;
    Cluster* x = blt(g)->smallest_unmarked();
    if (x == nullptr) break;
    const VertexId xr = any_vertex(x);
    EdgeKey e;
    const Outbound o = fetch_outbound(xr, level, &e);
    if (o == Outbound::Blocked) break;
    if (o == Outbound::Unblocked) {
      push_edge(e);
      continue;
    }
    touched.push_back(xr);
    set_marked(forest_.cluster_of(xr, cl), true);
  }
  reset();
}

void BlockedConnectivity::push_down_group(const std::vector<EdgeKey>& edges, int level) {
  if (edges.empty()) return;
  const int cl = level - 1;
  std::vector<Cluster*> members;
  for (const EdgeKey& e : edges) {
    for (VertexId x : {e.a, e.b}) {
      Cluster* c = forest_.cluster_of(x, cl);
      if (std::find(members.begin(), members.end(), c) == members.end()) members.push_back(c);
    }
  }
  Cluster* p = ClusterForest::parent_of(members.front());
  std::int64_t total = 0;
  for (Cluster* c : members) {
    if (ClusterForest::parent_of(c) != p) throw StructuralError("push_down_group: clusters do not share a parent");
    total += c->size;
  }
  if (p == nullptr || p->level != level) throw StructuralError("push_down_group: parent level mismatch");
  if (total > forest_.cap(cl)) throw StructuralError("push_down_group: size invariant violated");
  for (const EdgeKey& e : edges) {
    forest_.set_edge_level(e, cl);
    ++forest_.stats().pushdowns;
  }
  std::vector<Cluster*> open;
  std::vector<Cluster*> lone;
  for (Cluster* c : members) (c->level == cl ? open : lone).push_back(c);
  if (open.empty()) {
    Cluster* x = forest_.new_cluster(cl);
    blt(p)->batch_delete(lone);
    blt(x)->batch_insert(lone);
    forest_.recompute(x);
    p->children->insert(x);
  } else {
    Cluster* x = *std::max_element(open.begin(), open.end(), [](const Cluster* l, const Cluster* r) {
      return l->children->count() < r->children->count();
    });
    if (!lone.empty()) {
      blt(p)->batch_delete(lone);
      blt(x)->batch_insert(lone);
      forest_.recompute(x);
      p->children->refresh(x);
    }
    for (Cluster* y : open) {
      if (y == x) continue;
      forest_.recompute(p);
      forest_.propagate(p);
      x = forest_.join_at_level(cl, x, y, p);
    }
  }
  if (!p->alive) return;
  forest_.recompute(p);
  forest_.propagate(p);
  forest_.splice_if_trivial(p);
}

std::vector<EdgeKey> BlockedConnectivity::batch_push_down(const std::vector<EdgeKey>& edges, int level) {
  std::vector<EdgeKey> moved;
  if (level < 2) return moved;
  std::vector<EdgeKey> pending;
  for (const EdgeKey& e : edges) {
    const EdgeRecord* rec = forest_.find_edge(e);
    if (rec != nullptr && rec->level == level) pending.push_back(e);
  }
  std::sort(pending.begin(), pending.end());
  pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
  const int cl = level - 1;
  while (!pending.empty()) {
    ++probe_.star_rounds;
    std::vector<EdgeKey> open;
    for (const EdgeKey& e : pending) {
      const Cluster* a = forest_.cluster_of(e.a, cl);
      const Cluster* b = forest_.cluster_of(e.b, cl);
      if (a == b) {
        forest_.push_down(e);
        moved.push_back(e);
      } else if (a->size + b->size <= forest_.cap(cl)) {
        open.push_back(e);
      }
    }
    if (open.empty()) break;

    // Spanning forest over the unblocked edges, then stars from BFS depth parity.
    std::unordered_map<Cluster*, int> index;
    std::vector<Cluster*> nodes;
    auto id_of = [&](Cluster* c) {
      auto [it, fresh] = index.emplace(c, static_cast<int>(nodes.size()));
      if (fresh) nodes.push_back(c);
      return it->second;
    };
    std::vector<int> uf;
    std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
    std::vector<std::vector<std::pair<int, EdgeKey>>> adj;
    for (const EdgeKey& e : open) {
      const int x = id_of(forest_.cluster_of(e.a, cl));
      const int y = id_of(forest_.cluster_of(e.b, cl));
      while (uf.size() < nodes.size()) {
        uf.push_back(static_cast<int>(uf.size()));
        adj.emplace_back();
      }
      const int rx = find(x);
      const int ry = find(y);
      if (rx == ry) continue;
      uf[rx] = ry;
      adj[x].push_back({y, e});
      adj[y].push_back({x, e});
    }
    const std::size_t count = nodes.size();
    std::vector<int> depth(count, -1);
    std::vector<int> parent(count, -1);
    std::vector<EdgeKey> via(count);
    for (std::size_t r = 0; r < count; ++r) {
      if (depth[r] >= 0) continue;
      depth[r] = 0;
      std::vector<int> queue{static_cast<int>(r)};
      for (std::size_t h = 0; h < queue.size(); ++h) {
        const int x = queue[h];
        for (const auto& [y, e] : adj[x]) {
          if (depth[y] >= 0) continue;
          depth[y] = depth[x] + 1;
          parent[y] = x;
          via[y] = e;
          queue.push_back(y);
        }
      }
    }
    std::vector<std::vector<int>> sats(count);
    for (std::size_t x = 0; x < count; ++x) {
      if (depth[x] % 2 == 1) sats[static_cast<std::size_t>(parent[x])].push_back(static_cast<int>(x));
    }
    for (std::size_t c = 0; c < count; ++c) {
      if (sats[c].empty()) continue;
      Cluster* center = nodes[c];
      std::vector<Cluster*> subset;
      std::unordered_map<const Cluster*, EdgeKey> edge_of;
      for (int x : sats[c]) {
        subset.push_back(nodes[static_cast<std::size_t>(x)]);
        edge_of[nodes[static_cast<std::size_t>(x)]] = via[static_cast<std::size_t>(x)];
      }
      Cluster* p = ClusterForest::parent_of(center);
      const auto prefix = blt(p)->get_maximal_prefix_of_subset(subset, forest_.cap(cl) - center->size);
      if (prefix.empty()) continue;
      std::vector<EdgeKey> group;
      for (const Cluster* s : prefix) group.push_back(edge_of.at(s));
      push_down_group(group, level);
      moved.insert(moved.end(), group.begin(), group.end());
    }
    std::vector<EdgeKey> next;
    for (const EdgeKey& e : open) {
      if (forest_.record(e).level == level) next.push_back(e);
    }
    pending.swap(next);
  }
  return moved;
}

void BlockedConnectivity::batch_insert(const std::vector<EdgeKey>& edges) {
  if (!batch_) {
    DynamicConnectivity::batch_insert(edges);
    return;
  }
  validate_new(edges);
  const int top = forest_.lmax() + 1;
  std::vector<EdgeKey> cur;
  cur.reserve(edges.size());
  for (const EdgeKey& e : edges) {
    const EdgeKey k(e.a, e.b);
    forest_.attach_edge(k, top, false);
    ++forest_.stats().inserts;
    cur.push_back(k);
  }
  for (int l = top; l >= 2 && !cur.empty(); --l) cur = batch_push_down(cur, l);
  forest_.reclaim();
}

void BlockedConnectivity::batch_erase(const std::vector<EdgeKey>& edges) {
  if (!batch_) {
    DynamicConnectivity::batch_erase(edges);
    return;
  }
  validate_live(edges);
  const int top = forest_.lmax() + 1;
  std::vector<std::vector<VertexId>> ends(static_cast<std::size_t>(top + 1));
  for (const EdgeKey& e : edges) {
    const EdgeKey k(e.a, e.b);
    const EdgeRecord rec = forest_.detach_edge(k);
    ++forest_.stats().deletes;
    if (rec.level >= 1) {
      const Cluster* a = forest_.cluster_of(k.a, rec.level - 1);
      const Cluster* b = forest_.cluster_of(k.b, rec.level - 1);
      if (a == b || a->size + b->size <= forest_.cap(rec.level - 1)) ++forest_.stats().nontree_deletes;
    }
    ends[static_cast<std::size_t>(rec.level)].push_back(k.a);
    ends[static_cast<std::size_t>(rec.level)].push_back(k.b);
  }
  std::vector<std::vector<EdgeKey>> deferred(static_cast<std::size_t>(top + 1));
  deferred_ = &deferred;

  struct Split {
    VertexId keep;
    std::vector<VertexId> parts;
    bool center;
  };
  std::vector<VertexId> active;
  std::vector<Split> splits;
  for (int l = 1; l <= forest_.lmax(); ++l) {
    const auto& fresh = ends[static_cast<std::size_t>(l)];
    active.insert(active.end(), fresh.begin(), fresh.end());
    if (active.empty()) continue;

    // Repair the cluster graphs that received fragments from below.
    std::unordered_set<const Cluster*> repaired;
    for (const Split& sp : splits) {
      const Cluster* g = forest_.cluster_of(sp.keep, l);
      if (g->level != l || repaired.count(g) != 0) continue;
      ++probe_.restorations;
      if (g->children->count() <= kBruteForceLimit) {
        repaired.insert(g);
        brute_restore(sp.keep, l);
      } else if (sp.center) {
        repaired.insert(g);
        if (sp.parts.size() == 1) {
          center_restore(sp.keep, sp.parts.front(), l);
        } else {
          brute_restore(sp.keep, l);
        }
      }
    }
    splits.clear();

    // Group the active fragments by their level-l parent.
    std::vector<std::pair<Cluster*, std::vector<VertexId>>> groups;
    std::unordered_map<const Cluster*, std::size_t> group_of;
    std::unordered_set<const Cluster*> seen;
    for (VertexId r : active) {
      Cluster* c = forest_.cluster_of(r, l - 1);
      if (!seen.insert(c).second) continue;
      Cluster* p = ClusterForest::parent_of(c);
      if (p == nullptr || p->level != l) continue;
      auto [it, created] = group_of.emplace(p, groups.size());
      if (created) groups.push_back({p, {}});
      groups[it->second].second.push_back(r);
    }
    std::vector<VertexId> next;
    for (auto& [first_parent, reps] : groups) {
      for (VertexId r : reps) settle(r, l);
      Cluster* p = ClusterForest::parent_of(forest_.cluster_of(reps.front(), l - 1));
      if (p == nullptr || p->level != l) continue;
      std::vector<Cluster*> lone;
      std::vector<Cluster*> distinct;
      bool linked = false;
      for (VertexId r : reps) {
        Cluster* c = forest_.cluster_of(r, l - 1);
        if (ClusterForest::parent_of(c) != p) continue;
        if (std::find(distinct.begin(), distinct.end(), c) != distinct.end()) continue;
        distinct.push_back(c);
        if (has_bit(c->bitmap, l)) {
          linked = true;
        } else {
          lone.push_back(c);
        }
      }
      if (lone.empty()) continue;
      const bool others = p->children->count() > distinct.size();
      if (!linked && !others) lone.pop_back();
      if (lone.empty()) continue;
      const bool center = is_center(p);
      Split sp{-1, {}, center};
      for (Cluster* w : lone) {
        sp.parts.push_back(any_vertex(w));
        forest_.remove_child(p, w);
        forest_.attach_beside(p, w, l + 1);
      }
      sp.keep = any_vertex(p);
      forest_.splice_if_trivial(p);
      if (forest_.cluster_of(sp.keep, l + 1) == forest_.global_root()) continue;
      next.push_back(sp.keep);
      next.insert(next.end(), sp.parts.begin(), sp.parts.end());
      splits.push_back(std::move(sp));
    }
    active.swap(next);
  }
  deferred_ = nullptr;

  for (int l = top; l >= 2; --l) {
    auto& batch = deferred[static_cast<std::size_t>(l)];
    if (batch.empty()) continue;
    const auto moved = batch_push_down(batch, l);
    auto& below = deferred[static_cast<std::size_t>(l - 1)];
    below.insert(below.end(), moved.begin(), moved.end());
  }
  forest_.reclaim();
}

}  // namespace dyncon
