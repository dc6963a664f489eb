#include <algorithm>

#include "dyncon/connectivity.hpp"

namespace dyncon {

CFConnectivity::CFConnectivity(int n, bool lca, bool tracking)
    : forest_(n, lca ? Mode::Lca : Mode::Root), lca_(lca), tracking_(tracking) {}

Stats CFConnectivity::stats() const {
  Stats s = forest_.stats();
  s.bytes = forest_.memory().current();
  s.peak_bytes = forest_.memory().peak();
  return s;
}

void CFConnectivity::insert(VertexId u, VertexId v) {
  forest_.check_vertex(u);
  forest_.check_vertex(v);
  if (u == v) throw QueryError("self-loop edges are not allowed");
  const EdgeKey e(u, v);
  if (forest_.has_edge(e)) throw QueryError("edge already present");
  ++forest_.stats().inserts;
  const int top = forest_.lmax();
  Cluster* ru = forest_.root_of(u);
  Cluster* rv = forest_.root_of(v);
  if (ru != rv) {
    forest_.attach_edge(e, top, true);
    forest_.join_at_level(top, ru, rv, nullptr);
  } else if (lca_) {
    Cluster* c = forest_.lowest_common(u, v);
    forest_.attach_edge(e, c->level, false);
  } else {
    forest_.attach_edge(e, top, false);
  }
  forest_.reclaim();
}

void CFConnectivity::erase(VertexId u, VertexId v) {
  forest_.check_vertex(u);
  forest_.check_vertex(v);
  const EdgeKey e(u, v);
  if (!forest_.has_edge(e)) throw QueryError("edge not present");
  const EdgeRecord rec = forest_.detach_edge(e);
  ++forest_.stats().deletes;
  if (tracking_ && !rec.is_tree) {
    ++forest_.stats().nontree_deletes;
    forest_.reclaim();
    return;
  }
  int level = rec.level;
  Cluster* cu = forest_.cluster_of(u, level - 1);
  Cluster* cv = forest_.cluster_of(v, level - 1);
  while (cu != cv) {
    Cluster* p = ClusterForest::parent_of(cu);
    if (p == nullptr || p->level != level || ClusterForest::parent_of(cv) != p) {
      throw StructuralError("delete: endpoint clusters lost their common parent");
    }
    Cluster* w = nullptr;
    if (replacement_search(p, level, u, v, cu, cv, &w) == SearchOutcome::Reconnected) break;
    ++probe_.splits;
    if (ClusterForest::parent_of(w) == p) forest_.remove_child(p, w);
    forest_.attach_beside(p, w, level + 1);
    forest_.splice_if_trivial(p);
    if (level == forest_.lmax()) break;
    ++level;
    cu = forest_.cluster_of(u, level - 1);
    cv = forest_.cluster_of(v, level - 1);
  }
  forest_.reclaim();
}

bool CFConnectivity::next_edge(Side& s, int level, EdgeKey* e, VertexId* from) {
  for (;;) {
    if (s.leaf != nullptr && s.cursor < s.edges->size()) {
      *e = (*s.edges)[s.cursor++];
      *from = s.leaf->id;
      return true;
    }
    s.leaf = nullptr;
    while (!s.walk.empty()) {
      const LTNode* x = s.walk.back();
      s.walk.pop_back();
      if (!has_bit(x->bitmap, level)) continue;
      if (!x->is_cluster) {
        s.walk.push_back(x->right);
        s.walk.push_back(x->left);
        continue;
      }
      const auto* c = static_cast<const Cluster*>(x);
      if (c->is_leaf()) {
        s.leaf = static_cast<const VertexLeaf*>(c);
        s.edges = s.leaf->edges_at(level);
        s.cursor = 0;
        break;
      }
      const auto& rs = c->children->roots();
      for (auto it = rs.rbegin(); it != rs.rend(); ++it) s.walk.push_back(*it);
    }
    if (s.leaf != nullptr) continue;
    if (s.head < s.queue.size()) {
      s.walk.push_back(s.queue[s.head++]);
      continue;
    }
    return false;
  }
}

void CFConnectivity::push_all(const std::vector<EdgeKey>& edges, int level) {
  for (const EdgeKey& e : edges) {
    const EdgeRecord* rec = forest_.find_edge(e);
    if (rec == nullptr || rec->level != level) continue;
    forest_.push_down(e);
  }
}

SearchOutcome CFConnectivity::replacement_search(Cluster* p, int level, VertexId u, VertexId v, Cluster* cu,
                                                 Cluster* cv, Cluster** detached) {
  ++probe_.searches;
  ++forest_.stats().searches;
  if (++stamp_ == 0) stamp_ = 1;
  Side sides[2];
  Cluster* starts[2] = {cu, cv};
  for (int k = 0; k < 2; ++k) {
    starts[k]->visit_stamp = stamp_;
    starts[k]->visit_side = static_cast<std::uint8_t>(k + 1);
    sides[k].queue.push_back(starts[k]);
    sides[k].visited_size = starts[k]->size;
  }
  const std::int64_t half = forest_.cap(level - 1);
  int exhausted = -1;
  EdgeKey contact;
  bool touched = false;
  for (int turn = 0; exhausted < 0 && !touched; turn ^= 1) {
    Side& s = sides[turn];
    EdgeKey e;
    VertexId from = 0;
    if (!next_edge(s, level, &e, &from)) {
      exhausted = turn;
      break;
    }
    ++s.steps;
    ++forest_.stats().fetches;
    const std::uint64_t gap = sides[0].steps > sides[1].steps ? sides[0].steps - sides[1].steps
                                                              : sides[1].steps - sides[0].steps;
    probe_.max_step_gap = std::max(probe_.max_step_gap, gap);
    if (!s.seen.insert(e).second) continue;
    Cluster* y = forest_.cluster_of(e.other(from), level - 1);
    if (y->visit_stamp == stamp_) {
      if (y->visit_side == turn + 1) {
        s.explored.push_back(e);
      } else {
        contact = e;
        touched = true;
      }
      continue;
    }
    y->visit_stamp = stamp_;
    y->visit_side = static_cast<std::uint8_t>(turn + 1);
    s.queue.push_back(y);
    s.visited_size += y->size;
    s.explored.push_back(e);
    if (tracking_) forest_.record(e).is_tree = true;
  }
  if (touched) {
    if (tracking_) forest_.record(contact).is_tree = true;
    const int t = sides[0].visited_size <= sides[1].visited_size ? 0 : 1;
    if (sides[t].visited_size > half) ++probe_.oversized_pushes;
    push_all(sides[t].explored, level);
    return SearchOutcome::Reconnected;
  }
  Side& s = sides[exhausted];
  Side& o = sides[exhausted ^ 1];
  if (s.visited_size <= half) {
    push_all(s.explored, level);
    *detached = forest_.cluster_of(exhausted == 0 ? u : v, level - 1);
    return SearchOutcome::Split;
  }
  // The exhausted side is too heavy to fold into one child: fold the other
  // side instead and regroup the heavy side under its own level-i node.
  push_all(o.explored, level);
  if (s.queue.size() == 1) {
    *detached = s.queue.front();
    return SearchOutcome::Split;
  }
  Cluster* fresh = forest_.new_cluster(level);
  for (Cluster* c : s.queue) {
    p->children->erase(c);
    fresh->children->insert(c);
  }
  forest_.recompute(fresh);
  forest_.recompute(p);
  forest_.propagate(p);
  *detached = fresh;
  return SearchOutcome::Split;
}

}  // namespace dyncon
