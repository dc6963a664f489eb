#include <set>

#include "doctest.h"
#include "dyncon/blocked.hpp"
#include "test_support.hpp"

using namespace dyncon;
using testing::leaf_set;

namespace {

AuditReport full_audit(const BlockedConnectivity& b) { return audit(b.forest()); }

// Blockedness recomputed from leaf sets instead of the cached size fields.
bool blocked_by_leaves(const ClusterForest& f, EdgeKey e) {
  const int l = f.find_edge(e)->level;
  const Cluster* a = f.cluster_of(e.a, l - 1);
  const Cluster* b = f.cluster_of(e.b, l - 1);
  if (a == b) return false;
  return static_cast<std::int64_t>(leaf_set(a).size() + leaf_set(b).size()) > (std::int64_t{1} << (l - 1));
}

void drive(BlockedConnectivity& b, testing::RandomUpdates& up, int ops, std::size_t max_batch, int audit_every) {
  for (int i = 0; i < ops; ++i) {
    const std::size_t k = max_batch == 1 ? 1 : 1 + up.rng() % max_batch;
    if (up.next_is_insert()) {
      b.batch_insert(up.inserts(k));
    } else {
      b.batch_erase(up.deletes(k));
    }
    REQUIRE(up.agrees(b));
    if (audit_every > 0 && i % audit_every == 0) {
      const AuditReport r = full_audit(b);
      REQUIRE_MESSAGE(r.ok(), r.summary());
    }
  }
}

}  // namespace

TEST_SUITE("blocked-cf") {

TEST_CASE("names and modes") {
  CHECK(BlockedConnectivity(4).name() == "cf-blocked");
  CHECK(BlockedConnectivity(4, true).name() == "cf-blocked-batch");
}

TEST_CASE("a fresh edge between isolated vertices sinks to level 1") {
  BlockedConnectivity b(16);
  b.insert(3, 7);
  CHECK(b.forest().find_edge(EdgeKey(3, 7))->level == 1);
  CHECK(b.connected(3, 7));
  CHECK(b.forest().root_of(3)->size == 2);
  CHECK(full_audit(b).ok());
}

TEST_CASE("top-level edges are never blocked") {
  ClusterForest f(16, Mode::Blocked);
  for (VertexId v = 1; v < 16; ++v) {
    f.attach_edge(EdgeKey(0, v), f.lmax() + 1, false);
    CHECK_FALSE(f.is_blocked(EdgeKey(0, v)));
  }
}

TEST_CASE("blocked flags agree with sizes read from leaf sets") {
  BlockedConnectivity b(64);
  testing::RandomUpdates up(64, 3);
  drive(b, up, 800, 1, 0);
  for (const auto& [e, rec] : b.forest().edges()) {
    REQUIRE(b.forest().is_blocked(e) == blocked_by_leaves(b.forest(), e));
  }
}

TEST_CASE("push until blocked stops at the first blocked level") {
  BlockedConnectivity b(16);
  b.insert(0, 1);
  b.insert(2, 3);
  // Both endpoints sit in size-2 clusters: the edge is blocked at level 2.
  b.insert(1, 2);
  CHECK(b.forest().find_edge(EdgeKey(1, 2))->level == 2);
  CHECK(b.forest().is_blocked(EdgeKey(1, 2)));
  CHECK(full_audit(b).ok());
}

TEST_CASE("bad updates are rejected") {
  BlockedConnectivity b(8);
  b.insert(0, 1);
  CHECK_THROWS_AS(b.insert(0, 1), QueryError);
  CHECK_THROWS_AS(b.insert(4, 4), QueryError);
  CHECK_THROWS_AS(b.erase(2, 3), QueryError);
  CHECK(b.forest().edges().size() == 1);
}

TEST_CASE("deleting an unblocked edge does no search") {
  BlockedConnectivity b(64);
  testing::RandomUpdates up(64, 8);
  up.insert_percent = 55;
  bool found = false;
  for (int i = 0; i < 5000 && !found; ++i) {
    if (up.next_is_insert()) {
      for (const EdgeKey& e : up.inserts(1)) b.insert(e.a, e.b);
    } else {
      for (const EdgeKey& e : up.deletes(1)) b.erase(e.a, e.b);
    }
    for (const EdgeKey& e : up.live) {
      if (b.forest().is_blocked(e)) continue;
      const Stats before = b.stats();
      b.erase(e.a, e.b);
      up.oracle.erase(e.a, e.b);
      up.live.erase(std::find(up.live.begin(), up.live.end(), e));
      const Stats after = b.stats();
      CHECK(after.fetches == before.fetches);
      CHECK(after.nontree_deletes == before.nontree_deletes + 1);
      found = true;
      break;
    }
  }
  CHECK(found);
  CHECK(up.agrees(b));
}

TEST_CASE("deleting the bridge of a two-vertex component splits it") {
  BlockedConnectivity b(8);
  b.insert(0, 1);
  const std::size_t roots = b.forest().global_root()->children->count();
  b.erase(0, 1);
  CHECK_FALSE(b.connected(0, 1));
  CHECK(b.forest().global_root()->children->count() == roots + 1);
  CHECK(b.forest().internal_count() == 1);
  CHECK(full_audit(b).ok());
}

TEST_CASE("random single updates keep every invariant") {
  for (int n : {16, 64, 100}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      CAPTURE(n);
      CAPTURE(seed);
      BlockedConnectivity b(n);
      testing::RandomUpdates up(n, seed);
      drive(b, up, 1500, 1, 1);
      const auto& pr = b.probe();
      CHECK(pr.max_satellite_blocked <= 1);
    }
  }
}

TEST_CASE("hub-heavy updates exercise center restoration") {
  BlockedConnectivity b(128);
  testing::RandomUpdates up(128, 4);
  up.hub = 6;
  up.insert_percent = 58;
  drive(b, up, 6000, 1, 7);
  const auto& pr = b.probe();
  CHECK(pr.restorations > 0);
  CHECK(pr.center_runs + pr.brute_runs > 0);
  CHECK(pr.max_satellite_blocked <= 1);
  const Stats s = b.stats();
  CHECK(s.pushdowns <= s.inserts * static_cast<std::uint64_t>(b.forest().lmax() + 1));
}

TEST_CASE("push down group of one equals a single push") {
  BlockedConnectivity b(16);
  ClusterForest& f = b.forest();
  const int top = f.lmax() + 1;
  f.attach_edge(EdgeKey(2, 5), top, false);
  b.push_down_group({EdgeKey(2, 5)}, top);
  CHECK(f.find_edge(EdgeKey(2, 5))->level == top - 1);
  CHECK(f.cluster_of(2, top - 1) == f.cluster_of(5, top - 1));
  CHECK(f.cluster_of(2, top - 1)->size == 2);
}

TEST_CASE("push down group moves satellites into the center") {
  BlockedConnectivity b(16);
  ClusterForest& f = b.forest();
  b.insert(0, 4);
  const int top = f.lmax() + 1;
  const std::vector<EdgeKey> star{EdgeKey(0, 1), EdgeKey(0, 2), EdgeKey(0, 3)};
  for (const EdgeKey& e : star) f.attach_edge(e, top, false);
  const Cluster* center = f.cluster_of(0, top - 1);
  const std::int64_t before = center->size;
  b.push_down_group(star, top);
  const Cluster* after = f.cluster_of(0, top - 1);
  CHECK(after->size == before + 3);
  for (VertexId v : {1, 2, 3}) CHECK(f.cluster_of(v, top - 1) == after);
  for (const EdgeKey& e : star) CHECK(f.find_edge(e)->level == top - 1);
}

TEST_CASE("push down group rejects oversized groups") {
  BlockedConnectivity b(8);
  b.insert(0, 1);
  b.insert(1, 2);
  ClusterForest& f = b.forest();
  REQUIRE(f.find_edge(EdgeKey(1, 2))->level == 2);
  f.attach_edge(EdgeKey(0, 2), 2, false);
  CHECK_THROWS_AS(b.push_down_group({EdgeKey(0, 2)}, 2), StructuralError);
}

TEST_CASE("batch push down") {
  BlockedConnectivity b(16, true);
  CHECK(b.batch_push_down({}, 3).empty());
  ClusterForest& f = b.forest();
  const int top = f.lmax() + 1;
  const std::vector<EdgeKey> star{EdgeKey(0, 1), EdgeKey(0, 2), EdgeKey(0, 3)};
  for (const EdgeKey& e : star) f.attach_edge(e, top, false);
  const auto moved = b.batch_push_down(star, top);
  CHECK(std::set<EdgeKey>(moved.begin(), moved.end()) == std::set<EdgeKey>(star.begin(), star.end()));
  CHECK(f.cluster_of(0, top - 1)->size == 4);
}

TEST_CASE("batch insert of a path") {
  BlockedConnectivity b(16, true);
  std::vector<EdgeKey> path;
  for (VertexId v = 1; v < 8; ++v) path.emplace_back(v - 1, v);
  b.batch_insert(path);
  for (VertexId v = 1; v < 8; ++v) CHECK(b.connected(0, v));
  CHECK_FALSE(b.connected(0, 8));
  CHECK(b.forest().root_of(0)->size == 8);
  CHECK(full_audit(b).ok());
}

TEST_CASE("invalid batches are rejected atomically") {
  BlockedConnectivity b(16, true);
  b.batch_insert({EdgeKey(0, 1)});
  const std::size_t internal = b.forest().internal_count();
  CHECK_THROWS_AS(b.batch_insert({EdgeKey(2, 3), EdgeKey(3, 2)}), QueryError);
  CHECK_THROWS_AS(b.batch_insert({EdgeKey(2, 3), EdgeKey(0, 1)}), QueryError);
  CHECK_THROWS_AS(b.batch_erase({EdgeKey(0, 1), EdgeKey(4, 5)}), QueryError);
  CHECK(b.forest().edges().size() == 1);
  CHECK(b.forest().internal_count() == internal);
  CHECK_FALSE(b.connected(2, 3));
  CHECK(b.connected(0, 1));
}

TEST_CASE("batch of one matches single updates") {
  BlockedConnectivity single(32);
  BlockedConnectivity batch(32, true);
  testing::RandomUpdates up(32, 19);
  for (int i = 0; i < 800; ++i) {
    const auto es = up.next_is_insert() ? up.inserts(1) : up.deletes(1);
    for (const EdgeKey& e : es) {
      if (up.oracle.contains(e)) {
        single.insert(e.a, e.b);
      } else {
        single.erase(e.a, e.b);
      }
    }
    if (!es.empty() && up.oracle.contains(es.front())) {
      batch.batch_insert(es);
    } else {
      batch.batch_erase(es);
    }
    for (VertexId u = 0; u < 32; ++u) {
      for (VertexId v = u + 1; v < 32; ++v) REQUIRE(single.connected(u, v) == batch.connected(u, v));
    }
  }
}

TEST_CASE("deleting a whole component in one batch isolates every vertex") {
  BlockedConnectivity b(32, true);
  std::vector<EdgeKey> edges;
  for (VertexId v = 1; v < 20; ++v) edges.emplace_back(v - 1, v);
  for (VertexId v = 2; v < 20; v += 3) edges.emplace_back(0, v);
  b.batch_insert(edges);
  b.batch_erase(edges);
  for (VertexId v = 0; v < 32; ++v) CHECK(b.forest().root_of(v) == b.forest().leaf(v));
  CHECK(b.forest().global_root()->children->count() == 32);
  CHECK(full_audit(b).ok());
}

TEST_CASE("random batches keep every invariant") {
  for (int n : {16, 64, 128}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      CAPTURE(n);
      CAPTURE(seed);
      BlockedConnectivity b(n, true);
      testing::RandomUpdates up(n, seed + 100);
      drive(b, up, 400, 12, 1);
    }
  }
}

TEST_CASE("large batches with a hub") {
  BlockedConnectivity b(200, true);
  testing::RandomUpdates up(200, 55);
  up.hub = 8;
  drive(b, up, 300, 64, 5);
  CHECK(b.probe().star_rounds > 0);
}

}
