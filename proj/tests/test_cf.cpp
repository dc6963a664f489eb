#include <map>

#include "doctest.h"
#include "dyncon/connectivity.hpp"
#include "test_support.hpp"

using namespace dyncon;

namespace {

// Smallest l with u and v in one component of the graph of edges at level <= l.
int join_level(const ClusterForest& f, VertexId u, VertexId v) {
  for (int l = 0; l <= f.lmax(); ++l) {
    if (testing::level_components(f, l)[static_cast<std::size_t>(u)].count(v) != 0) return l;
  }
  return -1;
}

void run_random(CFConnectivity& g, std::uint64_t seed, int ops, bool audit_each) {
  const int n = g.n();
  testing::RandomUpdates up(n, seed);
  std::map<EdgeKey, int> levels;
  AuditOptions opt;
  opt.tree_connectivity = g.tracking();
  for (int i = 0; i < ops; ++i) {
    if (up.next_is_insert()) {
      for (const EdgeKey& e : up.inserts(1)) g.insert(e.a, e.b);
    } else {
      for (const EdgeKey& e : up.deletes(1)) {
        g.erase(e.a, e.b);
        levels.erase(e);
      }
      if (audit_each) {
        const AuditReport r = audit(g.forest(), opt);
        REQUIRE_MESSAGE(r.ok(), r.summary());
      }
    }
    REQUIRE(up.agrees(g));
    for (const auto& [e, rec] : g.forest().edges()) {
      auto it = levels.find(e);
      if (it != levels.end()) REQUIRE(rec.level <= it->second);
      levels[e] = rec.level;
    }
  }
  const Stats s = g.stats();
  CHECK(s.pushdowns <= s.inserts * static_cast<std::uint64_t>(g.forest().lmax()));
  CHECK(g.probe().max_step_gap <= 1);
  CHECK(g.probe().oversized_pushes == 0);
}

}  // namespace

TEST_SUITE("connectivity-cf") {

TEST_CASE("connected basics") {
  CFConnectivity g(8, false);
  CHECK(g.connected(3, 3));
  CHECK_FALSE(g.connected(3, 4));
  CHECK_THROWS_AS((void)g.connected(0, 8), QueryError);
  CHECK(g.name() == "cf-root");
  CHECK(CFConnectivity(8, true).name() == "cf-lca");
}

TEST_CASE("insert into an empty forest") {
  for (bool lca : {false, true}) {
    CFConnectivity g(16, lca);
    g.insert(2, 9);
    CHECK(g.connected(2, 9));
    const EdgeRecord* rec = g.forest().find_edge(EdgeKey(2, 9));
    REQUIRE(rec != nullptr);
    CHECK(rec->level == g.forest().lmax());
    CHECK(rec->is_tree);
  }
}

TEST_CASE("bad updates are rejected without changes") {
  CFConnectivity g(8, true);
  g.insert(0, 1);
  CHECK_THROWS_AS(g.insert(1, 0), QueryError);
  CHECK_THROWS_AS(g.insert(2, 2), QueryError);
  CHECK_THROWS_AS(g.insert(0, 9), QueryError);
  CHECK_THROWS_AS(g.erase(0, 2), QueryError);
  CHECK(g.forest().edges().size() == 1);
  CHECK(g.stats().inserts == 1);
  CHECK(audit(g.forest()).ok());
}

TEST_CASE("path deletion") {
  for (bool lca : {false, true}) {
    CFConnectivity g(4, lca);
    g.insert(0, 1);
    g.insert(1, 2);
    g.erase(0, 1);
    CHECK_FALSE(g.connected(0, 1));
    CHECK(g.connected(1, 2));
    CHECK(audit(g.forest()).ok());
  }
}

TEST_CASE("non-tree third edge of a triangle") {
  SUBCASE("root insertion keeps it at the top") {
    CFConnectivity g(8, false);
    g.insert(0, 1);
    g.insert(1, 2);
    g.insert(0, 2);
    const EdgeRecord* rec = g.forest().find_edge(EdgeKey(0, 2));
    CHECK(rec->level == g.forest().lmax());
    CHECK_FALSE(rec->is_tree);
  }
  SUBCASE("lca insertion stores it at the join level") {
    CFConnectivity g(64, true);
    testing::RandomUpdates up(64, 77);
    up.insert_percent = 65;
    for (int i = 0; i < 400; ++i) {
      if (up.next_is_insert()) {
        for (const EdgeKey& e : up.inserts(1)) g.insert(e.a, e.b);
      } else {
        for (const EdgeKey& e : up.deletes(1)) g.erase(e.a, e.b);
      }
    }
    int tried = 0;
    for (VertexId u = 0; u < 64 && tried < 20; ++u) {
      for (VertexId v = u + 1; v < 64 && tried < 20; ++v) {
        if (!g.connected(u, v) || g.forest().has_edge(EdgeKey(u, v))) continue;
        const int expect = join_level(g.forest(), u, v);
        g.insert(u, v);
        const EdgeRecord* rec = g.forest().find_edge(EdgeKey(u, v));
        CHECK(rec->level == expect);
        CHECK_FALSE(rec->is_tree);
        ++tried;
      }
    }
    CHECK(tried == 20);
    CHECK(audit(g.forest()).ok());
  }
}

TEST_CASE("non-tree deletion takes the fast path") {
  CFConnectivity g(8, false);
  g.insert(0, 1);
  g.insert(1, 2);
  g.insert(0, 2);
  const Stats before = g.stats();
  g.erase(0, 2);
  const Stats after = g.stats();
  CHECK(after.nontree_deletes == before.nontree_deletes + 1);
  CHECK(after.fetches == before.fetches);
  CHECK(after.searches == before.searches);
  CHECK(g.connected(0, 2));
}

TEST_CASE("deleting a cycle edge keeps the component") {
  // Component on 4..7 where 4-6 has replacements through 5.
  for (bool lca : {false, true}) {
    CFConnectivity g(8, lca);
    g.insert(4, 6);
    g.insert(4, 5);
    g.insert(5, 6);
    g.insert(5, 7);
    g.insert(6, 7);
    g.insert(0, 1);
    g.erase(4, 6);
    CHECK(g.connected(4, 6));
    CHECK(g.connected(7, 4));
    CHECK_FALSE(g.connected(0, 4));
    AuditOptions opt;
    opt.tree_connectivity = true;
    CHECK(audit(g.forest(), opt).ok());
  }
}

TEST_CASE("bridge deletion with an isolated side splits immediately") {
  CFConnectivity g(8, false);
  g.insert(0, 1);
  g.insert(1, 2);
  g.insert(2, 0);
  g.insert(2, 3);
  g.erase(2, 3);
  CHECK_FALSE(g.connected(3, 0));
  CHECK(g.forest().root_of(3) == g.forest().leaf(3));
  CHECK(g.probe().splits >= 1);
}

TEST_CASE("random streams match the oracle with audits after every delete") {
  for (bool lca : {false, true}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      CAPTURE(lca);
      CAPTURE(seed);
      CFConnectivity g(40, lca);
      run_random(g, seed, 1500, true);
    }
  }
}

TEST_CASE("without non-tree tracking every deletion searches") {
  CFConnectivity g(40, false, false);
  run_random(g, 9, 1500, true);
  CHECK(g.stats().nontree_deletes == 0);
}

TEST_CASE("larger random streams with sampled queries") {
  for (bool lca : {false, true}) {
    CFConnectivity g(300, lca);
    run_random(g, 42, 6000, false);
    AuditOptions opt;
    opt.tree_connectivity = true;
    const AuditReport r = audit(g.forest(), opt);
    CHECK_MESSAGE(r.ok(), r.summary());
  }
}

}
