#include <random>

#include "doctest.h"
#include "dyncon/blocked.hpp"
#include "dyncon/connectivity.hpp"
#include "dyncon/oracle.hpp"
#include "test_support.hpp"

using namespace dyncon;

namespace {

// Boolean transitive closure by repeated squaring of the adjacency matrix.
std::vector<std::vector<bool>> closure(int n, const std::vector<EdgeKey>& edges) {
  std::vector<std::vector<bool>> r(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
  for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = true;
  for (const EdgeKey& e : edges) {
    r[static_cast<std::size_t>(e.a)][static_cast<std::size_t>(e.b)] = true;
    r[static_cast<std::size_t>(e.b)][static_cast<std::size_t>(e.a)] = true;
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(j);
        const auto uk = static_cast<std::size_t>(k);
        if (r[ui][uk] && r[uk][uj]) r[ui][uj] = true;
      }
    }
  }
  return r;
}

BlockedConnectivity& soaked(BlockedConnectivity& b, std::uint64_t seed, int ops) {
  testing::RandomUpdates up(b.n(), seed);
  up.insert_percent = 62;
  for (int i = 0; i < ops; ++i) {
    if (up.next_is_insert()) {
      for (const EdgeKey& e : up.inserts(1)) b.insert(e.a, e.b);
    } else {
      for (const EdgeKey& e : up.deletes(1)) b.erase(e.a, e.b);
    }
  }
  return b;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("oracle basics") {
  EdgeSetOracle o(6);
  CHECK(o.connected(3, 3));
  CHECK_FALSE(o.connected(0, 1));
  o.insert(0, 1);
  o.insert(1, 2);
  CHECK(o.connected(0, 2));
  CHECK_THROWS_AS(o.insert(0, 1), QueryError);
  CHECK_THROWS_AS(o.erase(3, 4), QueryError);
  o.erase(1, 0);
  CHECK_FALSE(o.connected(0, 2));
  CHECK(o.edge_count() == 1);
  const auto comp = o.components();
  CHECK(comp[2] == 1);
  CHECK(comp[0] == 0);
}

TEST_CASE("oracle equals the transitive closure on small graphs") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 15);
    EdgeSetOracle o(n);
    for (int step = 0; step < 60; ++step) {
      const auto u = static_cast<VertexId>(rng() % static_cast<std::uint64_t>(n));
      const auto v = static_cast<VertexId>(rng() % static_cast<std::uint64_t>(n));
      if (u == v) continue;
      if (o.contains(EdgeKey(u, v))) {
        o.erase(u, v);
      } else {
        o.insert(u, v);
      }
      const auto r = closure(n, o.edge_list());
      for (VertexId a = 0; a < n; ++a) {
        for (VertexId b = 0; b < n; ++b) {
          REQUIRE(o.connected(a, b) == r[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
        }
      }
    }
  }
}

TEST_CASE("cluster graph of a star") {
  BlockedConnectivity b(16);
  for (VertexId v = 1; v < 6; ++v) b.insert(0, v);
  const ClusterForest& f = b.forest();
  for (const Cluster* c : f.internal_clusters()) {
    if (c == f.global_root()) continue;
    const ExplicitClusterGraph g = build_cluster_graph(f, c);
    CHECK(g.nodes.size() == c->children->count());
    CHECK(g.connected(false));
    CHECK(g.diameter() <= 2);
    CHECK_FALSE(g.blocked_centers().empty());
    CHECK_FALSE(g.has_disjoint_blocked_pair());
  }
}

TEST_CASE("a batch-inserted tree audits clean") {
  BlockedConnectivity b(64, true);
  std::vector<EdgeKey> tree;
  for (VertexId v = 1; v < 64; ++v) tree.emplace_back((v - 1) / 2, v);
  b.batch_insert(tree);
  const AuditReport r = audit(b.forest());
  CHECK_MESSAGE(r.ok(), r.summary());
  CHECK(r.summary() == "clean");
}

TEST_CASE("a corrupted size field gives exactly one size-invariant violation") {
  BlockedConnectivity b(64);
  soaked(b, 2, 400);
  REQUIRE(audit(b.forest()).ok());
  REQUIRE(inject_size_fault(b.forest()));
  const AuditReport r = audit(b.forest());
  CHECK(r.count("invariant1") == 1);
}

TEST_CASE("every seeded corruption class is flagged") {
  using Inject = bool (*)(ClusterForest&);
  const std::vector<std::pair<const char*, Inject>> faults{
      {"size", inject_size_fault},
      {"bitmap", inject_bitmap_fault},
      {"blocked", inject_blocked_fault},
      {"compression", inject_compression_fault},
      {"matching", inject_matching_fault},
  };
  for (const auto& [name, inject] : faults) {
    CAPTURE(name);
    BlockedConnectivity b(64);
    soaked(b, 5, 600);
    REQUIRE(audit(b.forest()).ok());
    REQUIRE(inject(b.forest()));
    CHECK_FALSE(audit(b.forest()).ok());
  }
}

TEST_CASE("cf forests audit clean including tree connectivity") {
  CFConnectivity g(128, true);
  testing::RandomUpdates up(128, 44);
  for (int i = 0; i < 2000; ++i) {
    if (up.next_is_insert()) {
      for (const EdgeKey& e : up.inserts(1)) g.insert(e.a, e.b);
    } else {
      for (const EdgeKey& e : up.deletes(1)) g.erase(e.a, e.b);
    }
  }
  AuditOptions opt;
  opt.tree_connectivity = true;
  const AuditReport r = audit(g.forest(), opt);
  CHECK_MESSAGE(r.ok(), r.summary());
}

TEST_CASE("blocked soak on 512 vertices audits clean") {
  BlockedConnectivity b(512);
  testing::RandomUpdates up(512, 10);
  up.insert_percent = 62;
  for (int i = 0; i < 10000; ++i) {
    if (up.next_is_insert()) {
      for (const EdgeKey& e : up.inserts(1)) b.insert(e.a, e.b);
    } else {
      for (const EdgeKey& e : up.deletes(1)) b.erase(e.a, e.b);
    }
    if (i % 1000 == 999) {
      const AuditReport r = audit(b.forest());
      REQUIRE_MESSAGE(r.ok(), r.summary());
    }
  }
  CHECK(up.agrees(b, 2000));
}

}
