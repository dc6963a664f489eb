#include <cstdio>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "dyncon/bench.hpp"

using namespace dyncon;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dyncon_test_" + name)).string();
}

}  // namespace

TEST_SUITE("bench-cli") {

TEST_CASE("graph parsing") {
  const Graph g = parse_graph("# comment\n4 2\n0 1\n2 3\n");
  CHECK(g.n == 4);
  CHECK(g.edges == std::vector<EdgeKey>{EdgeKey(0, 1), EdgeKey(2, 3)});
  CHECK(parse_graph("5 0\n").edges.empty());
}

TEST_CASE("graph parse errors carry line numbers") {
  auto message = [](const std::string& text) {
    try {
      (void)parse_graph(text, "g.txt");
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("4 2\n0 1\n1 0\n").find("g.txt:3: duplicate edge") != std::string::npos);
  CHECK(message("4 1\n2 2\n").find("g.txt:2: self-loop") != std::string::npos);
  CHECK(message("4 1\n0 4\n").find("g.txt:2: vertex id exceeds") != std::string::npos);
  CHECK(message("4 2\n0 1\n").find("declares 2 edges") != std::string::npos);
  CHECK(message("4 1\n0 x\n").find("g.txt:2: expected an integer") != std::string::npos);
  CHECK(message("").find("missing") != std::string::npos);
  CHECK_THROWS_AS(load_graph(temp_path("missing_graph_file")), ParseError);
}

TEST_CASE("graph write and read round trip") {
  const Graph g = random_graph(50, 200, 3);
  const std::string path = temp_path("graph.txt");
  write_graph(g, path);
  const Graph h = load_graph(path);
  CHECK(h.n == g.n);
  CHECK(h.edges == g.edges);
  std::filesystem::remove(path);
}

TEST_CASE("generators") {
  const Graph grid = grid_graph(3, 4);
  CHECK(grid.n == 12);
  CHECK(grid.edges.size() == 3 * 3 + 2 * 4);
  const Graph r = random_graph(20, 30, 1);
  CHECK(r.edges.size() == 30);
  CHECK(random_graph(20, 30, 1).edges == r.edges);
  CHECK_THROWS_AS(random_graph(4, 7, 1), QueryError);
}

TEST_CASE("one stage: all inserts then all deletes") {
  const Graph g = grid_graph(4, 4);
  const UpdateStream s = gen_stream(g, 1, 9);
  std::vector<OpKind> kinds;
  for (const Op& o : s.ops) {
    if (o.kind == OpKind::Insert || o.kind == OpKind::Delete) kinds.push_back(o.kind);
  }
  const std::size_t m = g.edges.size();
  REQUIRE(kinds.size() == 2 * m);
  for (std::size_t i = 0; i < m; ++i) CHECK(kinds[i] == OpKind::Insert);
  for (std::size_t i = m; i < 2 * m; ++i) CHECK(kinds[i] == OpKind::Delete);
}

TEST_CASE("staged streams are deterministic and use each edge once per phase") {
  const Graph g = random_graph(300, 2000, 4);
  const UpdateStream a = gen_stream(g, 10, 5);
  const UpdateStream b = gen_stream(g, 10, 5);
  CHECK(format_stream(a) == format_stream(b));
  CHECK(format_stream(a) != format_stream(gen_stream(g, 10, 6)));
  std::map<EdgeKey, std::pair<int, int>> count;
  int stages = 0;
  std::size_t queries = 0;
  for (const Op& o : a.ops) {
    if (o.kind == OpKind::Stage) ++stages;
    if (o.kind == OpKind::Query) ++queries;
    if (o.kind == OpKind::Insert) ++count[EdgeKey(o.u, o.v)].first;
    if (o.kind == OpKind::Delete) ++count[EdgeKey(o.u, o.v)].second;
  }
  CHECK(stages == 20);
  CHECK(queries == 20 * 1000);
  CHECK(count.size() == g.edges.size());
  for (const EdgeKey& e : g.edges) CHECK(count[e] == std::make_pair(1, 1));
}

TEST_CASE("stream round trip and validation") {
  const UpdateStream s = random_stream(30, 2000, 7, 250);
  validate_stream(s);
  const std::string path = temp_path("stream.txt");
  write_stream(s, path);
  const UpdateStream t = load_stream(path);
  CHECK(format_stream(t) == format_stream(s));
  CHECK(t.op_count() == 2000);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(parse_stream("4 1 0\nD 0 1\n", "s"), ParseError);
  CHECK_THROWS_AS(parse_stream("4 2 0\nI 0 1\nI 1 0\n", "s"), ParseError);
  CHECK_THROWS_AS(parse_stream("4 1 0\nX 0 1\n", "s"), ParseError);
  CHECK_THROWS_AS(parse_stream("4 2 0\nI 0 1\n", "s"), ParseError);
  UpdateStream bad;
  bad.n = 4;
  bad.ops = {{OpKind::Delete, 0, 1}};
  CHECK_THROWS_AS(validate_stream(bad), ParseError);
}

TEST_CASE("oracle runs are self-consistent") {
  const UpdateStream s = random_stream(20, 1000, 2, 200);
  const RunReport r = run_stream("oracle", s, {true, true});
  CHECK(r.ok);
  CHECK(r.failed_op == -1);
}

TEST_CASE("every algorithm agrees under lockstep verification") {
  const UpdateStream s = random_stream(40, 1000, 3, 100);
  std::string hash;
  for (const std::string& algo : kAlgorithms) {
    CAPTURE(algo);
    const RunReport r = run_stream(algo, s, {true, true});
    CHECK_MESSAGE(r.ok, r.failure);
    if (hash.empty()) hash = r.query_hash;
    CHECK(r.query_hash == hash);
  }
}

TEST_CASE("report rows: phases, monotone counters, determinism") {
  const UpdateStream s = gen_stream(grid_graph(10, 10), 3, 1);
  const RunReport a = run_stream("cf-lca", s);
  const RunReport b = run_stream("cf-lca", s);
  REQUIRE(a.rows.size() == 12);
  CHECK(a.rows[0].phase == "insert");
  CHECK(a.rows[1].phase == "query");
  CHECK(a.rows[6].phase == "delete");
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].fetches == b.rows[i].fetches);
    CHECK(a.rows[i].pushdowns == b.rows[i].pushdowns);
    CHECK(a.rows[i].peak_bytes == b.rows[i].peak_bytes);
    CHECK(a.rows[i].query_hash == b.rows[i].query_hash);
    if (i == 0) continue;
    CHECK(a.rows[i].fetches >= a.rows[i - 1].fetches);
    CHECK(a.rows[i].pushdowns >= a.rows[i - 1].pushdowns);
    CHECK(a.rows[i].peak_bytes >= a.rows[i - 1].peak_bytes);
  }
}

TEST_CASE("a corrupted stream is reported with its op index") {
  UpdateStream s;
  s.n = 4;
  s.ops = {{OpKind::Insert, 0, 1}, {OpKind::Delete, 2, 3}};
  const RunReport r = run_stream("cf-root", s);
  CHECK_FALSE(r.ok);
  CHECK(r.failed_op == 1);
}

TEST_CASE("csv round trip") {
  CHECK(format_report_csv({}) == std::string(kCsvHeader) + "\n");
  const RunReport r = run_stream("hdt", gen_stream(grid_graph(6, 6), 2, 4));
  const std::string path = temp_path("report.csv");
  write_report_csv(r.rows, path);
  const auto back = read_report_csv(path);
  CHECK(back == r.rows);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(parse_report_csv("algo,stage\n"), ParseError);
  CHECK_THROWS_AS(parse_report_csv(std::string(kCsvHeader) + "\nx,1,2\n"), ParseError);
}

TEST_CASE("unknown algorithm") { CHECK_THROWS_AS(make_algorithm("nope", 4), QueryError); }

}
