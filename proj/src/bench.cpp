#include "dyncon/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "dyncon/blocked.hpp"
#include "dyncon/hdt.hpp"
#include "dyncon/oracle.hpp"

namespace dyncon {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

[[noreturn]] void fail_at(const std::string& origin, std::size_t line, const std::string& what) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

std::int64_t to_int(const std::string& t, const std::string& origin, std::size_t line) {
  std::size_t used = 0;
  std::int64_t x = 0;
  try {
    x = std::stoll(t, &used);
  } catch (const std::exception&) {
    fail_at(origin, line, "expected an integer, got '" + t + "'");
  }
  if (used != t.size()) fail_at(origin, line, "expected an integer, got '" + t + "'");
  return x;
}

std::uint64_t fnv1a(std::uint64_t h, std::uint8_t byte) {
  h ^= byte;
  return h * 0x100000001b3ULL;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

}  // namespace

Graph parse_graph(const std::string& text, const std::string& origin) {
  Graph g;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::int64_t expected = 0;
  std::unordered_set<EdgeKey, EdgeKeyHash> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = tokens(line);
    if (t.empty() || t[0][0] == '#') continue;
    if (t.size() != 2) fail_at(origin, lineno, "expected two fields");
    const std::int64_t a = to_int(t[0], origin, lineno);
    const std::int64_t b = to_int(t[1], origin, lineno);
    if (!header) {
      if (a < 2 || a >= (1LL << 30)) fail_at(origin, lineno, "vertex count out of range");
      if (b < 0) fail_at(origin, lineno, "negative edge count");
      g.n = static_cast<int>(a);
      expected = b;
      header = true;
      continue;
    }
    if (a < 0 || b < 0 || a >= g.n || b >= g.n) {
      fail_at(origin, lineno, "vertex id exceeds the declared vertex count " + std::to_string(g.n));
    }
    if (a == b) fail_at(origin, lineno, "self-loop edge");
    const EdgeKey e(static_cast<VertexId>(a), static_cast<VertexId>(b));
    if (!seen.insert(e).second) fail_at(origin, lineno, "duplicate edge");
    g.edges.push_back(e);
  }
  if (!header) fail_at(origin, lineno, "missing 'n m' header");
  if (static_cast<std::int64_t>(g.edges.size()) != expected) {
    fail_at(origin, lineno, "header declares " + std::to_string(expected) + " edges, found " +
                                std::to_string(g.edges.size()));
  }
  return g;
}

Graph load_graph(const std::string& path) { return parse_graph(read_file(path), path); }

std::string format_graph(const Graph& g) {
  std::string out = std::to_string(g.n) + " " + std::to_string(g.edges.size()) + "\n";
  for (const EdgeKey& e : g.edges) out += std::to_string(e.a) + " " + std::to_string(e.b) + "\n";
  return out;
}

void write_graph(const Graph& g, const std::string& path) { write_file(path, format_graph(g)); }

Graph grid_graph(int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2) throw QueryError("grid needs at least two vertices");
  Graph g;
  g.n = rows * cols;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const VertexId x = r * cols + c;
      if (c + 1 < cols) g.edges.emplace_back(x, x + 1);
      if (r + 1 < rows) g.edges.emplace_back(x, x + cols);
    }
  }
  return g;
}

Graph random_graph(int n, std::int64_t m, std::uint64_t seed) {
  if (n < 2) throw QueryError("random graph needs at least two vertices");
  const std::int64_t most = static_cast<std::int64_t>(n) * (n - 1) / 2;
  if (m < 0 || m > most) throw QueryError("edge count out of range");
  Graph g;
  g.n = n;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, n - 1);
  std::unordered_set<EdgeKey, EdgeKeyHash> seen;
  while (static_cast<std::int64_t>(g.edges.size()) < m) {
    const VertexId u = pick(rng);
    const VertexId v = pick(rng);
    if (u == v) continue;
    const EdgeKey e(u, v);
    if (seen.insert(e).second) g.edges.push_back(e);
  }
  return g;
}

std::size_t UpdateStream::op_count() const {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(), [](const Op& o) { return o.kind != OpKind::Stage; }));
}

UpdateStream gen_stream(const Graph& g, int stages, std::uint64_t seed) {
  if (stages < 1) throw QueryError("stages must be at least 1");
  UpdateStream s;
  s.n = g.n;
  s.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, g.n - 1);
  const std::size_t m = g.edges.size();
  const std::size_t queries = std::max<std::size_t>(1000, m / 10);
  const std::size_t per_stage = (m + static_cast<std::size_t>(stages) - 1) / static_cast<std::size_t>(stages);

  std::vector<EdgeKey> live;
  std::unordered_map<EdgeKey, std::size_t, EdgeKeyHash> slot;
  auto add_queries = [&]() {
    for (std::size_t q = 0; q < queries; ++q) {
      if (q % 2 == 0 || live.empty()) {
        s.ops.push_back({OpKind::Query, pick(rng), pick(rng)});
      } else {
        const EdgeKey e = live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng)];
        s.ops.push_back({OpKind::Query, e.a, e.b});
      }
    }
  };
  int stage = 0;
  for (int phase = 0; phase < 2; ++phase) {
    std::vector<EdgeKey> order = g.edges;
    std::shuffle(order.begin(), order.end(), rng);
    for (int k = 0; k < stages; ++k) {
      s.ops.push_back({OpKind::Stage, 0, ++stage});
      const std::size_t lo = std::min(m, static_cast<std::size_t>(k) * per_stage);
      const std::size_t hi = std::min(m, lo + per_stage);
      for (std::size_t i = lo; i < hi; ++i) {
        const EdgeKey e = order[i];
        if (phase == 0) {
          slot[e] = live.size();
          live.push_back(e);
          s.ops.push_back({OpKind::Insert, e.a, e.b});
        } else {
          const std::size_t at = slot.at(e);
          slot[live.back()] = at;
          live[at] = live.back();
          live.pop_back();
          slot.erase(e);
          s.ops.push_back({OpKind::Delete, e.a, e.b});
        }
      }
      add_queries();
    }
  }
  validate_stream(s);
  return s;
}

UpdateStream random_stream(int n, std::size_t ops, std::uint64_t seed, std::size_t stage_len) {
  if (n < 2) throw QueryError("random stream needs at least two vertices");
  if (stage_len == 0) stage_len = ops == 0 ? 1 : ops;
  UpdateStream s;
  s.n = n;
  s.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, n - 1);
  std::vector<EdgeKey> live;
  std::unordered_map<EdgeKey, std::size_t, EdgeKeyHash> slot;
  const std::size_t most = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  int stage = 0;
  for (std::size_t i = 0; i < ops; ++i) {
    if (i % stage_len == 0) s.ops.push_back({OpKind::Stage, 0, ++stage});
    const unsigned roll = static_cast<unsigned>(rng() % 100);
    if (roll < 30) {
      s.ops.push_back({OpKind::Query, pick(rng), pick(rng)});
      continue;
    }
    const bool insert = live.empty() || (roll < 68 && live.size() < most);
    if (insert && live.size() < most) {
      EdgeKey e;
      do {
        e = EdgeKey(pick(rng), pick(rng));
      } while (e.a == e.b || slot.count(e) != 0);
      slot[e] = live.size();
      live.push_back(e);
      s.ops.push_back({OpKind::Insert, e.a, e.b});
    } else {
      const std::size_t at = std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng);
      const EdgeKey e = live[at];
      slot[live.back()] = at;
      live[at] = live.back();
      live.pop_back();
      slot.erase(e);
      s.ops.push_back({OpKind::Delete, e.a, e.b});
    }
  }
  return s;
}

void validate_stream(const UpdateStream& s) {
  std::unordered_set<EdgeKey, EdgeKeyHash> live;
  std::size_t index = 0;
  for (const Op& o : s.ops) {
    ++index;
    if (o.kind == OpKind::Stage) continue;
    if (o.u < 0 || o.v < 0 || o.u >= s.n || o.v >= s.n) {
      throw ParseError("op " + std::to_string(index) + ": vertex id out of range");
    }
    const EdgeKey e(o.u, o.v);
    if (o.kind == OpKind::Insert) {
      if (o.u == o.v) throw ParseError("op " + std::to_string(index) + ": self-loop insert");
      if (!live.insert(e).second) throw ParseError("op " + std::to_string(index) + ": insert of a live edge");
    } else if (o.kind == OpKind::Delete) {
      if (live.erase(e) == 0) throw ParseError("op " + std::to_string(index) + ": delete of a dead edge");
    }
  }
}

UpdateStream parse_stream(const std::string& text, const std::string& origin) {
  UpdateStream s;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::int64_t expected = 0;
  std::unordered_set<EdgeKey, EdgeKeyHash> live;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = tokens(line);
    if (t.empty()) continue;
    if (t[0][0] == '#') {
      if (t.size() == 3 && t[0] == "#" && t[1] == "stage") {
        s.ops.push_back({OpKind::Stage, 0, static_cast<VertexId>(to_int(t[2], origin, lineno))});
      }
      continue;
    }
    if (!header) {
      if (t.size() != 3) fail_at(origin, lineno, "expected header 'n ops seed'");
      const std::int64_t n = to_int(t[0], origin, lineno);
      if (n < 2 || n >= (1LL << 30)) fail_at(origin, lineno, "vertex count out of range");
      s.n = static_cast<int>(n);
      expected = to_int(t[1], origin, lineno);
      s.seed = static_cast<std::uint64_t>(to_int(t[2], origin, lineno));
      header = true;
      continue;
    }
    if (t.size() != 3 || t[0].size() != 1) fail_at(origin, lineno, "expected 'I|D|Q u v'");
    Op o;
    switch (t[0][0]) {
      case 'I':
        o.kind = OpKind::Insert;
        break;
      case 'D':
        o.kind = OpKind::Delete;
        break;
      case 'Q':
        o.kind = OpKind::Query;
        break;
      default:
        fail_at(origin, lineno, "unknown op '" + t[0] + "'");
    }
    const std::int64_t u = to_int(t[1], origin, lineno);
    const std::int64_t v = to_int(t[2], origin, lineno);
    if (u < 0 || v < 0 || u >= s.n || v >= s.n) fail_at(origin, lineno, "vertex id out of range");
    o.u = static_cast<VertexId>(u);
    o.v = static_cast<VertexId>(v);
    const EdgeKey e(o.u, o.v);
    if (o.kind == OpKind::Insert) {
      if (o.u == o.v) fail_at(origin, lineno, "self-loop insert");
      if (!live.insert(e).second) fail_at(origin, lineno, "insert of a live edge");
    } else if (o.kind == OpKind::Delete) {
      if (live.erase(e) == 0) fail_at(origin, lineno, "delete of a dead edge");
    }
    s.ops.push_back(o);
  }
  if (!header) fail_at(origin, lineno, "missing 'n ops seed' header");
  if (static_cast<std::int64_t>(s.op_count()) != expected) {
    fail_at(origin, lineno, "header declares " + std::to_string(expected) + " ops, found " +
                                std::to_string(s.op_count()));
  }
  return s;
}

UpdateStream load_stream(const std::string& path) { return parse_stream(read_file(path), path); }

std::string format_stream(const UpdateStream& s) {
  std::string out = std::to_string(s.n) + " " + std::to_string(s.op_count()) + " " + std::to_string(s.seed) + "\n";
  for (const Op& o : s.ops) {
    switch (o.kind) {
      case OpKind::Stage:
        out += "# stage " + std::to_string(o.v) + "\n";
        continue;
      case OpKind::Insert:
        out += 'I';
        break;
      case OpKind::Delete:
        out += 'D';
        break;
      case OpKind::Query:
        out += 'Q';
        break;
    }
    out += " " + std::to_string(o.u) + " " + std::to_string(o.v) + "\n";
  }
  return out;
}

void write_stream(const UpdateStream& s, const std::string& path) { write_file(path, format_stream(s)); }

const std::vector<std::string> kAlgorithms = {"cf-root", "cf-lca", "cf-blocked", "cf-blocked-batch", "hdt", "oracle"};

std::unique_ptr<DynamicConnectivity> make_algorithm(const std::string& name, int n) {
  if (name == "cf-root") return std::make_unique<CFConnectivity>(n, false);
  if (name == "cf-lca") return std::make_unique<CFConnectivity>(n, true);
  if (name == "cf-blocked") return std::make_unique<BlockedConnectivity>(n, false);
  if (name == "cf-blocked-batch") return std::make_unique<BlockedConnectivity>(n, true);
  if (name == "hdt") return std::make_unique<HdtConnectivity>(n);
  if (name == "oracle") return std::make_unique<EdgeSetOracle>(n);
  throw QueryError("unknown algorithm '" + name + "'");
}

namespace {

// Violations found by the structure's own auditor, empty when clean.
std::string audit_algorithm(DynamicConnectivity& a) {
  if (auto* cf = dynamic_cast<CFConnectivity*>(&a)) {
    AuditOptions opt;
    opt.tree_connectivity = cf->tracking();
    const AuditReport r = audit(cf->forest(), opt);
    return r.ok() ? "" : r.summary();
  }
  if (auto* b = dynamic_cast<BlockedConnectivity*>(&a)) {
    const AuditReport r = audit(b->forest());
    return r.ok() ? "" : r.summary();
  }
  if (auto* h = dynamic_cast<HdtConnectivity*>(&a)) {
    const auto v = h->audit();
    return v.empty() ? "" : v.front();
  }
  return "";
}

}  // namespace

RunReport run_stream(const std::string& algo, const UpdateStream& s, const RunOptions& opt) {
  RunReport rep;
  rep.algo = algo;
  auto a = make_algorithm(algo, s.n);
  std::unique_ptr<EdgeSetOracle> truth;
  if (opt.verify) truth = std::make_unique<EdgeSetOracle>(s.n);
  const bool batched = algo == "cf-blocked-batch";
  using Clock = std::chrono::steady_clock;

  std::uint64_t hash = kFnvOffset;
  int stage = 0;
  std::uint64_t n_ins = 0;
  std::uint64_t n_del = 0;
  std::uint64_t n_query = 0;
  double t_update = 0;
  double t_query = 0;
  std::vector<EdgeKey> pending;
  OpKind pending_kind = OpKind::Insert;
  std::size_t pending_first = 0;

  auto fail = [&](std::size_t index, const std::string& why) {
    rep.ok = false;
    rep.failed_op = static_cast<std::int64_t>(index);
    rep.failure = why;
  };
  auto flush = [&]() -> bool {
    if (pending.empty()) return true;
    const auto t0 = Clock::now();
    try {
      if (pending_kind == OpKind::Insert) {
        a->batch_insert(pending);
      } else {
        a->batch_erase(pending);
      }
    } catch (const std::exception& ex) {
      fail(pending_first, ex.what());
      return false;
    }
    t_update += std::chrono::duration<double>(Clock::now() - t0).count();
    pending.clear();
    return true;
  };
  auto row = [&](const std::string& phase, std::uint64_t ops, double seconds) {
    const Stats st = a->stats();
    ReportRow r;
    r.algo = algo;
    r.stage = stage;
    r.phase = phase;
    r.ops = ops;
    r.seconds = seconds;
    r.peak_bytes = st.peak_bytes;
    r.fetches = st.fetches;
    r.pushdowns = st.pushdowns;
    r.nontree_fraction = st.deletes == 0 ? 0.0 : static_cast<double>(st.nontree_deletes) / st.deletes;
    r.query_hash = hex64(hash);
    rep.rows.push_back(r);
  };
  auto close_stage = [&](std::size_t index) -> bool {
    if (!flush()) return false;
    if (n_ins + n_del > 0) {
      const char* phase = n_del == 0 ? "insert" : n_ins == 0 ? "delete" : "mixed";
      row(phase, n_ins + n_del, t_update);
    }
    if (n_query > 0) row("query", n_query, t_query);
    if (opt.audit) {
      const std::string why = audit_algorithm(*a);
      if (!why.empty()) {
        fail(index, "audit: " + why);
        return false;
      }
    }
    n_ins = n_del = n_query = 0;
    t_update = t_query = 0;
    return true;
  };

  for (std::size_t i = 0; i < s.ops.size() && rep.ok; ++i) {
    const Op& o = s.ops[i];
    if (o.kind == OpKind::Stage) {
      if (!close_stage(i)) break;
      stage = o.v;
      continue;
    }
    if (o.kind == OpKind::Query) {
      if (!flush()) break;
      const auto t0 = Clock::now();
      bool got = false;
      try {
        got = a->connected(o.u, o.v);
      } catch (const std::exception& ex) {
        fail(i, ex.what());
        break;
      }
      t_query += std::chrono::duration<double>(Clock::now() - t0).count();
      ++n_query;
      hash = fnv1a(hash, got ? 1 : 0);
      if (truth && truth->connected(o.u, o.v) != got) {
        fail(i, "query disagrees with the oracle");
        break;
      }
      continue;
    }
    const EdgeKey e(o.u, o.v);
    const bool ins = o.kind == OpKind::Insert;
    (ins ? n_ins : n_del) += 1;
    if (truth) {
      if (ins) {
        truth->insert(o.u, o.v);
      } else {
        truth->erase(o.u, o.v);
      }
    }
    if (batched) {
      if (!pending.empty() && pending_kind != o.kind && !flush()) break;
      if (pending.empty()) {
        pending_kind = o.kind;
        pending_first = i;
      }
      pending.push_back(e);
      continue;
    }
    const auto t0 = Clock::now();
    try {
      if (ins) {
        a->insert(o.u, o.v);
      } else {
        a->erase(o.u, o.v);
      }
    } catch (const std::exception& ex) {
      fail(i, ex.what());
      break;
    }
    t_update += std::chrono::duration<double>(Clock::now() - t0).count();
  }
  if (rep.ok) close_stage(s.ops.size());
  rep.query_hash = hex64(hash);
  rep.final_stats = a->stats();
  return rep;
}

const char* const kCsvHeader = "algo,stage,phase,ops,seconds,peak_bytes,fetches,pushdowns,nontree_fraction,query_hash";

bool ReportRow::operator==(const ReportRow& o) const {
  return algo == o.algo && stage == o.stage && phase == o.phase && ops == o.ops &&
         std::fabs(seconds - o.seconds) < 1e-9 && peak_bytes == o.peak_bytes && fetches == o.fetches &&
         pushdowns == o.pushdowns && std::fabs(nontree_fraction - o.nontree_fraction) < 1e-6 &&
         query_hash == o.query_hash;
}

std::string format_report_csv(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  char buf[512];
  for (const ReportRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%s,%llu,%.9f,%lld,%llu,%llu,%.6f,%s\n", r.algo.c_str(), r.stage,
                  r.phase.c_str(), static_cast<unsigned long long>(r.ops), r.seconds,
                  static_cast<long long>(r.peak_bytes), static_cast<unsigned long long>(r.fetches),
                  static_cast<unsigned long long>(r.pushdowns), r.nontree_fraction, r.query_hash.c_str());
    out += buf;
  }
  return out;
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
  write_file(path, format_report_csv(rows));
}

std::vector<ReportRow> parse_report_csv(const std::string& text) {
  std::vector<ReportRow> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != kCsvHeader) fail_at("<csv>", lineno, "unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 10) fail_at("<csv>", lineno, "expected 10 columns");
    try {
      ReportRow r;
      r.algo = f[0];
      r.stage = std::stoi(f[1]);
      r.phase = f[2];
      r.ops = std::stoull(f[3]);
      r.seconds = std::stod(f[4]);
      r.peak_bytes = std::stoll(f[5]);
      r.fetches = std::stoull(f[6]);
      r.pushdowns = std::stoull(f[7]);
      r.nontree_fraction = std::stod(f[8]);
      r.query_hash = f[9];
      rows.push_back(r);
    } catch (const std::exception&) {
      fail_at("<csv>", lineno, "malformed number");
    }
  }
  return rows;
}

std::vector<ReportRow> read_report_csv(const std::string& path) { return parse_report_csv(read_file(path)); }

}  // namespace dyncon
