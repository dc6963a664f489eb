#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyncon/connectivity.hpp"
#include "dyncon/types.hpp"

namespace dyncon {

// Malformed input file; the message carries the path and line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Graph {
  int n = 0;
  std::vector<EdgeKey> edges;
};

Graph load_graph(const std::string& path);
void write_graph(const Graph& g, const std::string& path);
Graph parse_graph(const std::string& text, const std::string& origin = "<memory>");
std::string format_graph(const Graph& g);

Graph grid_graph(int rows, int cols);
Graph random_graph(int n, std::int64_t m, std::uint64_t seed);

enum class OpKind : std::uint8_t { Insert, Delete, Query, Stage };

struct Op {
  OpKind kind = OpKind::Query;
  VertexId u = 0;
  VertexId v = 0;  // stage number for Stage markers
};

struct UpdateStream {
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<Op> ops;  // stage markers included

  [[nodiscard]] std::size_t op_count() const;
};

// Staged stream: inserts in `stages` stages from one permutation, then deletes
// in `stages` stages from a fresh permutation; each stage ends with queries.
UpdateStream gen_stream(const Graph& g, int stages, std::uint64_t seed);
// Mixed random inserts, deletes and queries with a stage marker every stage_len ops.
UpdateStream random_stream(int n, std::size_t ops, std::uint64_t seed, std::size_t stage_len = 1000);

UpdateStream load_stream(const std::string& path);
void write_stream(const UpdateStream& s, const std::string& path);
UpdateStream parse_stream(const std::string& text, const std::string& origin = "<memory>");
std::string format_stream(const UpdateStream& s);
// Throws ParseError at the first delete of a dead edge or insert of a live one.
void validate_stream(const UpdateStream& s);

struct ReportRow {
  std::string algo;
  int stage = 0;
  std::string phase;  // insert, delete, query or mixed
  std::uint64_t ops = 0;
  double seconds = 0;
  std::int64_t peak_bytes = 0;
  std::uint64_t fetches = 0;
  std::uint64_t pushdowns = 0;
  double nontree_fraction = 0;
  std::string query_hash;

  bool operator==(const ReportRow& o) const;
};

struct RunOptions {
  bool audit = false;
  bool verify = false;
};

struct RunReport {
  std::string algo;
  std::vector<ReportRow> rows;
  bool ok = true;
  std::int64_t failed_op = -1;  // index into the stream's ops
  std::string failure;
  std::string query_hash;
  Stats final_stats;
};

extern const std::vector<std::string> kAlgorithms;
std::unique_ptr<DynamicConnectivity> make_algorithm(const std::string& name, int n);

RunReport run_stream(const std::string& algo, const UpdateStream& s, const RunOptions& opt = {});

extern const char* const kCsvHeader;
void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path);
std::string format_report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(const std::string& text);
std::vector<ReportRow> read_report_csv(const std::string& path);

}  // namespace dyncon
