#include <algorithm>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dyncon/bench.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kDiverged = 1;
constexpr int kUsage = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void emit(const std::vector<dyncon::ReportRow>& rows, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << dyncon::format_report_csv(rows);
  } else {
    dyncon::write_report_csv(rows, path);
  }
}

int report_failure(const dyncon::RunReport& r) {
  std::cerr << r.algo << ": failed at op " << r.failed_op << ": " << r.failure << "\n";
  return kDiverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic connectivity benchmark harness"};
  app.require_subcommand(1);

  std::string graph_path;
  std::string out_path;
  int stages = 10;
  std::uint64_t seed = 1;
  auto* gen = app.add_subcommand("gen", "Generate a staged update stream from a graph file");
  gen->add_option("--graph", graph_path, "Graph file ('n m' header, then 'u v' lines)")->required();
  gen->add_option("--stages", stages, "Insert stages (the same number of delete stages follows)")
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", out_path, "Output stream file")->required();

  std::string grid;
  std::string random_spec;
  auto* graph = app.add_subcommand("graph", "Write a synthetic graph file");
  auto* grid_opt = graph->add_option("--grid", grid, "Grid dimensions, e.g. 200x200");
  auto* random_opt = graph->add_option("--random", random_spec, "Random graph 'n,m'");
  grid_opt->excludes(random_opt);
  graph->add_option("--seed", seed, "Random seed");
  graph->add_option("--out", out_path, "Output graph file")->required();

  std::string algo;
  std::string stream_path;
  std::string report_path;
  bool audit = false;
  bool verify = false;
  auto* run = app.add_subcommand("run", "Run one algorithm over a stream");
  run->add_option("--algo", algo, "cf-root, cf-lca, cf-blocked, cf-blocked-batch, hdt or oracle")
      ->required()
      ->check(CLI::IsMember(dyncon::kAlgorithms));
  run->add_option("--stream", stream_path, "Stream file")->required();
  run->add_flag("--audit", audit, "Audit the structure at every stage boundary");
  run->add_flag("--verify", verify, "Check every query against the oracle");
  run->add_option("--report", report_path, "CSV report path ('-' for stdout)");

  std::string algos = "cf-root,cf-lca,cf-blocked,cf-blocked-batch,hdt";
  auto* compare = app.add_subcommand("compare", "Run several algorithms and compare query hashes");
  compare->add_option("--stream", stream_path, "Stream file")->required();
  compare->add_option("--algos", algos, "Comma-separated algorithm list");
  compare->add_flag("--audit", audit, "Audit the structure at every stage boundary");
  compare->add_flag("--verify", verify, "Check every query against the oracle");
  compare->add_option("--report", report_path, "CSV report path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (gen->parsed()) {
      const dyncon::Graph g = dyncon::load_graph(graph_path);
      dyncon::write_stream(dyncon::gen_stream(g, stages, seed), out_path);
      return kOk;
    }
    if (graph->parsed()) {
      dyncon::Graph g;
      if (!grid.empty()) {
        const auto x = grid.find('x');
        if (x == std::string::npos) throw dyncon::ParseError("--grid expects RxC");
        g = dyncon::grid_graph(std::stoi(grid.substr(0, x)), std::stoi(grid.substr(x + 1)));
      } else if (!random_spec.empty()) {
        const auto parts = split_list(random_spec);
        if (parts.size() != 2) throw dyncon::ParseError("--random expects n,m");
        g = dyncon::random_graph(std::stoi(parts[0]), std::stoll(parts[1]), seed);
      } else {
        throw dyncon::ParseError("graph needs --grid or --random");
      }
      dyncon::write_graph(g, out_path);
      return kOk;
    }
    const dyncon::UpdateStream s = dyncon::load_stream(stream_path);
    const dyncon::RunOptions opt{audit, verify};
    if (run->parsed()) {
      const dyncon::RunReport r = dyncon::run_stream(algo, s, opt);
      emit(r.rows, report_path);
      return r.ok ? kOk : report_failure(r);
    }
    std::vector<dyncon::ReportRow> rows;
    std::string first_hash;
    int status = kOk;
    for (const std::string& a : split_list(algos)) {
      if (std::find(dyncon::kAlgorithms.begin(), dyncon::kAlgorithms.end(), a) == dyncon::kAlgorithms.end()) {
        throw dyncon::ParseError("unknown algorithm '" + a + "'");
      }
      const dyncon::RunReport r = dyncon::run_stream(a, s, opt);
      rows.insert(rows.end(), r.rows.begin(), r.rows.end());
      if (!r.ok) {
        status = report_failure(r);
        continue;
      }
      if (first_hash.empty()) {
        first_hash = r.query_hash;
      } else if (r.query_hash != first_hash) {
        std::cerr << a << ": query hash " << r.query_hash << " differs from " << first_hash << "\n";
        status = kDiverged;
      }
    }
    emit(rows, report_path);
    return status;
  } catch (const dyncon::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiverged;
  }
}
