// semu command line: run scenarios, print the cost comparison table, fuzz
// seeded schedule sweeps, and re-check persisted traces.
//
// Exit codes: 0 all enabled checks passed, 1 a check failed, 2 usage or
// parse error.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "semu/driver.hpp"

namespace {

using namespace semu;

int cmd_run(const std::string& path, const std::string& out_flag) {
  Scenario sc;
  try {
    sc = load_scenario_file(path);
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 2;
  }
  RunArtifacts art = run_scenario(sc);
  std::string dir = output_dir(out_flag);
  write_artifacts(art, dir, sc.name);
  std::cout << "trace: " << dir << "/" << sc.name << ".trace ("
            << art.trace.events.size() << " events"
            << (art.trace.header.truncated ? ", truncated" : "") << ")\n";
  std::cout << art.cost.to_text();
  for (const NamedVerdict& v : art.verdicts) {
    std::cout << (v.verdict.pass ? "PASS " : "FAIL ") << v.check;
    if (!v.verdict.pass) std::cout << ": " << v.verdict.detail;
    std::cout << "\n";
  }
  return art.pass ? 0 : 1;
}

std::vector<GridPoint> parse_grid(const std::string& text) {
  std::vector<GridPoint> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    GridPoint g;
    if (std::sscanf(part.c_str(), "%d:%d:%d", &g.n, &g.f, &g.nu) != 3)
      throw CLI::ValidationError("grid", "expected N:f:nu[,N:f:nu...]");
    out.push_back(g);
  }
  if (out.empty()) throw CLI::ValidationError("grid", "empty grid");
  return out;
}

int cmd_table(const std::string& grid_text, const std::vector<std::string>& trace_paths,
              bool csv) {
  std::vector<GridPoint> grid;
  try {
    grid = parse_grid(grid_text);
    for (const GridPoint& g : grid) SystemParams::make(g.n, g.f, g.nu, 8);
  } catch (const std::exception& e) {
    std::cerr << "invalid grid: " << e.what() << "\n";
    return 2;
  }
  std::vector<CostReport> measured;
  for (const std::string& p : trace_paths) {
    try {
      measured.push_back(make_cost_report(Trace::load_file(p)));
    } catch (const std::exception& e) {
      std::cerr << "cannot measure " << p << ": " << e.what() << "\n";
      return 2;
    }
  }
  std::cout << format_cost_table(grid, measured, csv);
  return 0;
}

int cmd_fuzz(const std::string& algs, const std::string& advs, const std::string& grid_text,
             int seeds, std::uint64_t seed_base, const std::string& read_mode, int cap,
             bool client_crashes, bool no_server_crashes, const std::string& out_flag) {
  FuzzSpec spec;
  try {
    std::istringstream in(algs);
    std::string part;
    while (std::getline(in, part, ',')) spec.algorithms.push_back(algorithm_from_string(part));
    if (advs == "all") {
      for (const std::string& name : adversary_strategies())
        spec.adversaries.push_back(delivery_policy_from_string(name));
    } else {
      std::istringstream ain(advs);
      while (std::getline(ain, part, ','))
        spec.adversaries.push_back(delivery_policy_from_string(part));
    }
    std::vector<GridPoint> grid = parse_grid(grid_text);
    if (grid.size() != 1) throw std::invalid_argument("fuzz takes a single grid point");
    spec.grid = grid[0];
    spec.read_mode = read_mode_from_string(read_mode);
  } catch (const std::exception& e) {
    std::cerr << "invalid fuzz arguments: " << e.what() << "\n";
    return 2;
  }
  if (spec.algorithms.empty()) {
    std::cerr << "no algorithms selected\n";
    return 2;
  }
  spec.seeds = seeds;
  spec.seed_base = seed_base;
  spec.concurrency_cap = cap;
  spec.client_crashes = client_crashes;
  spec.server_crashes = !no_server_crashes;
  spec.out_dir = output_dir(out_flag);

  FuzzSummary sum = fuzz(spec);
  std::cout << "runs: " << sum.runs << "\n"
            << "violations: " << sum.violations << "\n"
            << "read aborts: " << sum.aborts << "\n"
            << "incomplete reads: " << sum.incomplete_reads << "\n"
            << "completed operations: " << sum.completed_ops << "\n";
  if (spec.read_mode == ReadMode::fw)
    std::cout << "max FW iterations: " << sum.max_fw_iterations << "\n";
  for (const std::string& f : sum.failures) std::cout << "VIOLATION " << f << "\n";
  return sum.violations == 0 ? 0 : 1;
}

int cmd_check(const std::string& path) {
  Trace trace;
  try {
    trace = Trace::load_file(path);
  } catch (const std::exception& e) {
    std::cerr << "cannot load trace: " << e.what() << "\n";
    return 2;
  }
  bool pass = true;
  for (const NamedVerdict& v : check_trace(trace)) {
    std::cout << (v.verdict.pass ? "PASS " : "FAIL ") << v.check;
    if (!v.verdict.pass) std::cout << ": " << v.verdict.detail;
    std::cout << "\n";
    pass = pass && v.verdict.pass;
  }
  History h = extract_history(trace);
  if (h.incomplete > 0)
    std::cout << "note: " << h.incomplete << " incomplete operation(s) excluded\n";
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semu: storage-efficient atomic shared-memory emulation harness"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_flag;
  CLI::App* run = app.add_subcommand("run", "execute a scenario file");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("-o,--out", out_flag, "output directory (default $SEMU_OUT or semu-out)");

  std::string grid_text = "7:1:2";
  std::vector<std::string> trace_paths;
  bool csv = false;
  CLI::App* table = app.add_subcommand("table", "print the cost comparison table");
  table->add_option("--grid", grid_text, "grid points N:f:nu[,N:f:nu...]");
  table->add_option("--trace", trace_paths, "measured trace file(s) to append");
  table->add_flag("--csv", csv, "CSV output");

  std::string algs = "alg1,alg2,alg2a,abd";
  std::string advs = "all";
  std::string fuzz_grid = "7:1:2";
  std::string read_mode = "abort";
  int seeds = 100;
  std::uint64_t seed_base = 1;
  int cap = -1;
  bool client_crashes = false;
  bool no_server_crashes = false;
  std::string fuzz_out;
  CLI::App* fz = app.add_subcommand("fuzz", "seeded schedule sweeps with checking");
  fz->add_option("--algorithms", algs, "comma-separated algorithms");
  fz->add_option("--adversaries", advs, "comma-separated adversaries or 'all'");
  fz->add_option("--grid", fuzz_grid, "single grid point N:f:nu");
  fz->add_option("--seeds", seeds, "seeds per (algorithm, adversary)");
  fz->add_option("--seed-base", seed_base, "first seed");
  fz->add_option("--read-mode", read_mode, "abort or fw");
  fz->add_option("--cap", cap, "write concurrency cap (-1 none, -2 nu-1)");
  fz->add_flag("--client-crashes", client_crashes, "also crash clients");
  fz->add_flag("--no-server-crashes", no_server_crashes, "disable server crashes");
  fz->add_option("-o,--out", fuzz_out, "directory for failing traces");

  std::string trace_path;
  CLI::App* check = app.add_subcommand("check", "re-check a persisted trace");
  check->add_option("trace", trace_path, "trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(scenario_path, out_flag);
    if (table->parsed()) return cmd_table(grid_text, trace_paths, csv);
    if (fz->parsed())
      return cmd_fuzz(algs, advs, fuzz_grid, seeds, seed_base, read_mode, cap, client_crashes,
                      no_server_crashes, fuzz_out);
    if (check->parsed()) return cmd_check(trace_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
