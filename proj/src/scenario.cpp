#include "semu/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace semu {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      throw ScenarioError("unknown key \"" + it.key() + "\" in " + where);
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ScenarioError("missing key \"" + key + "\" in " + where);
  return *it;
}

template <typename T>
T get_as(const json& v, const std::string& what) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ScenarioError("bad value for " + what);
  }
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("scenario must be a JSON object");
  reject_unknown(doc,
                 {"name", "params", "algorithm", "read_mode", "finalize_markers", "schedule",
                  "workload", "step_limit", "checks"},
                 "scenario");

  Scenario sc;
  if (doc.contains("name")) sc.name = get_as<std::string>(doc["name"], "name");

  const json& params = require(doc, "params", "scenario");
  reject_unknown(params, {"n", "f", "nu", "value_size_bits"}, "params");
  int n = get_as<int>(require(params, "n", "params"), "params.n");
  int f = get_as<int>(require(params, "f", "params"), "params.f");
  int nu = get_as<int>(require(params, "nu", "params"), "params.nu");
  int bits = params.contains("value_size_bits")
                 ? get_as<int>(params["value_size_bits"], "params.value_size_bits")
                 : 64;

  std::string alg = get_as<std::string>(require(doc, "algorithm", "scenario"), "algorithm");
  try {
    sc.cfg.algorithm = algorithm_from_string(alg);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  try {
    if (sc.cfg.algorithm == Algorithm::abd) {
      sc.cfg.params = SystemParams::make_abd(f, bits);
      if (n != sc.cfg.params.n_servers)
        throw ScenarioError("abd runs on exactly 2f+1 servers; set n accordingly");
    } else {
      sc.cfg.params = SystemParams::make(n, f, nu, bits);
    }
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }

  if (doc.contains("read_mode")) {
    try {
      sc.cfg.read_mode =
          read_mode_from_string(get_as<std::string>(doc["read_mode"], "read_mode"));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(e.what());
    }
  }
  if (doc.contains("finalize_markers"))
    sc.cfg.finalize_markers = get_as<bool>(doc["finalize_markers"], "finalize_markers");
  if (doc.contains("step_limit"))
    sc.cfg.step_limit = get_as<std::uint64_t>(doc["step_limit"], "step_limit");

  const json& sched = require(doc, "schedule", "scenario");
  reject_unknown(sched, {"seed", "policy", "fairness", "fairness_bound", "crash_plan"},
                 "schedule");
  sc.cfg.schedule.seed = get_as<std::uint64_t>(require(sched, "seed", "schedule"), "seed");
  if (sched.contains("policy")) {
    try {
      sc.cfg.schedule.policy =
          delivery_policy_from_string(get_as<std::string>(sched["policy"], "policy"));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(e.what());
    }
  }
  if (sched.contains("fairness"))
    sc.cfg.schedule.fairness = get_as<bool>(sched["fairness"], "fairness");
  if (sched.contains("fairness_bound"))
    sc.cfg.schedule.fairness_bound =
        get_as<std::uint64_t>(sched["fairness_bound"], "fairness_bound");
  if (sched.contains("crash_plan")) {
    if (!sched["crash_plan"].is_array()) throw ScenarioError("crash_plan must be an array");
    for (const json& c : sched["crash_plan"]) {
      reject_unknown(c, {"node", "at_event"}, "crash_plan entry");
      CrashEvent ev;
      try {
        ev.node = NodeId::parse(get_as<std::string>(require(c, "node", "crash_plan"), "node"));
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
      }
      ev.at_event = get_as<std::uint64_t>(require(c, "at_event", "crash_plan"), "at_event");
      sc.cfg.schedule.crash_plan.push_back(ev);
    }
  }

  const json& work = require(doc, "workload", "scenario");
  reject_unknown(work,
                 {"writers", "readers", "writes_per_writer", "reads_per_reader",
                  "write_concurrency_cap"},
                 "workload");
  sc.cfg.workload.writers = get_as<int>(require(work, "writers", "workload"), "writers");
  sc.cfg.workload.readers = get_as<int>(require(work, "readers", "workload"), "readers");
  if (work.contains("writes_per_writer"))
    sc.cfg.workload.writes_per_writer = get_as<int>(work["writes_per_writer"], "writes_per_writer");
  if (work.contains("reads_per_reader"))
    sc.cfg.workload.reads_per_reader = get_as<int>(work["reads_per_reader"], "reads_per_reader");
  if (work.contains("write_concurrency_cap"))
    sc.cfg.workload.write_concurrency_cap =
        get_as<int>(work["write_concurrency_cap"], "write_concurrency_cap");

  if (doc.contains("checks")) {
    const json& checks = doc["checks"];
    reject_unknown(checks, {"atomicity", "liveness", "cost_regression"}, "checks");
    if (checks.contains("atomicity"))
      sc.checks.atomicity = get_as<bool>(checks["atomicity"], "checks.atomicity");
    if (checks.contains("liveness"))
      sc.checks.liveness = get_as<bool>(checks["liveness"], "checks.liveness");
    if (checks.contains("cost_regression"))
      sc.checks.cost_regression = get_as<bool>(checks["cost_regression"], "checks.cost_regression");
  }

  try {
    sc.cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string canonical_scenario_example() {
  return R"({
  "name": "alg1_basic",
  "params": {"n": 7, "f": 1, "nu": 2, "value_size_bits": 48},
  "algorithm": "alg1",
  "read_mode": "abort",
  "schedule": {
    "seed": 42,
    "policy": "random",
    "fairness": true,
    "crash_plan": [{"node": "s7", "at_event": 40}]
  },
  "workload": {
    "writers": 1,
    "readers": 2,
    "writes_per_writer": 3,
    "reads_per_reader": 2,
    "write_concurrency_cap": 1
  },
  "step_limit": 1000000,
  "checks": {"atomicity": true, "liveness": true, "cost_regression": false}
}
)";
}

}  // namespace semu
