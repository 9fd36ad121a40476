// Python module pdts._core. Structured values cross the boundary as JSON text;
// pdts/__init__.py decodes them.
#include <fstream>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pdts/harness.hpp"

namespace py = pybind11;
using namespace pdts;

namespace {

Scenario scenario_arg(const std::string& s) {
  if (!s.empty() && s.front() == '{') return scenario_from_json(json::parse(s));
  return load_scenario(s);
}

Schedule schedule_arg(const std::string& s, const AlgorithmVariant& algorithm, const SimConfig& config) {
  if (!s.empty() && (s.front() == '{' || s.front() == '[')) {
    const json j = json::parse(s);
    if (j.is_array()) {
      std::vector<Decision> script;
      for (const auto& d : j) script.push_back(decision_from_json(d));
      return Schedule::scripted(std::move(script), TailPolicy::Fifo);
    }
    return schedule_from_json(j);
  }
  return load_schedule(s, algorithm, config);
}

SimConfig config_arg(const std::string& s) { return s.empty() ? SimConfig{} : sim_config_from_json(json::parse(s)); }

ExecutionTrace trace_arg(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return read_jsonl(in);
}

/// Returns (trace JSON lines, run context JSON).
std::pair<std::string, std::string> py_run(const std::string& scenario, const std::string& algorithm,
                                           const std::string& schedule, const std::string& config) {
  const Scenario sc = scenario_arg(scenario);
  const AlgorithmVariant v = AlgorithmVariant::parse(algorithm);
  const SimConfig cfg = config_arg(config);
  const Schedule sched = schedule_arg(schedule, v, cfg);
  ExecutionTrace t;
  {
    py::gil_scoped_release release;
    t = run(cfg, v, sc, sched);
  }
  const RunContext ctx{cfg, v, sc, schedule_from_json(t.schedule)};
  return {to_jsonl(t), to_json(ctx).dump()};
}

std::string py_check(const std::string& trace_jsonl, const std::string& property, const std::string& context, int s) {
  const Property p = property_from_cli(property);
  const ExecutionTrace t = trace_arg(trace_jsonl);
  std::optional<RunContext> ctx;
  if (!context.empty()) ctx = run_context_from_json(json::parse(context));
  auto need = [&]() -> const RunContext& {
    if (!ctx) throw ConfigError(property + " needs the run context");
    return *ctx;
  };
  py::gil_scoped_release release;
  Verdict v;
  switch (p) {
    case Property::Serializability:
      v = check_serializability(derive_history(t, ctx ? ctx->scenario.placement.initial_values() : std::map<ItemId, Word>{}));
      break;
    case Property::WeakProgress: v = check_weak_progress({t}); break;
    case Property::WeakIR: v = check_weak_ir(t); break;
    case Property::StrongIR: v = check_strong_ir(need()); break;
    case Property::DAP:
    case Property::DDAP: {
      const RunContext& c = need();
      const Simulator probe(c.config, c.algorithm, c.scenario);
      v = p == Property::DAP ? check_dap(t, probe.scenario()) : check_ddap(t, probe.scenario());
      break;
    }
    case Property::FastDecision: v = check_fast_decision(t); break;
    case Property::SeamlessFT: v = check_seamless_ft(need(), s); break;
    case Property::ReadDelay: v = check_read_delay(t); break;
  }
  return to_json(v).dump();
}

std::string py_check_history(const std::string& history, const std::string& method) {
  const json j = json::parse(history);
  CommittedHistory h;
  if (j.contains("initial")) {
    for (const auto& [k, v] : j["initial"].items()) h.initial[k] = v;
  }
  for (const auto& t : j.at("txns")) {
    CommittedTxn c;
    c.txn = t.at("txn");
    for (const auto& op : t.at("ops")) {
      const std::string kind = op.at("kind");
      if (kind != "R" && kind != "W") throw ConfigError("op kind must be R or W");
      c.ops.push_back({kind == "R" ? OpKind::Read : OpKind::Write, op.at("item"), op.at("value")});
    }
    h.txns.push_back(std::move(c));
  }
  if (method == "brute-force") return to_json(serializability_brute_force(h)).dump();
  if (method == "graph") return to_json(serializability_graph(h)).dump();
  if (method == "auto") return to_json(check_serializability(h)).dump();
  throw ConfigError("method must be auto, brute-force or graph");
}

std::string py_history(const std::string& trace_jsonl, const std::string& initial) {
  std::map<ItemId, Word> init;
  if (!initial.empty()) {
    for (const auto& [k, v] : json::parse(initial).items()) init[k] = v;
  }
  return to_json(derive_history(trace_arg(trace_jsonl), init)).dump();
}

std::string py_explore(const std::string& scenario, const std::string& algorithm, const std::string& mode,
                       std::optional<std::size_t> max, std::uint64_t seed, std::size_t preemption_bound) {
  ExploreOptions opt;
  if (mode == "exhaustive") {
    opt.mode = ExploreOptions::Mode::Exhaustive;
    if (max) opt.max_schedules = *max;
  } else if (mode == "random") {
    opt.mode = ExploreOptions::Mode::Random;
    if (max) opt.random_runs = *max;
  } else {
    throw ConfigError("unknown mode '" + mode + "'");
  }
  opt.seed = seed;
  opt.preemption_bound = preemption_bound;
  const Scenario sc = scenario_arg(scenario);
  const AlgorithmVariant v = AlgorithmVariant::parse(algorithm);
  py::gil_scoped_release release;
  return to_json(explore({}, sc, v, opt)).dump();
}

std::pair<std::string, std::string> py_matrix() {
  MatrixReport r;
  {
    py::gil_scoped_release release;
    r = build_matrix();
  }
  return {r.markdown(), r.to_json().dump()};
}

std::string py_scenario(const std::string& name) { return scenario_to_json(load_scenario(name)).dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulator and property checker for parallel distributed transactional systems";

  static py::exception<Error> error(m, "PdtsError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = e.code();
      PyErr_SetObject(error.ptr(), exc.ptr());
    } catch (const json::exception& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = "ConfigError";
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("run", &py_run, py::arg("scenario"), py::arg("algorithm"), py::arg("schedule"), py::arg("config") = "");
  m.def("check", &py_check, py::arg("trace"), py::arg("property"), py::arg("context") = "", py::arg("s") = 1);
  m.def("check_history", &py_check_history, py::arg("history"), py::arg("method") = "auto");
  m.def("history", &py_history, py::arg("trace"), py::arg("initial") = "");
  m.def("explore", &py_explore, py::arg("scenario"), py::arg("algorithm"), py::arg("mode"),
        py::arg("max") = std::nullopt, py::arg("seed") = 1, py::arg("preemption_bound") = 0);
  m.def("matrix", &py_matrix);
  m.def("scenario", &py_scenario, py::arg("name"));
  m.def("scenario_names", &builtin_scenario_names);
  m.def("variants", [] {
    std::vector<std::string> out;
    for (const auto& v : all_variants()) out.push_back(v.cli_name());
    return out;
  });
}
