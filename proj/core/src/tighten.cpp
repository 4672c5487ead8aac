#include "ots/tighten.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ots/topo.hpp"

namespace ots {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::string_view to_string(Propagation p) {
  return p == Propagation::kSequential ? "sequential" : "batch";
}

TightenConfig TightenConfig::tbt(int k) {
  TightenConfig cfg;
  cfg.mode = Tbt{k};
  return cfg;
}

TightenConfig TightenConfig::sbt(double t_ms) {
  TightenConfig cfg;
  cfg.mode = Sbt{t_ms};
  return cfg;
}

std::string TightenConfig::mode_name() const {
  if (is_tbt()) return "tbt-" + std::to_string(std::get<Tbt>(mode).k);
  const double t = std::get<Sbt>(mode).t_ms;
  const long long rounded = std::llround(t);
  if (std::abs(t - static_cast<double>(rounded)) < 1e-9)
    return "sbt-" + std::to_string(rounded);
  return "sbt-" + std::to_string(t);
}

void TightenConfig::validate() const {
  if (is_tbt()) {
    if (std::get<Tbt>(mode).k < 0)
      throw ValidationError("TBT closeness level k must be >= 0");
  } else if (!(std::get<Sbt>(mode).t_ms > 0)) {
    throw ValidationError("SBT per-problem budget t_ms must be positive");
  }
  if (!(per_problem_time_limit > 0))
    throw ValidationError("per-problem time limit must be positive");
  if (!(heuristic_budget > 0))
    throw ValidationError("heuristic budget must be positive");
  if (improvement_epsilon < 0)
    throw ValidationError("improvement epsilon must be >= 0");
  if (passes < 1) throw ValidationError("passes must be >= 1");
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
}

Bounds initial_bounds(const Network& net) {
  double total_ratio = 0.0;
  for (const Line& l : net.lines())
    total_ratio += std::max(std::abs(l.f_min), l.f_max) / l.susceptance;
  Bounds bounds;
  for (const Line& l : net.lines()) {
    const double own = std::max(std::abs(l.f_min), l.f_max) / l.susceptance;
    const double m_hi = l.susceptance * (total_ratio - own);
    bounds.set(l.id, {l.f_min, l.f_max, -m_hi, m_hi});
  }
  return bounds;
}

CostCap upper_bound_cost(const Network& net, const Instance& inst,
                         double budget_seconds) {
  if (!(budget_seconds > 0))
    throw ValidationError("heuristic budget must be positive");
  if (net.buses().empty()) throw HeuristicError("empty network");

  milp::ModelSpec model =
      build_ots(net, inst, initial_bounds(net), RelaxationSpec::all_binary(net),
                CostCap{});
  // Best incumbent within the budget; trivial models just solve outright.
  milp::SolveControls controls;
  controls.time_limit = budget_seconds;
  controls.rel_gap = 1e-4;
  controls.threads = 1;
  const milp::SolveOutcome outcome = milp::solve(model, controls);
  if (outcome.has_primal()) return {outcome.objective};

  double total_demand = 0.0, max_cost = 0.0;
  for (size_t i = 0; i < net.buses().size(); ++i) {
    total_demand += inst.demand[i];
    max_cost = std::max(max_cost, net.buses()[i].cost);
  }
  return {total_demand * max_cost};
}

namespace {

struct SubproblemPlan {
  BoundTarget target;
  milp::Sense sense;
};

constexpr SubproblemPlan kSubproblemOrder[4] = {
    {BoundTarget::kFlow, milp::Sense::kMinimize},
    {BoundTarget::kFlow, milp::Sense::kMaximize},
    {BoundTarget::kDummy, milp::Sense::kMinimize},
    {BoundTarget::kDummy, milp::Sense::kMaximize},
};

// Clamp to the conservative side: tightened intervals always keep zero, so
// x = 0 (f = 0) and x = 1 (ftil = f) stay representable.
bool apply_candidate(LineBounds& lb, const SubproblemPlan& plan,
                     double candidate, double epsilon) {
  double* slot = nullptr;
  double clamped = candidate;
  double improvement = 0.0;
  if (plan.target == BoundTarget::kFlow) {
    if (plan.sense == milp::Sense::kMinimize) {
      clamped = std::min(candidate, 0.0);
      slot = &lb.f_lo;
      improvement = clamped - lb.f_lo;
    } else {
      clamped = std::max(candidate, 0.0);
      slot = &lb.f_hi;
      improvement = lb.f_hi - clamped;
    }
  } else {
    if (plan.sense == milp::Sense::kMinimize) {
      clamped = std::min(candidate, 0.0);
      slot = &lb.m_lo;
      improvement = clamped - lb.m_lo;
    } else {
      clamped = std::max(candidate, 0.0);
      slot = &lb.m_hi;
      improvement = lb.m_hi - clamped;
    }
  }
  if (improvement < epsilon) return false;
  *slot = clamped;
  return true;
}

}  // namespace

LineTightenLog tighten_line(const TightenState& state, int line_id,
                            const RelaxationSpec& relax,
                            const TightenLimits& limits) {
  LineTightenLog log;
  log.line = line_id;

  std::optional<int> fixed_status;
  if (auto it = state.fixed->find(line_id); it != state.fixed->end())
    fixed_status = it->second;

  LineBounds lb = state.bounds->at(line_id);
  milp::SolveControls controls;
  controls.time_limit = limits.time_limit;
  controls.rel_gap = 0.0;  // bound candidates must be true optima
  controls.threads = 1;

  for (const SubproblemPlan& plan : kSubproblemOrder) {
    const int side = plan.target == BoundTarget::kFlow ? 1 : 0;
    SubproblemResult result{plan.target, plan.sense,
                            milp::SolveStatus::kNoSolutionAtLimit,
                            std::nullopt,  std::nullopt,
                            0.0,           false,
                            ""};
    if (fixed_status && *fixed_status != side) {
      result.note = "skipped: line fixed to " + std::to_string(*fixed_status);
      log.subproblems.push_back(std::move(result));
      continue;
    }
    milp::ModelSpec model;
    try {
      model = build_bounding(*state.net, *state.inst, *state.bounds, line_id,
                             plan.target, plan.sense, relax,
                             CostCap{state.cap});
    } catch (const Error& e) {
      throw BackendError("line " + std::to_string(line_id) +
                         " bounding build failed: " + e.what());
    }
    milp::SolveOutcome outcome;
    try {
      outcome = milp::solve(model, controls);
    } catch (const BackendError& e) {
      // An inconclusive subproblem forfeits tightening for this bound but
      // cannot invalidate anything; record it and move on.
      result.note = std::string("backend inconclusive: ") + e.what();
      log.subproblems.push_back(std::move(result));
      continue;
    }
    result.status = outcome.status;
    result.runtime = outcome.runtime;
    if (outcome.has_primal()) result.objective = outcome.objective;
    if (std::isfinite(outcome.dual_bound)) result.dual_bound = outcome.dual_bound;

    switch (outcome.status) {
      case milp::SolveStatus::kOptimal:
        result.applied = apply_candidate(lb, plan, outcome.objective,
                                         limits.improvement_epsilon);
        if (!result.applied) result.note = "no-improvement";
        break;
      case milp::SolveStatus::kFeasibleAtLimit:
      case milp::SolveStatus::kNoSolutionAtLimit:
        // Only the dual bound is valid; the incumbent side would cut.
        if (result.dual_bound) {
          result.applied = apply_candidate(lb, plan, *result.dual_bound,
                                           limits.improvement_epsilon);
          if (!result.applied) result.note = "no-improvement";
        } else {
          result.note = "no usable bound at limit";
        }
        break;
      case milp::SolveStatus::kInfeasible: {
        const int forced = 1 - side;
        if (!fixed_status) {
          fixed_status = forced;
          log.fixed = forced;
          (*state.fixed)[line_id] = forced;
          result.note = "infeasible: fixing x to " + std::to_string(forced);
        } else if (*fixed_status == forced) {
          result.note = "infeasible (already fixed)";
        } else {
          result.note = "both sides infeasible under the cost cap";
        }
        break;
      }
      case milp::SolveStatus::kUnbounded:
        result.note = "unbounded; no update";
        break;
    }
    log.subproblems.push_back(std::move(result));
  }
  state.bounds->set(line_id, lb);
  return log;
}

namespace {

std::vector<int> line_ids_ascending(const Network& net) {
  std::vector<int> ids;
  ids.reserve(net.lines().size());
  for (const Line& l : net.lines()) ids.push_back(l.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

TightenReport run_tightening(const Network& net, const Instance& inst,
                             const TightenConfig& cfg) {
  cfg.validate();
  TightenReport report;
  report.network = net.name();
  report.seed_info = inst.seed_info;
  report.mode_name = cfg.mode_name();
  report.propagation = cfg.propagation;
  report.passes = cfg.passes;
  report.bounds0 = initial_bounds(net);
  report.bounds = report.bounds0;

  const auto t_h = Clock::now();
  const CostCap cap = upper_bound_cost(net, inst, cfg.heuristic_budget);
  report.t_heuristic = seconds_since(t_h);
  report.cap = *cap.cap;
  {
    // Distinguish incumbent-based caps from the demand-times-cost fallback.
    double total_demand = 0.0, max_cost = 0.0;
    for (size_t i = 0; i < net.buses().size(); ++i) {
      total_demand += inst.demand[i];
      max_cost = std::max(max_cost, net.buses()[i].cost);
    }
    report.cap_from_incumbent = report.cap < total_demand * max_cost - 1e-9;
  }

  const LineGraph graph(net);
  NeighborhoodCache cache(graph);
  const std::vector<int> ids = line_ids_ascending(net);
  TightenLimits limits{cfg.is_tbt() ? cfg.per_problem_time_limit
                                    : std::get<TightenConfig::Sbt>(cfg.mode).t_ms /
                                          1000.0,
                       cfg.improvement_epsilon};

  auto relax_for = [&](int line_id,
                       const std::map<int, int>& fixed) -> RelaxationSpec {
    RelaxationSpec relax;
    if (cfg.is_tbt()) {
      const auto& hood =
          cache.get(line_id, std::get<TightenConfig::Tbt>(cfg.mode).k);
      relax.binary_lines.insert(hood.begin(), hood.end());
    } else {
      for (int id : ids)
        if (id != line_id) relax.binary_lines.insert(id);
    }
    relax.fixed = fixed;
    relax.fixed.erase(line_id);  // the side condition pins the line itself
    return relax;
  };

  const auto t_b = Clock::now();
  for (int pass = 0; pass < cfg.passes; ++pass) {
    if (cfg.propagation == Propagation::kSequential) {
      for (int id : ids) {
        TightenState state{&net, &inst, &report.bounds, report.cap,
                           &report.fixed_lines};
        report.per_line_log.push_back(
            tighten_line(state, id, relax_for(id, report.fixed_lines), limits));
      }
    } else {
      // Every line sees the pass-start bounds; per-line results merge after.
      const Bounds snapshot = report.bounds;
      const std::map<int, int> fixed_snapshot = report.fixed_lines;
      std::vector<LineTightenLog> logs(ids.size());
      std::vector<LineBounds> merged(ids.size());
      std::atomic<size_t> next{0};
      auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < ids.size();
             i = next.fetch_add(1)) {
          Bounds local = snapshot;
          std::map<int, int> fixed_local = fixed_snapshot;
          TightenState state{&net, &inst, &local, report.cap, &fixed_local};
          logs[i] =
              tighten_line(state, ids[i], relax_for(ids[i], fixed_snapshot),
                           limits);
          merged[i] = local.at(ids[i]);
        }
      };
      const int n_workers = std::max(1, std::min<int>(cfg.jobs, ids.size()));
      std::vector<std::thread> pool;
      pool.reserve(n_workers);
      for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
      for (std::thread& t : pool) t.join();
      for (size_t i = 0; i < ids.size(); ++i) {
        report.bounds.set(ids[i], merged[i]);
        if (logs[i].fixed) report.fixed_lines[ids[i]] = *logs[i].fixed;
        report.per_line_log.push_back(std::move(logs[i]));
      }
    }
  }
  report.t_bound = seconds_since(t_b);
  return report;
}

}  // namespace

TightenReport run_tbt(const Network& net, const Instance& inst,
                      const TightenConfig& cfg) {
  if (!cfg.is_tbt())
    throw ValidationError("run_tbt requires a TBT-mode configuration");
  return run_tightening(net, inst, cfg);
}

TightenReport run_sbt(const Network& net, const Instance& inst,
                      const TightenConfig& cfg) {
  if (cfg.is_tbt())
    throw ValidationError("run_sbt requires an SBT-mode configuration");
  return run_tightening(net, inst, cfg);
}

OtsSolution solve_ots(const Network& net, const Instance& inst,
                      const TightenReport& report,
                      const milp::SolveControls& controls) {
  RelaxationSpec relax = RelaxationSpec::all_binary(net);
  relax.fixed = report.fixed_lines;
  milp::ModelSpec model =
      build_ots(net, inst, report.bounds, relax, CostCap{});
  const milp::SolveOutcome outcome = milp::solve(model, controls);

  OtsSolution sol;
  sol.status = outcome.status;
  sol.t_solve = outcome.runtime;
  sol.dual_bound = outcome.dual_bound;
  if (outcome.has_primal()) {
    sol.cost = outcome.objective;
    sol.line_status.reserve(net.lines().size());
    for (const Line& l : net.lines()) {
      sol.line_status.push_back(
          outcome.value(var_x(l.id)) > 0.5 ? 1 : 0);
      sol.flows[l.id] = outcome.value(var_f(l.id));
    }
    const double denom = std::max(std::abs(sol.cost), 1e-9);
    sol.gap_pct =
        std::max(0.0, 100.0 * (sol.cost - sol.dual_bound) / denom);
  }
  return sol;
}

namespace {

json bounds_to_json(const Bounds& bounds) {
  json arr = json::array();
  for (const auto& [id, lb] : bounds.entries())
    arr.push_back({{"line", id},
                   {"f_lo", lb.f_lo},
                   {"f_hi", lb.f_hi},
                   {"m_lo", lb.m_lo},
                   {"m_hi", lb.m_hi}});
  return arr;
}

Bounds bounds_from_json(const json& arr, const std::string& ctx) {
  if (!arr.is_array()) throw ParseError(ctx + ": bounds must be an array");
  Bounds bounds;
  for (const json& jb : arr) {
    try {
      bounds.set(jb.at("line").get<int>(),
                 {jb.at("f_lo").get<double>(), jb.at("f_hi").get<double>(),
                  jb.at("m_lo").get<double>(), jb.at("m_hi").get<double>()});
    } catch (const json::exception& e) {
      throw ParseError(ctx + ": " + e.what());
    }
  }
  return bounds;
}

}  // namespace

void save_report(const TightenReport& report,
                 const std::filesystem::path& path) {
  json j;
  j["network"] = report.network;
  j["seed"] = report.seed_info.seed;
  j["instance_index"] = report.seed_info.index;
  j["mode"] = report.mode_name;
  j["propagation"] = std::string(to_string(report.propagation));
  j["passes"] = report.passes;
  j["cap"] = report.cap;
  j["cap_from_incumbent"] = report.cap_from_incumbent;
  j["t_bound_s"] = report.t_bound;
  j["t_heuristic_s"] = report.t_heuristic;
  j["bounds0"] = bounds_to_json(report.bounds0);
  j["bounds"] = bounds_to_json(report.bounds);
  json fixed = json::object();
  for (const auto& [id, value] : report.fixed_lines)
    fixed[std::to_string(id)] = value;
  j["fixed_lines"] = fixed;
  json log = json::array();
  for (const LineTightenLog& ll : report.per_line_log) {
    json entry;
    entry["line"] = ll.line;
    if (ll.fixed) entry["fixed"] = *ll.fixed;
    json subs = json::array();
    for (const SubproblemResult& s : ll.subproblems) {
      json js;
      js["target"] = s.target == BoundTarget::kFlow ? "flow" : "dummy";
      js["sense"] = s.sense == milp::Sense::kMinimize ? "min" : "max";
      js["status"] = std::string(milp::to_string(s.status));
      if (s.objective) js["objective"] = *s.objective;
      if (s.dual_bound) js["dual_bound"] = *s.dual_bound;
      js["runtime_s"] = s.runtime;
      js["applied"] = s.applied;
      if (!s.note.empty()) js["note"] = s.note;
      subs.push_back(std::move(js));
    }
    entry["subproblems"] = std::move(subs);
    log.push_back(std::move(entry));
  }
  j["per_line_log"] = std::move(log);

  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

TightenReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  TightenReport report;
  try {
    report.network = j.at("network").get<std::string>();
    report.seed_info.seed = j.at("seed").get<std::uint64_t>();
    report.seed_info.index = j.at("instance_index").get<int>();
    report.mode_name = j.at("mode").get<std::string>();
    report.propagation = j.at("propagation").get<std::string>() == "batch"
                             ? Propagation::kBatch
                             : Propagation::kSequential;
    report.passes = j.value("passes", 1);
    report.cap = j.at("cap").get<double>();
    report.cap_from_incumbent = j.value("cap_from_incumbent", false);
    report.t_bound = j.value("t_bound_s", 0.0);
    report.t_heuristic = j.value("t_heuristic_s", 0.0);
    report.bounds0 = bounds_from_json(j.at("bounds0"), path.string());
    report.bounds = bounds_from_json(j.at("bounds"), path.string());
    for (const auto& [key, value] : j.at("fixed_lines").items())
      report.fixed_lines[std::stoi(key)] = value.get<int>();
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return report;
}

}  // namespace ots
