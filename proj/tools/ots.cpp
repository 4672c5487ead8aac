// ots: command-line front end. Subcommands: gen, topo, tighten, solve,
// oracle, bench, report. Errors go to stderr; data goes to stdout or files.
// Exit codes: 0 success, 1 usage, 2 data/validation, 3 backend.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ots/bench.hpp"
#include "ots/milp.hpp"
#include "ots/netmodel.hpp"
#include "ots/oracle.hpp"
#include "ots/tighten.hpp"
#include "ots/topo.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// One machine-parseable log line: "[ots] key=value key=value ...".
class LogLine {
 public:
  LogLine() { out_ << "[ots]"; }
  template <typename T>
  LogLine& kv(std::string_view key, const T& value) {
    out_ << ' ' << key << '=' << value;
    return *this;
  }
  ~LogLine() { std::cerr << out_.str() << '\n'; }

 private:
  std::ostringstream out_;
};

std::string version_string() {
  const ots::milp::BackendInfo backend = ots::milp::backend_info();
  return "ots 0.1.0 (backend " + backend.name + " " + backend.version + ")";
}

ots::Instance pick_instance(const std::vector<ots::Instance>& instances,
                            int index) {
  if (index < 0 || index >= static_cast<int>(instances.size()))
    throw ots::ValidationError("instance index " + std::to_string(index) +
                               " out of range (file has " +
                               std::to_string(instances.size()) + ")");
  return instances[index];
}

ots::Propagation parse_propagation(const std::string& text) {
  if (text == "seq" || text == "sequential") return ots::Propagation::kSequential;
  if (text == "batch") return ots::Propagation::kBatch;
  throw ots::ValidationError("propagation must be 'seq' or 'batch', got '" +
                             text + "'");
}

json solution_to_json(const ots::Network& net, const ots::Instance& inst,
                      const ots::OtsSolution& sol) {
  json j;
  j["network"] = net.name();
  j["instance_index"] = inst.seed_info.index;
  j["seed"] = inst.seed_info.seed;
  j["status"] = std::string(ots::milp::to_string(sol.status));
  j["t_solve_s"] = sol.t_solve;
  if (!sol.line_status.empty()) {
    j["cost"] = sol.cost;
    j["dual_bound"] = sol.dual_bound;
    j["gap_pct"] = sol.gap_pct;
    json lines = json::array();
    for (size_t i = 0; i < net.lines().size(); ++i) {
      const ots::Line& l = net.lines()[i];
      lines.push_back({{"line", l.id},
                       {"x", sol.line_status[i]},
                       {"f", sol.flows.at(l.id)}});
    }
    j["lines"] = std::move(lines);
  }
  return j;
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw ots::ParseError("cannot write " + out_path);
  out << j.dump(2) << '\n';
}


struct GenOpts {
  std::string network, out;
  int count = 1;
  std::uint64_t seed = 0;
  double spread = 0.1;
};

struct TopoOpts {
  std::string network;
  int line = 0, k = 1;
};

struct TightenOpts {
  std::string network, instances, out, mode = "tbt", propagation = "seq";
  int index = 0, k = 2, passes = 1, jobs = 1;
  double t_ms = 25.0, per_problem = 5.0, heuristic_budget = 10.0;
};

struct SolveOpts {
  std::string network, instances, report, out, dump_model;
  int index = 0, threads = 1;
  double time_limit = 3600.0, gap = 1e-4;
};

struct OracleOpts {
  std::string network, instances;
  int index = 0, max_lines = 20;
};

struct BenchOpts {
  std::string network, instances, approaches, out, profiles, propagation = "seq";
  double time_limit = 3600.0, gap = 1e-4, per_problem = 5.0,
         heuristic_budget = 10.0, split_fraction = 0.33;
  int jobs = 1;
};

struct ReportOpts {
  std::string results, profiles;
  double split_fraction = 0.33, time_limit = 0.0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DC optimal transmission switching with topology-aware bound "
               "tightening"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print version and backend identity");

  std::function<int()> action;

  // ---- gen ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("gen", "Generate demand instances");
    auto opts = std::make_shared<GenOpts>();
    cmd->add_option("--network", opts->network, "Network JSON file")->required();
    cmd->add_option("--count", opts->count, "Number of instances")->required();
    cmd->add_option("--seed", opts->seed, "Generator seed")->required();
    cmd->add_option("--spread", opts->spread,
                    "Demand interval half-width as a fraction of baseline");
    cmd->add_option("--out", opts->out, "Output instance file")->required();
    cmd->callback([&action, opts]() {
      action = [opts]() {
        const auto t0 = Clock::now();
        const ots::Network net = ots::load_network(opts->network);
        const auto instances =
            ots::generate_instances(net, opts->count, opts->seed, opts->spread);
        ots::save_instances(instances, opts->out);
        LogLine()
            .kv("cmd", "gen")
            .kv("network", net.name())
            .kv("count", opts->count)
            .kv("seed", opts->seed)
            .kv("spread", opts->spread)
            .kv("out", opts->out)
            .kv("wall_s", seconds_since(t0));
        return 0;
      };
    });
  }

  // ---- topo -----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("topo", "Print a line neighborhood L^k_l");
    auto opts = std::make_shared<TopoOpts>();
    cmd->add_option("--network", opts->network)->required();
    cmd->add_option("--line", opts->line, "Line id")->required();
    cmd->add_option("--k", opts->k, "Closeness level")->required();
    cmd->callback([&action, opts]() {
      action = [opts]() {
        const ots::Network net = ots::load_network(opts->network);
        const ots::LineGraph graph = ots::build_line_graph(net);
        json j;
        j["line"] = opts->line;
        j["k"] = opts->k;
        j["neighborhood"] = graph.neighborhood(opts->line, opts->k);
        std::cout << j.dump(2) << '\n';
        return 0;
      };
    });
  }

  // ---- tighten ---------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("tighten", "Run bound tightening");
    auto opts = std::make_shared<TightenOpts>();
    cmd->add_option("--network", opts->network)->required();
    cmd->add_option("--instance,--instances", opts->instances,
                    "Instance file (JSON list)")
        ->required();
    cmd->add_option("--index", opts->index, "Instance index within the file");
    cmd->add_option("--mode", opts->mode, "tbt or sbt")->required();
    cmd->add_option("--k", opts->k, "TBT closeness level");
    cmd->add_option("--t-ms", opts->t_ms, "SBT per-problem budget (ms)");
    cmd->add_option("--passes", opts->passes, "Tightening passes over all lines");
    cmd->add_option("--propagation", opts->propagation, "seq or batch");
    cmd->add_option("--per-problem-limit", opts->per_problem,
                    "TBT per-problem time limit (s)");
    cmd->add_option("--heuristic-budget", opts->heuristic_budget,
                    "Incumbent search budget (s)");
    cmd->add_option("--jobs", opts->jobs, "Batch-mode worker threads");
    cmd->add_option("--out", opts->out, "Report JSON output")->required();
    cmd->callback([&action, opts]() {
      action = [opts]() {
        const auto t0 = Clock::now();
        const ots::Network net = ots::load_network(opts->network);
        const ots::Instance inst = pick_instance(
            ots::load_instances(opts->instances, net), opts->index);
        ots::TightenConfig cfg;
        if (opts->mode == "tbt") {
          cfg = ots::TightenConfig::tbt(opts->k);
        } else if (opts->mode == "sbt") {
          cfg = ots::TightenConfig::sbt(opts->t_ms);
        } else {
          throw ots::ValidationError("mode must be 'tbt' or 'sbt', got '" +
                                     opts->mode + "'");
        }
        cfg.per_problem_time_limit = opts->per_problem;
        cfg.heuristic_budget = opts->heuristic_budget;
        cfg.propagation = parse_propagation(opts->propagation);
        cfg.passes = opts->passes;
        cfg.jobs = opts->jobs;
        LogLine()
            .kv("cmd", "tighten")
            .kv("network", net.name())
            .kv("instance", opts->index)
            .kv("seed", inst.seed_info.seed)
            .kv("mode", cfg.mode_name())
            .kv("propagation", ots::to_string(cfg.propagation))
            .kv("passes", cfg.passes);
        const ots::TightenReport report =
            cfg.is_tbt() ? ots::run_tbt(net, inst, cfg)
                         : ots::run_sbt(net, inst, cfg);
        ots::save_report(report, opts->out);
        LogLine()
            .kv("phase", "tighten")
            .kv("cap", report.cap)
            .kv("t_heuristic_s", report.t_heuristic)
            .kv("t_bound_s", report.t_bound)
            .kv("fixed_lines", report.fixed_lines.size())
            .kv("wall_s", seconds_since(t0));
        return 0;
      };
    });
  }

  // ---- solve ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("solve", "Solve the switching problem with "
                                            "a tightening report's bounds");
    auto opts = std::make_shared<SolveOpts>();
    cmd->add_option("--network", opts->network)->required();
    cmd->add_option("--instance,--instances", opts->instances)->required();
    cmd->add_option("--index", opts->index);
    cmd->add_option("--report", opts->report, "Tightening report JSON")
        ->required();
    cmd->add_option("--time-limit", opts->time_limit, "Seconds");
    cmd->add_option("--gap", opts->gap, "Relative MIP gap");
    cmd->add_option("--threads", opts->threads);
    cmd->add_option("--out", opts->out, "Solution JSON (default: stdout)");
    cmd->add_option("--dump-model", opts->dump_model,
                    "Write the final model in LP format");
    cmd->callback([&action, opts]() {
      action = [opts]() {
        const auto t0 = Clock::now();
        const ots::Network net = ots::load_network(opts->network);
        const ots::Instance inst = pick_instance(
            ots::load_instances(opts->instances, net), opts->index);
        const ots::TightenReport report = ots::load_report(opts->report);
        ots::milp::SolveControls controls{opts->time_limit, opts->gap,
                                          opts->threads};
        LogLine()
            .kv("cmd", "solve")
            .kv("network", net.name())
            .kv("instance", opts->index)
            .kv("seed", inst.seed_info.seed)
            .kv("time_limit_s", controls.time_limit)
            .kv("rel_gap", controls.rel_gap)
            .kv("threads", controls.threads);
        if (!opts->dump_model.empty()) {
          ots::RelaxationSpec relax = ots::RelaxationSpec::all_binary(net);
          relax.fixed = report.fixed_lines;
          const ots::milp::ModelSpec model =
              ots::build_ots(net, inst, report.bounds, relax, ots::CostCap{});
          std::ofstream lp(opts->dump_model);
          if (!lp) throw ots::ParseError("cannot write " + opts->dump_model);
          model.write_lp(lp);
        }
        const ots::OtsSolution sol = ots::solve_ots(net, inst, report, controls);
        emit(solution_to_json(net, inst, sol), opts->out);
        LogLine()
            .kv("phase", "solve")
            .kv("status", ots::milp::to_string(sol.status))
            .kv("t_solve_s", sol.t_solve)
            .kv("wall_s", seconds_since(t0));
        return 0;
      };
    });
  }

  // ---- oracle -----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("oracle", "Brute-force topology enumeration");
    auto opts = std::make_shared<OracleOpts>();
    cmd->add_option("--network", opts->network)->required();
    cmd->add_option("--instance,--instances", opts->instances)->required();
    cmd->add_option("--index", opts->index);
    cmd->add_option("--max-lines", opts->max_lines);
    cmd->callback([&action, opts]() {
      action = [opts]() {
        const auto t0 = Clock::now();
        const ots::Network net = ots::load_network(opts->network);
        const ots::Instance inst = pick_instance(
            ots::load_instances(opts->instances, net), opts->index);
        const ots::OracleResult result =
            ots::brute_force(net, inst, opts->max_lines);
        json j;
        j["network"] = net.name();
        j["instance_index"] = inst.seed_info.index;
        j["cost"] = result.cost;
        j["n_feasible"] = result.n_feasible;
        json lines = json::array();
        for (size_t i = 0; i < net.lines().size(); ++i) {
          const ots::Line& l = net.lines()[i];
          lines.push_back({{"line", l.id},
                           {"x", result.x_opt[i]},
                           {"f", result.flows.at(l.id)}});
        }
        j["lines"] = std::move(lines);
        std::cout << j.dump(2) << '\n';
        LogLine()
            .kv("cmd", "oracle")
            .kv("network", net.name())
            .kv("instance", opts->index)
            .kv("n_feasible", result.n_feasible)
            .kv("wall_s", seconds_since(t0));
        return 0;
      };
    });
  }

  // ---- bench ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("bench", "Run the benchmark matrix");
    auto opts = std::make_shared<BenchOpts>();
    cmd->add_option("--network", opts->network)->required();
    cmd->add_option("--instances,--instance", opts->instances)->required();
    cmd->add_option("--approaches", opts->approaches,
                    "Comma-separated, e.g. mip,tbt-0,tbt-2,sbt-25")
        ->required();
    cmd->add_option("--time-limit", opts->time_limit, "Final-solve limit (s)");
    cmd->add_option("--gap", opts->gap, "Relative MIP gap");
    cmd->add_option("--per-problem-limit", opts->per_problem,
                    "TBT per-problem time limit (s)");
    cmd->add_option("--heuristic-budget", opts->heuristic_budget);
    cmd->add_option("--propagation", opts->propagation, "seq or batch");
    cmd->add_option("--split-fraction", opts->split_fraction,
                    "Hard/easy split fraction");
    cmd->add_option("--jobs", opts->jobs, "Parallel rows");
    cmd->add_option("--out", opts->out, "results.csv path")->required();
    cmd->add_option("--profiles", opts->profiles,
                    "Performance-profile CSV path");
    cmd->callback([&action, opts]() {
      action = [opts]() {
        const auto t0 = Clock::now();
        const ots::Network net = ots::load_network(opts->network);
        const std::vector<ots::Instance> instances =
            ots::load_instances(opts->instances, net);
        std::vector<ots::bench::Approach> approaches;
        std::stringstream ss(opts->approaches);
        std::string token;
        while (std::getline(ss, token, ','))
          if (!token.empty())
            approaches.push_back(ots::bench::Approach::parse(token));
        ots::bench::BenchOptions options;
        options.controls = {opts->time_limit, opts->gap, 1};
        options.per_problem_time_limit = opts->per_problem;
        options.heuristic_budget = opts->heuristic_budget;
        options.propagation = parse_propagation(opts->propagation);
        options.jobs = opts->jobs;
        LogLine()
            .kv("cmd", "bench")
            .kv("network", net.name())
            .kv("instances", instances.size())
            .kv("approaches", opts->approaches)
            .kv("time_limit_s", opts->time_limit)
            .kv("gap", opts->gap)
            .kv("jobs", opts->jobs);
        const std::vector<ots::bench::BenchmarkRecord> records =
            ots::bench::run_benchmark(net, instances, approaches, options);
        {
          std::ofstream out(opts->out);
          if (!out) throw ots::ParseError("cannot write " + opts->out);
          ots::bench::write_records_csv(records, out);
        }
        if (!opts->profiles.empty()) {
          std::ofstream out(opts->profiles);
          if (!out) throw ots::ParseError("cannot write " + opts->profiles);
          ots::bench::write_profile_csv(
              ots::bench::performance_profile(records, opts->time_limit), out);
        }
        const ots::bench::SplitSummary summary =
            ots::bench::summarize_with_split(records, opts->split_fraction);
        std::cout << "== all instances ==\n";
        ots::bench::write_summary(summary.all, std::cout);
        std::cout << "== hard instances ==\n";
        ots::bench::write_summary(summary.hard, std::cout);
        std::cout << "== easy instances ==\n";
        ots::bench::write_summary(summary.easy, std::cout);
        LogLine()
            .kv("phase", "bench")
            .kv("rows", records.size())
            .kv("out", opts->out)
            .kv("wall_s", seconds_since(t0));
        return 0;
      };
    });
  }

  // ---- report -----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("report", "Summarize a results.csv");
    auto opts = std::make_shared<ReportOpts>();
    cmd->add_option("--results", opts->results)->required();
    cmd->add_option("--split-fraction", opts->split_fraction);
    cmd->add_option("--profiles", opts->profiles,
                    "Write performance-profile CSV");
    cmd->add_option("--time-limit", opts->time_limit,
                    "Time limit for profile saturation (default: max tT)");
    cmd->callback([&action, opts]() {
      action = [opts]() {
        std::ifstream in(opts->results);
        if (!in) throw ots::ParseError("cannot open " + opts->results);
        const std::vector<ots::bench::BenchmarkRecord> records =
            ots::bench::read_records_csv(in);
        const ots::bench::SplitSummary summary =
            ots::bench::summarize_with_split(records, opts->split_fraction);
        std::cout << "== all instances ==\n";
        ots::bench::write_summary(summary.all, std::cout);
        std::cout << "== hard instances ==\n";
        ots::bench::write_summary(summary.hard, std::cout);
        std::cout << "== easy instances ==\n";
        ots::bench::write_summary(summary.easy, std::cout);
        if (!opts->profiles.empty()) {
          double limit = opts->time_limit;
          if (limit <= 0)
            for (const auto& r : records) limit = std::max(limit, r.tT_s);
          std::ofstream out(opts->profiles);
          if (!out) throw ots::ParseError("cannot write " + opts->profiles);
          ots::bench::write_profile_csv(
              ots::bench::performance_profile(records, limit), out);
        }
        return 0;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (show_version) {
    std::cout << version_string() << '\n';
    return 0;
  }
  if (!action) {
    std::cerr << app.help();
    return 1;
  }

  try {
    return action();
  } catch (const ots::BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return 3;
  } catch (const ots::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
