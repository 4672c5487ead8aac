#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ots/formulation.hpp"
#include "ots/milp.hpp"
#include "ots/netmodel.hpp"

namespace ots {

enum class Propagation { kSequential, kBatch };

std::string_view to_string(Propagation p);

/// Bound tightening configuration. TBT keeps the level-k line neighborhood
/// binary in every bounding problem; SBT keeps everything binary and cuts
/// each subproblem off after t_ms milliseconds, taking the proven bound.
struct TightenConfig {
  struct Tbt {
    int k = 2;
  };
  struct Sbt {
    double t_ms = 25.0;
  };
  std::variant<Tbt, Sbt> mode = Tbt{};
  double per_problem_time_limit = 5.0;  // seconds; SBT overrides with t_ms
  double heuristic_budget = 10.0;       // seconds
  Propagation propagation = Propagation::kSequential;
  double improvement_epsilon = 1e-6;  // MW; smaller changes are ignored
  int passes = 1;
  int jobs = 1;  // batch-mode worker threads

  static TightenConfig tbt(int k);
  static TightenConfig sbt(double t_ms);
  bool is_tbt() const { return std::holds_alternative<Tbt>(mode); }
  std::string mode_name() const;  // "tbt-2", "sbt-25"
  void validate() const;
};

struct SubproblemResult {
  BoundTarget target;
  milp::Sense sense;
  milp::SolveStatus status;
  std::optional<double> objective;
  std::optional<double> dual_bound;
  double runtime = 0.0;
  bool applied = false;  // whether the candidate actually moved a bound
  std::string note;
};

struct LineTightenLog {
  int line = 0;
  std::optional<int> fixed;  // status pinned by infeasibility detection
  std::vector<SubproblemResult> subproblems;
};

struct TightenReport {
  std::string network;
  SeedInfo seed_info;
  std::string mode_name;
  Propagation propagation = Propagation::kSequential;
  int passes = 1;
  Bounds bounds0;
  Bounds bounds;
  double cap = 0.0;
  bool cap_from_incumbent = false;
  std::map<int, int> fixed_lines;
  double t_bound = 0.0;      // seconds spent on the bounding problems
  double t_heuristic = 0.0;  // seconds spent deriving the cost cap
  std::vector<LineTightenLog> per_line_log;
};

/// Flow bounds start at the thermal limits. Big-M starts at the
/// longest-simple-path surrogate
///   m_hi = b_l * sum_{j != l} max(|f_min_j|, f_max_j) / b_j,  m_lo = -m_hi:
/// with line l open, the angle gap across it is at most the sum of the
/// per-line maximum angle drops over all other lines.
Bounds initial_bounds(const Network& net);

/// Time-limited incumbent search on the switching MILP; falls back to
/// total demand times the most expensive marginal cost.
CostCap upper_bound_cost(const Network& net, const Instance& inst,
                         double budget_seconds);

struct TightenLimits {
  double time_limit = 5.0;
  double improvement_epsilon = 1e-6;
};

struct TightenState {
  const Network* net;
  const Instance* inst;
  Bounds* bounds;
  double cap;
  std::map<int, int>* fixed;
};

/// Solves the four bounding problems of one line in the fixed order
/// (flow,min), (flow,max), (dummy,min), (dummy,max) and applies any
/// improvement to state.bounds. Timed-out problems contribute their dual
/// bound (the valid conservative side); an infeasible side pins the line
/// status in state.fixed. Updates never widen a bound and keep zero inside
/// both intervals.
LineTightenLog tighten_line(const TightenState& state, int line_id,
                            const RelaxationSpec& relax,
                            const TightenLimits& limits);

TightenReport run_tbt(const Network& net, const Instance& inst,
                      const TightenConfig& cfg);
TightenReport run_sbt(const Network& net, const Instance& inst,
                      const TightenConfig& cfg);

struct OtsSolution {
  milp::SolveStatus status;
  double cost = std::numeric_limits<double>::quiet_NaN();
  double dual_bound = std::numeric_limits<double>::quiet_NaN();
  double gap_pct = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> line_status;   // by line position; empty without incumbent
  std::map<int, double> flows;    // line id -> MW
  double t_solve = 0.0;
};

/// Final switching solve with the report's bounds and fixings, all statuses
/// binary, and no cost cap (the cap lives only inside bounding problems).
OtsSolution solve_ots(const Network& net, const Instance& inst,
                      const TightenReport& report,
                      const milp::SolveControls& controls);

void save_report(const TightenReport& report, const std::filesystem::path& path);
TightenReport load_report(const std::filesystem::path& path);

}  // namespace ots
