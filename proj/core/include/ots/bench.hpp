#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ots/milp.hpp"
#include "ots/netmodel.hpp"
#include "ots/tighten.hpp"

namespace ots::bench {

struct Approach {
  enum class Kind { kMip, kTbt, kSbt };
  Kind kind = Kind::kMip;
  int k = 0;        // TBT closeness level
  double t_ms = 0;  // SBT per-problem budget

  std::string name() const;
  /// Accepts "mip", "tbt-<k>" and "sbt-<t_ms>". Rejects "ind"/"nlp" with a
  /// pointer at the missing backend capability.
  static Approach parse(std::string_view text);
};

struct BenchmarkRecord {
  int instance = 0;
  std::string approach;
  std::string status;  // solve status, or "error" for a failed row
  std::optional<double> cost;
  std::optional<double> gap_pct;
  std::optional<double> sub_pct;
  std::optional<double> dif_pct;
  double dF_pct = 0.0;
  double dM_pct = 0.0;
  double tB_s = 0.0;
  double tO_s = 0.0;
  double tT_s = 0.0;  // always tB_s + tO_s
};

/// Average percentage reduction of bound widths across lines:
///   dX = (100/|L|) sum_l (1 - width_l / width0_l).
std::pair<double, double> compute_bound_metrics(const Bounds& bounds0,
                                                const Bounds& bounds);

struct SolutionMetrics {
  double gap_pct;
  double sub_pct;
  double dif_pct;
};

double gap_pct(double cost, double dual_bound);
double sub_pct(double cost, double best_cost);
double dif_pct(double cost, double refit_cost);

SolutionMetrics compute_solution_metrics(std::optional<double> cost,
                                         double dual_bound, double best_cost,
                                         double refit_cost);

struct BenchOptions {
  milp::SolveControls controls;  // final-solve time limit and gap
  double per_problem_time_limit = 5.0;
  double heuristic_budget = 10.0;
  Propagation propagation = Propagation::kSequential;
  int jobs = 1;  // parallelism across (instance, approach) rows
};

/// Runs every (instance, approach) pair: tighten if the approach calls for
/// it, solve, compute metrics. Failed rows are recorded and the run
/// continues. Output is ordered by (instance, approach name).
std::vector<BenchmarkRecord> run_benchmark(const Network& net,
                                           const std::vector<Instance>& instances,
                                           const std::vector<Approach>& approaches,
                                           const BenchOptions& options);

extern const char* const kRecordsCsvHeader;
void write_records_csv(const std::vector<BenchmarkRecord>& records,
                       std::ostream& out);
std::vector<BenchmarkRecord> read_records_csv(std::istream& in);

struct ApproachSummary {
  std::string approach;
  int n = 0;
  double mean_dF = 0, mean_dM = 0;
  double mean_gap = 0, max_gap = 0;
  double mean_dif = 0, max_dif = 0;
  double mean_sub = 0, max_sub = 0;
  double mean_tB = 0, mean_tO = 0, mean_tT = 0;
  int n_tl = 0;  // rows that hit the time limit
};

std::vector<ApproachSummary> summarize(const std::vector<BenchmarkRecord>& records);

struct SplitSummary {
  std::vector<ApproachSummary> all;
  std::vector<ApproachSummary> hard;
  std::vector<ApproachSummary> easy;
};

/// Ranks instances by mean total time across approaches; the top
/// `split_fraction` are hard, the bottom `split_fraction` easy.
SplitSummary summarize_with_split(const std::vector<BenchmarkRecord>& records,
                                  double split_fraction);

void write_summary(const std::vector<ApproachSummary>& summary,
                   std::ostream& out);

struct ProfilePoint {
  std::string approach;
  double t_total;
  int solved;
};

/// Cumulative solved-within-time step curves per approach; unsolved rows
/// appear at the time limit without advancing the count.
std::vector<ProfilePoint> performance_profile(
    const std::vector<BenchmarkRecord>& records, double time_limit);

void write_profile_csv(const std::vector<ProfilePoint>& profile,
                       std::ostream& out);

}  // namespace ots::bench
