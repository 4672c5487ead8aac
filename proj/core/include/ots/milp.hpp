#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ots/errors.hpp"

namespace ots::milp {

enum class Integrality { kContinuous, kBinary };
enum class Relation { kLessEqual, kEqual, kGreaterEqual };
enum class Sense { kMinimize, kMaximize };

/// One coefficient of a sparse linear expression, keyed by variable index.
struct Term {
  int var;
  double coeff;
};

struct Variable {
  std::string name;
  double lower;
  double upper;
  Integrality integrality;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation;
  double rhs;
};

struct Objective {
  Sense sense = Sense::kMinimize;
  std::vector<Term> terms;
};

/// Solver-agnostic model: variables with bounds and integrality, sparse
/// linear constraints, one linear objective. Values all the way down, so a
/// relaxation is a copy with some integrality flags flipped.
class ModelSpec {
 public:
  int add_variable(std::string name, double lower, double upper,
                   Integrality integrality = Integrality::kContinuous);
  void add_constraint(std::string name, std::vector<Term> terms, Relation rel,
                      double rhs);
  void set_objective(Sense sense, std::vector<Term> terms);

  void set_integrality(int var, Integrality integrality);
  void set_bounds(int var, double lower, double upper);
  /// Pins a variable by collapsing its bounds to [value, value].
  void fix(int var, double value);

  /// Index of a named variable, or -1 when absent.
  int variable_index(std::string_view name) const;

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  const Objective& objective() const { return obj_; }

  /// Throws ValidationError on dangling indices, inverted bounds, or binary
  /// variables outside [0, 1].
  void validate() const;

  /// CPLEX LP-format dump, for --dump-model and debugging.
  void write_lp(std::ostream& out) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  Objective obj_;
  std::unordered_map<std::string, int> index_;
};

struct SolveControls {
  double time_limit = 3600.0;  // seconds; fractional values allowed
  double rel_gap = 1e-4;       // relative MIP gap target (0.01%)
  int threads = 1;
};

enum class SolveStatus {
  kOptimal,
  kFeasibleAtLimit,
  kNoSolutionAtLimit,
  kInfeasible,
  kUnbounded,
};

std::string_view to_string(SolveStatus status);

struct SolveOutcome {
  SolveStatus status;
  /// Variable values; populated for kOptimal and kFeasibleAtLimit.
  std::unordered_map<std::string, double> primal;
  double objective = std::numeric_limits<double>::quiet_NaN();
  /// Best proven bound on the optimum (lower for min, upper for max). Valid
  /// at every status that reports one, including timeouts.
  double dual_bound = std::numeric_limits<double>::quiet_NaN();
  double runtime = 0.0;  // wall seconds

  bool has_primal() const { return !primal.empty(); }
  double value(std::string_view name) const;
};

struct BackendInfo {
  std::string name;
  std::string version;
  bool supports_indicator_constraints;
};

BackendInfo backend_info();

/// Solves the model through the backend. Throws BackendError on solver
/// failure. Deterministic for fixed (model, controls) with threads = 1.
SolveOutcome solve(const ModelSpec& model, const SolveControls& controls);

}  // namespace ots::milp
