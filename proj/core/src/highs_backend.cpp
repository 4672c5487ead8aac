// Adapter between ModelSpec/SolveOutcome and the vendored HiGHS solver.
// Nothing outside this file names the backend.

#include <chrono>
#include <cstdlib>
#include <cmath>
#include <limits>
#include <string>

#include "Highs.h"
#include "ots/milp.hpp"

namespace ots::milp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

HighsModel to_highs(const ModelSpec& m) {
  HighsModel hm;
  HighsLp& lp = hm.lp_;
  const auto& vars = m.variables();
  const auto& cons = m.constraints();
  lp.num_col_ = static_cast<HighsInt>(vars.size());
  lp.num_row_ = static_cast<HighsInt>(cons.size());
  lp.sense_ = m.objective().sense == Sense::kMinimize ? ObjSense::kMinimize
                                                      : ObjSense::kMaximize;

  lp.col_cost_.assign(vars.size(), 0.0);
  for (const Term& t : m.objective().terms) lp.col_cost_[t.var] = t.coeff;
  lp.col_lower_.reserve(vars.size());
  lp.col_upper_.reserve(vars.size());
  bool any_integer = false;
  for (const Variable& v : vars) {
    lp.col_lower_.push_back(v.lower);
    lp.col_upper_.push_back(v.upper);
    any_integer |= v.integrality == Integrality::kBinary;
  }
  if (any_integer) {
    lp.integrality_.reserve(vars.size());
    for (const Variable& v : vars)
      lp.integrality_.push_back(v.integrality == Integrality::kBinary
                                    ? HighsVarType::kInteger
                                    : HighsVarType::kContinuous);
  }

  lp.row_lower_.reserve(cons.size());
  lp.row_upper_.reserve(cons.size());
  lp.a_matrix_.format_ = MatrixFormat::kRowwise;
  lp.a_matrix_.start_.assign(1, 0);
  for (const Constraint& c : cons) {
    switch (c.relation) {
      case Relation::kLessEqual:
        lp.row_lower_.push_back(-kInf);
        lp.row_upper_.push_back(c.rhs);
        break;
      case Relation::kEqual:
        lp.row_lower_.push_back(c.rhs);
        lp.row_upper_.push_back(c.rhs);
        break;
      case Relation::kGreaterEqual:
        lp.row_lower_.push_back(c.rhs);
        lp.row_upper_.push_back(kInf);
        break;
    }
    for (const Term& t : c.terms) {
      lp.a_matrix_.index_.push_back(t.var);
      lp.a_matrix_.value_.push_back(t.coeff);
    }
    lp.a_matrix_.start_.push_back(
        static_cast<HighsInt>(lp.a_matrix_.index_.size()));
  }
  return hm;
}

bool is_mip(const ModelSpec& m) {
  for (const Variable& v : m.variables())
    if (v.integrality == Integrality::kBinary) return true;
  return false;
}

}  // namespace

BackendInfo backend_info() {
  return {"HiGHS",
          std::to_string(HIGHS_VERSION_MAJOR) + "." +
              std::to_string(HIGHS_VERSION_MINOR) + "." +
              std::to_string(HIGHS_VERSION_PATCH),
          /*supports_indicator_constraints=*/false};
}

SolveOutcome solve(const ModelSpec& model, const SolveControls& controls) {
  model.validate();
  if (!(controls.time_limit > 0.0))
    throw ValidationError("SolveControls.time_limit must be positive");
  if (controls.rel_gap < 0.0)
    throw ValidationError("SolveControls.rel_gap must be non-negative");
  if (controls.threads < 1)
    throw ValidationError("SolveControls.threads must be positive");

  Highs highs;
  // OTS_MILP_LOG=1 surfaces raw solver logs for debugging.
  const char* log_env = std::getenv("OTS_MILP_LOG");
  highs.setOptionValue("output_flag", log_env && *log_env == '1');
  highs.setOptionValue("time_limit", controls.time_limit);
  highs.setOptionValue("mip_rel_gap", controls.rel_gap);
  highs.setOptionValue("threads", controls.threads);
  highs.setOptionValue("parallel", controls.threads > 1 ? "on" : "off");
  highs.setOptionValue("random_seed", 0);

  if (highs.passModel(to_highs(model)) == HighsStatus::kError)
    throw BackendError("backend rejected model");

  const auto t0 = std::chrono::steady_clock::now();
  HighsStatus run_status = highs.run();
  HighsModelStatus ms = highs.getModelStatus();
  if (ms == HighsModelStatus::kUnboundedOrInfeasible ||
      ms == HighsModelStatus::kSolveError) {
    // Ambiguous or failed first pass; retry without presolve to get a
    // clean phase-1 classification.
    highs.setOptionValue("presolve", "off");
    run_status = highs.run();
    ms = highs.getModelStatus();
  }
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (run_status == HighsStatus::kError)
    throw BackendError("backend failed: " + highs.modelStatusToString(ms));

  const bool mip = is_mip(model);
  const HighsInfo& info = highs.getInfo();
  const bool have_primal =
      info.primal_solution_status == kSolutionStatusFeasible;
  const double sense_inf =
      model.objective().sense == Sense::kMinimize ? -kInf : kInf;

  SolveOutcome out;
  out.runtime = runtime;
  switch (ms) {
    case HighsModelStatus::kOptimal:
      out.status = SolveStatus::kOptimal;
      break;
    case HighsModelStatus::kInfeasible:
      out.status = SolveStatus::kInfeasible;
      break;
    case HighsModelStatus::kUnbounded:
      out.status = SolveStatus::kUnbounded;
      break;
    case HighsModelStatus::kTimeLimit:
    case HighsModelStatus::kIterationLimit:
    case HighsModelStatus::kSolutionLimit:
    case HighsModelStatus::kObjectiveBound:
    case HighsModelStatus::kObjectiveTarget:
    case HighsModelStatus::kInterrupt:
      out.status = have_primal ? SolveStatus::kFeasibleAtLimit
                               : SolveStatus::kNoSolutionAtLimit;
      break;
    default:
      throw BackendError("backend failed: " + highs.modelStatusToString(ms));
  }

  if (have_primal) {
    out.objective = info.objective_function_value;
    const std::vector<double>& col_value = highs.getSolution().col_value;
    const auto& vars = model.variables();
    out.primal.reserve(vars.size());
    for (size_t i = 0; i < vars.size(); ++i)
      out.primal.emplace(vars[i].name, col_value[i]);
  }

  if (out.status == SolveStatus::kOptimal) {
    out.dual_bound = mip ? info.mip_dual_bound : out.objective;
  } else if (out.status == SolveStatus::kFeasibleAtLimit ||
             out.status == SolveStatus::kNoSolutionAtLimit) {
    out.dual_bound = mip ? info.mip_dual_bound : sense_inf;
    if (!std::isfinite(out.dual_bound) && out.dual_bound != sense_inf)
      out.dual_bound = sense_inf;
  }
  return out;
}

}  // namespace ots::milp
