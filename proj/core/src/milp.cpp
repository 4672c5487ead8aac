#include "ots/milp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace ots::milp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Term> merge_terms(std::vector<Term> terms) {
  std::map<int, double> acc;
  for (const Term& t : terms) acc[t.var] += t.coeff;
  std::vector<Term> out;
  out.reserve(acc.size());
  for (const auto& [var, coeff] : acc) {
    if (coeff != 0.0) out.push_back({var, coeff});
  }
  return out;
}

}  // namespace

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kFeasibleAtLimit:
      return "feasible_at_limit";
    case SolveStatus::kNoSolutionAtLimit:
      return "no_solution_at_limit";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

int ModelSpec::add_variable(std::string name, double lower, double upper,
                            Integrality integrality) {
  if (index_.contains(name))
    throw ValidationError("duplicate variable name: " + name);
  const int idx = static_cast<int>(vars_.size());
  index_.emplace(name, idx);
  vars_.push_back({std::move(name), lower, upper, integrality});
  return idx;
}

void ModelSpec::add_constraint(std::string name, std::vector<Term> terms,
                               Relation rel, double rhs) {
  cons_.push_back({std::move(name), merge_terms(std::move(terms)), rel, rhs});
}

void ModelSpec::set_objective(Sense sense, std::vector<Term> terms) {
  obj_.sense = sense;
  obj_.terms = merge_terms(std::move(terms));
}

void ModelSpec::set_integrality(int var, Integrality integrality) {
  vars_.at(var).integrality = integrality;
}

void ModelSpec::set_bounds(int var, double lower, double upper) {
  vars_.at(var).lower = lower;
  vars_.at(var).upper = upper;
}

void ModelSpec::fix(int var, double value) { set_bounds(var, value, value); }

int ModelSpec::variable_index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? -1 : it->second;
}

void ModelSpec::validate() const {
  const int n = static_cast<int>(vars_.size());
  for (const Variable& v : vars_) {
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
      throw ValidationError("variable " + v.name + " has inverted bounds");
    if (v.integrality == Integrality::kBinary &&
        (v.lower < 0.0 || v.upper > 1.0))
      throw ValidationError("binary variable " + v.name +
                            " has bounds outside [0, 1]");
  }
  auto check_terms = [n](const std::vector<Term>& terms,
                         const std::string& where) {
    for (const Term& t : terms) {
      if (t.var < 0 || t.var >= n)
        throw ValidationError(where + " references undeclared variable index " +
                              std::to_string(t.var));
      if (!std::isfinite(t.coeff))
        throw ValidationError(where + " has a non-finite coefficient");
    }
  };
  for (const Constraint& c : cons_) {
    if (c.terms.empty())
      throw ValidationError("constraint " + c.name + " has no terms");
    if (!std::isfinite(c.rhs))
      throw ValidationError("constraint " + c.name + " has non-finite rhs");
    check_terms(c.terms, "constraint " + c.name);
  }
  check_terms(obj_.terms, "objective");
}

double SolveOutcome::value(std::string_view name) const {
  auto it = primal.find(std::string(name));
  if (it == primal.end())
    throw Error("no primal value for variable " + std::string(name));
  return it->second;
}

namespace {

void write_expr(std::ostream& out, const std::vector<Term>& terms,
                const std::vector<Variable>& vars) {
  bool first = true;
  for (const Term& t : terms) {
    const double c = t.coeff;
    if (first) {
      if (c < 0) out << "- ";
      first = false;
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    out << std::abs(c) << ' ' << vars[t.var].name;
  }
  if (first) out << "0";
}

}  // namespace

void ModelSpec::write_lp(std::ostream& out) const {
  const auto saved = out.precision(17);
  out << (obj_.sense == Sense::kMinimize ? "Minimize" : "Maximize") << "\n obj: ";
  write_expr(out, obj_.terms, vars_);
  out << "\nSubject To\n";
  for (const Constraint& c : cons_) {
    out << ' ' << c.name << ": ";
    write_expr(out, c.terms, vars_);
    switch (c.relation) {
      case Relation::kLessEqual:
        out << " <= ";
        break;
      case Relation::kEqual:
        out << " = ";
        break;
      case Relation::kGreaterEqual:
        out << " >= ";
        break;
    }
    out << c.rhs << '\n';
  }
  out << "Bounds\n";
  for (const Variable& v : vars_) {
    if (v.lower == -kInf && v.upper == kInf) {
      out << ' ' << v.name << " free\n";
    } else if (v.lower == v.upper) {
      out << ' ' << v.name << " = " << v.lower << '\n';
    } else {
      out << ' ';
      if (v.lower == -kInf)
        out << "-inf";
      else
        out << v.lower;
      out << " <= " << v.name << " <= ";
      if (v.upper == kInf)
        out << "+inf";
      else
        out << v.upper;
      out << '\n';
    }
  }
  bool any_binary =
      std::any_of(vars_.begin(), vars_.end(), [](const Variable& v) {
        return v.integrality == Integrality::kBinary;
      });
  if (any_binary) {
    out << "Binaries\n";
    for (const Variable& v : vars_)
      if (v.integrality == Integrality::kBinary) out << ' ' << v.name << '\n';
  }
  out << "End\n";
  out.precision(saved);
}

}  // namespace ots::milp
