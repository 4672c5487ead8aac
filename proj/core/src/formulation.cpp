#include "ots/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace ots {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const LineBounds& Bounds::at(int line_id) const {
  auto it = by_line_.find(line_id);
  if (it == by_line_.end())
    throw MissingBoundsError("no bounds for line " + std::to_string(line_id));
  return it->second;
}

void Bounds::set(int line_id, const LineBounds& lb) {
  if (!(lb.f_lo <= 0.0 && 0.0 <= lb.f_hi))
    throw ValidationError("flow bounds of line " + std::to_string(line_id) +
                          " must contain zero");
  if (!(lb.m_lo <= 0.0 && 0.0 <= lb.m_hi))
    throw ValidationError("big-M bounds of line " + std::to_string(line_id) +
                          " must contain zero");
  by_line_[line_id] = lb;
}

RelaxationSpec RelaxationSpec::all_binary(const Network& net) {
  RelaxationSpec spec;
  for (const Line& l : net.lines()) spec.binary_lines.insert(l.id);
  return spec;
}

void RelaxationSpec::validate(const Network& net) const {
  for (int id : binary_lines) net.line_pos(id);
  for (const auto& [id, value] : fixed) {
    net.line_pos(id);
    if (value != 0 && value != 1)
      throw InconsistentFixingError("line " + std::to_string(id) +
                                    " fixed to " + std::to_string(value));
  }
}

std::string var_p(int bus_id) { return "p_" + std::to_string(bus_id); }
std::string var_theta(int bus_id) { return "theta_" + std::to_string(bus_id); }
std::string var_f(int line_id) { return "f_" + std::to_string(line_id); }
std::string var_ftil(int line_id) { return "ftil_" + std::to_string(line_id); }
std::string var_x(int line_id) { return "x_" + std::to_string(line_id); }

namespace {

// Shared structure of the switching model and its bounding variants: all
// status variables start binary; relaxation is applied on the copy.
milp::ModelSpec build_switching_structure(const Network& net,
                                          const Instance& inst,
                                          const Bounds& bounds,
                                          const CostCap& cap) {
  using milp::Integrality;
  using milp::Relation;
  using milp::Term;

  if (inst.demand.size() != net.buses().size())
    throw ValidationError("instance/network bus count mismatch");
  for (const Line& l : net.lines()) bounds.at(l.id);  // MissingBounds check

  milp::ModelSpec m;
  std::vector<int> p_idx, th_idx, f_idx, ftil_idx, x_idx;
  for (const Bus& b : net.buses()) {
    p_idx.push_back(m.add_variable(var_p(b.id), b.p_min, b.p_max));
    const bool ref = b.id == 1;
    th_idx.push_back(
        m.add_variable(var_theta(b.id), ref ? 0.0 : -kInf, ref ? 0.0 : kInf));
  }
  for (const Line& l : net.lines()) {
    const LineBounds& lb = bounds.at(l.id);
    f_idx.push_back(m.add_variable(var_f(l.id), lb.f_lo, lb.f_hi));
    ftil_idx.push_back(m.add_variable(var_ftil(l.id),
                                      std::min(lb.m_lo, lb.f_lo),
                                      std::max(lb.m_hi, lb.f_hi)));
    x_idx.push_back(m.add_variable(var_x(l.id), 0.0, 1.0, Integrality::kBinary));
  }

  for (size_t i = 0; i < net.lines().size(); ++i) {
    const Line& l = net.lines()[i];
    const int n = net.bus_pos(l.from_bus), mm = net.bus_pos(l.to_bus);
    m.add_constraint("kirchhoff_" + std::to_string(l.id),
                     {{ftil_idx[i], 1.0},
                      {th_idx[n], -l.susceptance},
                      {th_idx[mm], l.susceptance}},
                     Relation::kEqual, 0.0);
  }
  for (size_t n = 0; n < net.buses().size(); ++n) {
    std::vector<Term> terms{{p_idx[n], 1.0}};
    for (size_t i = 0; i < net.lines().size(); ++i) {
      const Line& l = net.lines()[i];
      if (net.bus_pos(l.from_bus) == static_cast<int>(n))
        terms.push_back({f_idx[i], -1.0});
      if (net.bus_pos(l.to_bus) == static_cast<int>(n))
        terms.push_back({f_idx[i], 1.0});
    }
    m.add_constraint("balance_" + std::to_string(net.buses()[n].id),
                     std::move(terms), Relation::kEqual, inst.demand[n]);
  }
  for (size_t i = 0; i < net.lines().size(); ++i) {
    const Line& l = net.lines()[i];
    const LineBounds& lb = bounds.at(l.id);
    const std::string id = std::to_string(l.id);
    // (1-x) m_lo <= -f + ftil <= (1-x) m_hi
    m.add_constraint("bigm_lo_" + id,
                     {{f_idx[i], -1.0}, {ftil_idx[i], 1.0}, {x_idx[i], lb.m_lo}},
                     Relation::kGreaterEqual, lb.m_lo);
    m.add_constraint("bigm_hi_" + id,
                     {{f_idx[i], -1.0}, {ftil_idx[i], 1.0}, {x_idx[i], lb.m_hi}},
                     Relation::kLessEqual, lb.m_hi);
    // x f_lo <= f <= x f_hi
    m.add_constraint("switch_lo_" + id,
                     {{f_idx[i], 1.0}, {x_idx[i], -lb.f_lo}},
                     Relation::kGreaterEqual, 0.0);
    m.add_constraint("switch_hi_" + id,
                     {{f_idx[i], 1.0}, {x_idx[i], -lb.f_hi}},
                     Relation::kLessEqual, 0.0);
  }
  if (cap.cap) {
    std::vector<Term> terms;
    for (size_t n = 0; n < net.buses().size(); ++n)
      if (net.buses()[n].cost != 0.0)
        terms.push_back({p_idx[n], net.buses()[n].cost});
    if (!terms.empty())
      m.add_constraint("cost_cap", std::move(terms), Relation::kLessEqual,
                       *cap.cap);
  }
  return m;
}

std::vector<milp::Term> cost_terms(const Network& net,
                                   const milp::ModelSpec& m) {
  std::vector<milp::Term> terms;
  for (const Bus& b : net.buses())
    terms.push_back({m.variable_index(var_p(b.id)), b.cost});
  return terms;
}

}  // namespace

void apply_relaxation(milp::ModelSpec& model, const Network& net,
                      const RelaxationSpec& relax) {
  relax.validate(net);
  for (const Line& l : net.lines()) {
    const int xi = model.variable_index(var_x(l.id));
    if (xi < 0) continue;
    model.set_integrality(xi, relax.binary_lines.contains(l.id)
                                  ? milp::Integrality::kBinary
                                  : milp::Integrality::kContinuous);
  }
  for (const auto& [id, value] : relax.fixed) {
    const int xi = model.variable_index(var_x(id));
    if (xi < 0) continue;
    model.fix(xi, static_cast<double>(value));
  }
}

milp::ModelSpec build_ots(const Network& net, const Instance& inst,
                          const Bounds& bounds, const RelaxationSpec& relax,
                          const CostCap& cap) {
  milp::ModelSpec m = build_switching_structure(net, inst, bounds, cap);
  apply_relaxation(m, net, relax);
  m.set_objective(milp::Sense::kMinimize, cost_terms(net, m));
  return m;
}

milp::ModelSpec build_bounding(const Network& net, const Instance& inst,
                               const Bounds& bounds, int line_id,
                               BoundTarget target, milp::Sense sense,
                               const RelaxationSpec& relax, const CostCap& cap) {
  if (!cap.cap)
    throw ValidationError("bounding problems require a cost cap");
  const int side = target == BoundTarget::kFlow ? 1 : 0;
  if (auto it = relax.fixed.find(line_id);
      it != relax.fixed.end() && it->second != side)
    throw InconsistentFixingError(
        "line " + std::to_string(line_id) + " is fixed to " +
        std::to_string(it->second) + ", conflicting with the side condition");

  milp::ModelSpec m = build_switching_structure(net, inst, bounds, cap);
  apply_relaxation(m, net, relax);
  m.fix(m.variable_index(var_x(line_id)), static_cast<double>(side));
  const std::string target_var =
      target == BoundTarget::kFlow ? var_f(line_id) : var_ftil(line_id);
  m.set_objective(sense, {{m.variable_index(target_var), 1.0}});
  return m;
}

milp::ModelSpec build_dcopf_fixed(const Network& net, const Instance& inst,
                                  const std::vector<int>& status) {
  using milp::Relation;
  using milp::Term;
  if (status.size() != net.lines().size())
    throw ValidationError("status vector length != line count");
  if (inst.demand.size() != net.buses().size())
    throw ValidationError("instance/network bus count mismatch");

  // Components of the closed-line subgraph; reference = lowest bus id each.
  const size_t nb = net.buses().size();
  std::vector<int> comp(nb);
  for (size_t i = 0; i < nb; ++i) comp[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int v) {
    while (comp[v] != v) v = comp[v] = comp[comp[v]];
    return v;
  };
  for (size_t i = 0; i < net.lines().size(); ++i) {
    if (!status[i]) continue;
    const Line& l = net.lines()[i];
    const int a = find(net.bus_pos(l.from_bus)), b = find(net.bus_pos(l.to_bus));
    if (a != b) comp[a] = b;
  }
  std::map<int, int> ref_bus;  // component root -> lowest bus id
  for (size_t i = 0; i < nb; ++i) {
    const int root = find(static_cast<int>(i));
    const int id = net.buses()[i].id;
    auto [it, inserted] = ref_bus.try_emplace(root, id);
    if (!inserted) it->second = std::min(it->second, id);
  }

  milp::ModelSpec m;
  std::vector<int> p_idx, th_idx, f_idx;
  for (size_t i = 0; i < nb; ++i) {
    const Bus& b = net.buses()[i];
    p_idx.push_back(m.add_variable(var_p(b.id), b.p_min, b.p_max));
    const bool ref = ref_bus.at(find(static_cast<int>(i))) == b.id;
    th_idx.push_back(
        m.add_variable(var_theta(b.id), ref ? 0.0 : -kInf, ref ? 0.0 : kInf));
  }
  for (size_t i = 0; i < net.lines().size(); ++i) {
    const Line& l = net.lines()[i];
    f_idx.push_back(status[i]
                        ? m.add_variable(var_f(l.id), l.f_min, l.f_max)
                        : m.add_variable(var_f(l.id), 0.0, 0.0));
    if (status[i]) {
      const int n = net.bus_pos(l.from_bus), mm = net.bus_pos(l.to_bus);
      m.add_constraint("kirchhoff_" + std::to_string(l.id),
                       {{f_idx[i], 1.0},
                        {th_idx[n], -l.susceptance},
                        {th_idx[mm], l.susceptance}},
                       Relation::kEqual, 0.0);
    }
  }
  for (size_t n = 0; n < nb; ++n) {
    std::vector<Term> terms{{p_idx[n], 1.0}};
    for (size_t i = 0; i < net.lines().size(); ++i) {
      const Line& l = net.lines()[i];
      if (net.bus_pos(l.from_bus) == static_cast<int>(n))
        terms.push_back({f_idx[i], -1.0});
      if (net.bus_pos(l.to_bus) == static_cast<int>(n))
        terms.push_back({f_idx[i], 1.0});
    }
    m.add_constraint("balance_" + std::to_string(net.buses()[n].id),
                     std::move(terms), Relation::kEqual, inst.demand[n]);
  }
  m.set_objective(milp::Sense::kMinimize, cost_terms(net, m));
  return m;
}

}  // namespace ots
