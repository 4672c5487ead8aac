#include "ots/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ots/milp.hpp"

namespace ots {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

milp::SolveControls oracle_controls() {
  milp::SolveControls controls;
  controls.time_limit = 600.0;
  controls.rel_gap = 0.0;
  controls.threads = 1;
  return controls;
}

}  // namespace

OracleResult brute_force(const Network& net, const Instance& inst,
                         int max_lines) {
  const int n = static_cast<int>(net.lines().size());
  if (n > max_lines)
    throw TooLargeError("brute force over " + std::to_string(n) +
                        " lines exceeds the cap of " +
                        std::to_string(max_lines));
  if (inst.demand.size() != net.buses().size())
    throw ValidationError("instance/network bus count mismatch");

  const milp::SolveControls controls = oracle_controls();
  OracleResult best;
  best.cost = kInf;
  bool found = false;
  std::vector<int> status(n, 0);

  // Gray-code order: consecutive topologies differ in one line.
  const std::uint64_t total = 1ULL << n;
  for (std::uint64_t g = 0; g < total; ++g) {
    const std::uint64_t code = g ^ (g >> 1);
    for (int i = 0; i < n; ++i) status[i] = (code >> i) & 1ULL ? 1 : 0;

    const milp::ModelSpec model = build_dcopf_fixed(net, inst, status);
    const milp::SolveOutcome outcome = milp::solve(model, controls);
    if (outcome.status != milp::SolveStatus::kOptimal) continue;
    ++best.n_feasible;

    bool take = false, improves = false;
    if (!found) {
      take = improves = true;
    } else {
      const double tol = 1e-9 * std::max(1.0, std::abs(best.cost));
      improves = outcome.objective < best.cost - tol;
      take = improves ||
             (outcome.objective <= best.cost + tol && status > best.x_opt);
    }
    if (take) {
      if (improves) best.cost = outcome.objective;
      best.x_opt = status;
      best.flows.clear();
      for (const Line& l : net.lines())
        best.flows[l.id] = outcome.value(var_f(l.id));
    }
    found = true;
  }
  if (!found)
    throw InfeasibleEverywhereError("no feasible topology for instance " +
                                    std::to_string(inst.seed_info.index) +
                                    " of " + net.name());
  return best;
}

namespace {

// Elastic angle-extension LP: minimize the uniform big-M overshoot t needed
// to place angles so closed lines reproduce their flows and open lines stay
// inside [m_lo - t, m_hi + t].
struct ExtensionCheck {
  bool ok;
  int worst_line;
  double overshoot;
};

ExtensionCheck check_extension(const Network& net, const Bounds& bounds,
                               const std::vector<int>& status,
                               const std::map<int, double>& flows) {
  using milp::Relation;
  milp::ModelSpec m;
  std::vector<int> th_idx;
  for (const Bus& b : net.buses()) {
    const bool ref = b.id == 1;
    th_idx.push_back(
        m.add_variable(var_theta(b.id), ref ? 0.0 : -kInf, ref ? 0.0 : kInf));
  }
  const int t_idx = m.add_variable("overshoot", 0.0, kInf);
  bool any_open = false;
  for (size_t i = 0; i < net.lines().size(); ++i) {
    const Line& l = net.lines()[i];
    const int a = net.bus_pos(l.from_bus), b = net.bus_pos(l.to_bus);
    const std::string id = std::to_string(l.id);
    if (status[i]) {
      m.add_constraint("tie_" + id,
                       {{th_idx[a], l.susceptance}, {th_idx[b], -l.susceptance}},
                       Relation::kEqual, flows.at(l.id));
    } else {
      any_open = true;
      const LineBounds& lb = bounds.at(l.id);
      m.add_constraint("open_hi_" + id,
                       {{th_idx[a], l.susceptance},
                        {th_idx[b], -l.susceptance},
                        {t_idx, -1.0}},
                       Relation::kLessEqual, lb.m_hi);
      m.add_constraint("open_lo_" + id,
                       {{th_idx[a], l.susceptance},
                        {th_idx[b], -l.susceptance},
                        {t_idx, 1.0}},
                       Relation::kGreaterEqual, lb.m_lo);
    }
  }
  if (!any_open) return {true, -1, 0.0};
  m.set_objective(milp::Sense::kMinimize, {{t_idx, 1.0}});
  const milp::SolveOutcome outcome = milp::solve(m, oracle_controls());
  if (outcome.status != milp::SolveStatus::kOptimal)
    return {false, -1, kInf};
  const double overshoot = outcome.objective;
  if (overshoot <= 1e-6) return {true, -1, overshoot};

  // Blame the open line with the largest box violation at the optimum.
  int worst = -1;
  double worst_violation = 0.0;
  for (size_t i = 0; i < net.lines().size(); ++i) {
    if (status[i]) continue;
    const Line& l = net.lines()[i];
    const double ftil =
        l.susceptance * (outcome.value(var_theta(l.from_bus)) -
                         outcome.value(var_theta(l.to_bus)));
    const LineBounds& lb = bounds.at(l.id);
    const double violation =
        std::max({ftil - lb.m_hi, lb.m_lo - ftil, 0.0});
    if (violation > worst_violation) {
      worst_violation = violation;
      worst = l.id;
    }
  }
  return {false, worst, overshoot};
}

}  // namespace

std::optional<BoundsViolation> verify_bounds(const Network& net,
                                             const Instance& inst,
                                             const Bounds& bounds,
                                             std::optional<double> cap,
                                             int max_lines) {
  const int n = static_cast<int>(net.lines().size());
  if (n > max_lines)
    throw TooLargeError("verify_bounds over " + std::to_string(n) +
                        " lines exceeds the cap of " +
                        std::to_string(max_lines));
  for (const Line& l : net.lines()) bounds.at(l.id);

  const milp::SolveControls controls = oracle_controls();
  std::vector<int> status(n, 0);
  const std::uint64_t total = 1ULL << n;
  for (std::uint64_t code = 0; code < total; ++code) {
    for (int i = 0; i < n; ++i) status[i] = (code >> i) & 1ULL ? 1 : 0;
    const milp::ModelSpec model = build_dcopf_fixed(net, inst, status);
    const milp::SolveOutcome outcome = milp::solve(model, controls);
    if (outcome.status != milp::SolveStatus::kOptimal) continue;
    if (cap && outcome.objective > *cap * (1.0 + 1e-9) + 1e-9) continue;

    std::map<int, double> flows;
    for (const Line& l : net.lines()) flows[l.id] = outcome.value(var_f(l.id));

    for (size_t i = 0; i < net.lines().size(); ++i) {
      if (!status[i]) continue;
      const Line& l = net.lines()[i];
      const LineBounds& lb = bounds.at(l.id);
      const double tol = 1e-6 * std::max(1.0, std::abs(flows[l.id]));
      if (flows[l.id] < lb.f_lo - tol || flows[l.id] > lb.f_hi + tol)
        return BoundsViolation{status, l.id,
                               "closed-line flow " +
                                   std::to_string(flows[l.id]) +
                                   " outside tightened flow bounds"};
    }
    const ExtensionCheck ext = check_extension(net, bounds, status, flows);
    if (!ext.ok)
      return BoundsViolation{
          status, ext.worst_line,
          "no angle assignment keeps open-line dummy flows inside the big-M "
          "bounds (overshoot " +
              std::to_string(ext.overshoot) + " MW)"};
  }
  return std::nullopt;
}

}  // namespace ots
