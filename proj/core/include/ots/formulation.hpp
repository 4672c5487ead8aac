#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ots/milp.hpp"
#include "ots/netmodel.hpp"

namespace ots {

/// Per-line flow bounds (f_lo, f_hi) and big-M bounds (m_lo, m_hi), MW.
/// Both intervals contain zero and never exceed the line's thermal limits.
struct LineBounds {
  double f_lo, f_hi;
  double m_lo, m_hi;
  double f_width() const { return f_hi - f_lo; }
  double m_width() const { return m_hi - m_lo; }
};

class Bounds {
 public:
  Bounds() = default;

  const LineBounds& at(int line_id) const;
  bool contains(int line_id) const { return by_line_.contains(line_id); }
  void set(int line_id, const LineBounds& lb);
  size_t size() const { return by_line_.size(); }
  const std::map<int, LineBounds>& entries() const { return by_line_; }

 private:
  std::map<int, LineBounds> by_line_;
};

/// Which line-status variables stay integral. Lines in `binary_lines` are
/// binary, all others relax to [0, 1]; `fixed` pins statuses outright and
/// takes precedence over both.
struct RelaxationSpec {
  std::set<int> binary_lines;
  std::map<int, int> fixed;

  static RelaxationSpec all_binary(const Network& net);
  static RelaxationSpec fully_relaxed() { return {}; }
  void validate(const Network& net) const;
};

/// Optional cost ceiling sum(c_n p_n) <= cap, used inside bounding problems.
struct CostCap {
  std::optional<double> cap;
};

/// Stable variable naming shared by all builders and dumps.
std::string var_p(int bus_id);
std::string var_theta(int bus_id);
std::string var_f(int line_id);
std::string var_ftil(int line_id);
std::string var_x(int line_id);

/// The switching MILP: min cost over dispatch, angles, flows and line
/// statuses, with the big-M coupling rows
///   (1-x) m_lo <= -f + ftil <= (1-x) m_hi  and  x f_lo <= f <= x f_hi.
milp::ModelSpec build_ots(const Network& net, const Instance& inst,
                          const Bounds& bounds, const RelaxationSpec& relax,
                          const CostCap& cap);

enum class BoundTarget { kFlow, kDummy };

/// One bounding problem: optimize f_l (target flow, x_l = 1) or ftil_l
/// (target dummy, x_l = 0) over the partially relaxed feasible set
/// intersected with the cost-cap region. The cap must be present.
milp::ModelSpec build_bounding(const Network& net, const Instance& inst,
                               const Bounds& bounds, int line_id,
                               BoundTarget target, milp::Sense sense,
                               const RelaxationSpec& relax, const CostCap& cap);

/// DC-OPF with every line status pinned: open lines drop out (flow fixed to
/// zero, no Kirchhoff row), closed lines keep full thermal limits, and each
/// connected component of the closed-line subgraph gets one angle reference
/// (its lowest bus id). No big-M constants anywhere.
milp::ModelSpec build_dcopf_fixed(const Network& net, const Instance& inst,
                                  const std::vector<int>& status);

/// Flips integrality flags (and applies fixings) on an already built model.
void apply_relaxation(milp::ModelSpec& model, const Network& net,
                      const RelaxationSpec& relax);

}  // namespace ots
