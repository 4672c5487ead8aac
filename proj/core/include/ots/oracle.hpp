#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ots/formulation.hpp"
#include "ots/netmodel.hpp"

namespace ots {

struct OracleResult {
  double cost = 0.0;
  std::vector<int> x_opt;        // by line position; 1 = closed
  std::map<int, double> flows;   // line id -> MW at the optimum
  long n_feasible = 0;
};

/// Ground truth by enumeration: solves the fixed-topology DC-OPF for every
/// one of the 2^|L| status vectors and returns the global minimum. Ties
/// break toward the lexicographically largest status vector (most lines
/// closed). Throws TooLargeError beyond max_lines and
/// InfeasibleEverywhereError when no topology is feasible.
OracleResult brute_force(const Network& net, const Instance& inst,
                         int max_lines = 20);

struct BoundsViolation {
  std::vector<int> topology;
  int line_id;  // -1 when no single line can be blamed
  std::string reason;
};

/// Checks that `bounds` exclude no topology whose oracle cost is within the
/// cap: closed-line flows must fit the flow bounds and some angle assignment
/// must keep every open line's dummy flow inside its big-M box. Returns the
/// first violation found, or nullopt.
std::optional<BoundsViolation> verify_bounds(const Network& net,
                                             const Instance& inst,
                                             const Bounds& bounds,
                                             std::optional<double> cap,
                                             int max_lines = 20);

}  // namespace ots
