#pragma once

#include <optional>
#include <vector>

#include "bamsim/types.hpp"

namespace bamsim::detail {

// Feasibility of placing integral demands into per-class budgets, one budget
// per demand. A demand placed in its own class's budget is native; any other
// placement is a loan from that budget's class.
//
// Exact dynamic program over the load vector of the first N-1 budgets (the
// last budget's load is implied by the running total), pseudo-polynomial in
// the budget sizes, which stay small because bandwidth is integral.

// True when every size can be placed without exceeding any budget.
bool packable(const std::vector<Bandwidth>& budgets,
              const std::vector<Bandwidth>& sizes);

// Budget index per item, or nullopt when infeasible. `pinned[i] >= 0` forces
// item i's budget. Otherwise item i takes the first feasible entry of
// `preference[i]` (deterministic canonical assignment).
std::optional<std::vector<int>> pack_assign(
    const std::vector<Bandwidth>& budgets, const std::vector<Bandwidth>& sizes,
    const std::vector<int>& pinned,
    const std::vector<std::vector<int>>& preference);

}  // namespace bamsim::detail
