#pragma once

// Location-routing on top of the assignment GA. A chromosome's open depots
// are exactly the depots its genes use, so only the assignment is stored.

#include <vector>

#include "hvrp/gancp.hpp"

namespace hvrp {

/// Indicator of the depots serving at least one customer.
std::vector<bool> open_depots(const Genes& genes, std::size_t num_depots);

struct ClrpTerms {
  double routing = 0.0;        // predicted
  double depot_opening = 0.0;  // sum of F_d over open depots
  double vehicle_opening = 0.0;  // f sum ceil(l_d / Q)
  double capacity_excess = 0.0;  // sum (l_d - W_d)^+
};

ClrpTerms clrp_terms(const ClrpInstance& inst, const Genes& genes, double predicted_routing);

Population clrp_initial_population(const ClrpInstance& inst, const GaConfig& cfg, Rng& rng);

/// Recomputes routing plus depot and route opening costs, checking visits,
/// vehicle loads and depot capacities. Throws InfeasibleError.
double check_clrp_solution(const ClrpInstance& inst, const RoutingSolution& sol);

SolveResult solve_clrp(const ClrpInstance& inst, const CostEstimator& est, const GaConfig& cfg);

}  // namespace hvrp
