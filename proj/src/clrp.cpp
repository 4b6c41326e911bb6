#include "hvrp/clrp.hpp"

#include <chrono>

#include "hvrp/error.hpp"

namespace hvrp {

std::vector<bool> open_depots(const Genes& genes, std::size_t num_depots) {
  std::vector<bool> open(num_depots, false);
  for (int g : genes) open.at(static_cast<std::size_t>(g)) = true;
  return open;
}

ClrpTerms clrp_terms(const ClrpInstance& inst, const Genes& genes, double predicted_routing) {
  const auto loads = depot_loads(inst.network, genes);
  const long q = inst.network.capacity;
  ClrpTerms t;
  t.routing = predicted_routing;
  for (std::size_t d = 0; d < loads.size(); ++d) {
    if (loads[d] == 0) continue;
    t.depot_opening += inst.opening_cost[d];
    t.vehicle_opening += inst.route_cost * static_cast<double>((loads[d] + q - 1) / q);
    t.capacity_excess += std::max(0.0, static_cast<double>(loads[d]) - inst.depot_capacity[d]);
  }
  return t;
}

Population clrp_initial_population(const ClrpInstance& inst, const GaConfig& cfg, Rng& rng) {
  return initial_population(make_problem(inst), cfg, rng);
}

double check_clrp_solution(const ClrpInstance& inst, const RoutingSolution& sol) {
  MdvrpInstance net = inst.network;
  net.vehicles.assign(inst.num_depots(), std::nullopt);
  const double routing = check_solution(net, sol);
  double opening = 0.0;
  for (const auto& dr : sol.depots) {
    if (dr.routes.empty()) continue;
    long load = 0;
    for (const auto& r : dr.routes)
      for (int c : r.customers) load += net.customers[c].demand;
    if (static_cast<double>(load) > inst.depot_capacity[dr.depot])
      throw InfeasibleError("depot " + std::to_string(dr.depot) + " capacity exceeded: load " + std::to_string(load));
    opening += inst.opening_cost[dr.depot] + inst.route_cost * static_cast<double>(dr.routes.size());
  }
  return routing + opening;
}

SolveResult solve_clrp(const ClrpInstance& inst, const CostEstimator& est, const GaConfig& cfg) {
  const auto p = make_problem(inst);
  SolveResult r;
  r.search = evolve(p, est, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  r.final = finalize(p, est, r.search.candidates, cfg);
  r.finalize_elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace hvrp
