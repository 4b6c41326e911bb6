#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hvrp/instances.hpp"

namespace hvrp {

enum LocalSearchOp : unsigned {
  kTwoOpt = 1u << 0,
  kRelocate = 1u << 1,
  kSwap = 1u << 2,
  kTwoOptStar = 1u << 3,
  kAllOps = kTwoOpt | kRelocate | kSwap | kTwoOptStar,
};

struct SolverConfig {
  /// Wall-clock budget in seconds; ignored when iteration_limit is set.
  double time_limit = 1.0;
  /// Iteration-budget stopping. The clock is never read in this mode, so the
  /// result depends only on (instance, config).
  std::optional<long> iteration_limit;
  unsigned local_search_ops = kAllOps;
  std::uint64_t seed = 1;
  /// Fixed cost charged per route in the objective (CLRP route opening cost).
  double route_fixed_cost = 0.0;
  /// Candidate list size for the granular neighborhoods.
  int granular_neighbors = 20;

  void validate() const;
};

struct CvrpResult {
  std::vector<Route> routes;  // customer indices local to the instance
  double cost = 0.0;          // total tour length, fixed route costs excluded
  double elapsed = 0.0;       // seconds
  long iterations = 0;
};

/// Clarke-Wright savings, then iterated local search with ruin-and-recreate
/// perturbations. Throws InfeasibleError when the fleet limit cannot be met.
CvrpResult solve_heuristic(const CvrpInstance& inst, const SolverConfig& cfg);

constexpr std::size_t kExactMaxCustomers = 10;

/// Optimal solution by Held-Karp tours over every capacity-feasible subset
/// and a set-partition DP. Throws SizeError above kExactMaxCustomers.
CvrpResult solve_exact(const CvrpInstance& inst, double route_fixed_cost = 0.0);

/// Recomputed total tour length. Throws InfeasibleError on an unknown,
/// duplicated or missing customer, an overloaded route, or fleet overflow.
double evaluate_solution(const CvrpInstance& inst, std::span<const Route> routes);

/// Builds Route records (load, cost) from customer sequences.
std::vector<Route> make_routes(const CvrpInstance& inst, const std::vector<std::vector<int>>& sequences);

/// Solver time limit by approximate subproblem size: 0.1 s below 100
/// customers, 1.0 s below 200, 2.0 s otherwise.
double time_limit_for_size(double subproblem_size);

/// Predictor batch size by approximate subproblem size: 512/256/128/64/32.
std::size_t batch_size_for_size(double subproblem_size);

}  // namespace hvrp
