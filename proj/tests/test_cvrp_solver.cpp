#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "hvrp/cvrp_solver.hpp"
#include "hvrp/error.hpp"

using namespace hvrp;

namespace {

// Every CVRP solution is some customer permutation cut into consecutive
// routes, so permutations x optimal split enumerate the whole space.
double brute_force(const CvrpInstance& inst, double fixed = 0.0) {
  const int n = static_cast<int>(inst.size());
  const int fleet = inst.fleet_limit.value_or(n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    // split[k][r]: best cost covering perm[0..k) with r routes
    std::vector<std::vector<double>> split(n + 1, std::vector<double>(fleet + 1, std::numeric_limits<double>::infinity()));
    split[0][0] = 0;
    for (int a = 0; a < n; ++a)
      for (int r = 0; r < fleet; ++r) {
        if (split[a][r] == std::numeric_limits<double>::infinity()) continue;
        long load = 0;
        for (int b = a; b < n; ++b) {
          load += inst.customers[perm[b]].demand;
          if (load > inst.capacity) break;
          std::vector<int> seg(perm.begin() + a, perm.begin() + b + 1);
          const double c = split[a][r] + tour_length(inst.depot, inst.customers, seg) + fixed;
          split[b + 1][r + 1] = std::min(split[b + 1][r + 1], c);
        }
      }
    for (int r = 0; r <= fleet; ++r) best = std::min(best, split[n][r]);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

CvrpInstance random_instance(int n, std::uint64_t seed, int capacity = 0) {
  InstanceSpec spec;
  spec.customers = {n, n};
  auto inst = generate_cvrp(spec, seed);
  if (capacity > 0) {
    inst.capacity = std::max(capacity, std::max_element(inst.customers.begin(), inst.customers.end(),
                                                        [](auto& a, auto& b) { return a.demand < b.demand; })
                                           ->demand);
  }
  return inst;
}

SolverConfig fixed_iterations(long its, std::uint64_t seed = 1) {
  SolverConfig cfg;
  cfg.iteration_limit = its;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(CvrpSolver, ExactMatchesBruteForce) {
  for (std::uint64_t s = 1; s <= 12; ++s) {
    const auto inst = random_instance(2 + static_cast<int>(s % 5), s, 120);
    const auto res = solve_exact(inst);
    EXPECT_NEAR(res.cost, brute_force(inst), 1e-7) << inst.name;
    EXPECT_NEAR(evaluate_solution(inst, res.routes), res.cost, 1e-9);
  }
}

TEST(CvrpSolver, ExactWithFixedCostAndFleet) {
  for (std::uint64_t s = 1; s <= 6; ++s) {
    auto inst = random_instance(6, s + 100, 150);
    EXPECT_NEAR(solve_exact(inst, 50.0).routes.size() * 50.0 + solve_exact(inst, 50.0).cost,
                brute_force(inst, 50.0), 1e-7);
    const int lb = static_cast<int>((inst.total_demand() + inst.capacity - 1) / inst.capacity);
    inst.fleet_limit = lb;
    double bf = std::numeric_limits<double>::infinity();
    try {
      bf = brute_force(inst);
    } catch (...) {
    }
    if (bf < std::numeric_limits<double>::infinity()) {
      const auto r = solve_exact(inst);
      EXPECT_LE(static_cast<int>(r.routes.size()), lb);
      EXPECT_NEAR(r.cost, bf, 1e-7);
    }
  }
}

TEST(CvrpSolver, ExactRejectsLargeInstances) {
  EXPECT_THROW(solve_exact(random_instance(static_cast<int>(kExactMaxCustomers) + 1, 1)), SizeError);
}

TEST(CvrpSolver, HeuristicNeverBeatsOptimum) {
  for (std::uint64_t s = 1; s <= 30; ++s) {
    const auto inst = random_instance(3 + static_cast<int>(s % 5), s + 500, 150);
    const auto h = solve_heuristic(inst, fixed_iterations(200, s));
    const double opt = brute_force(inst);
    EXPECT_GE(h.cost, opt - 1e-7);
    EXPECT_LE(h.cost, opt * 1.02 + 1e-7) << inst.name;
    EXPECT_NEAR(evaluate_solution(inst, h.routes), h.cost, 1e-9);
  }
}

TEST(CvrpSolver, HeuristicRespectsFleetLimit) {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    auto inst = random_instance(40, s);
    const int lb = static_cast<int>((inst.total_demand() + inst.capacity - 1) / inst.capacity);
    inst.fleet_limit = lb + 1;
    const auto r = solve_heuristic(inst, fixed_iterations(100, s));
    EXPECT_LE(static_cast<int>(r.routes.size()), lb + 1);
    EXPECT_NO_THROW(evaluate_solution(inst, r.routes));
  }
}

TEST(CvrpSolver, HeuristicReportsImpossibleFleet) {
  auto inst = random_instance(20, 3);
  const int lb = static_cast<int>((inst.total_demand() + inst.capacity - 1) / inst.capacity);
  inst.fleet_limit = lb - 1;
  if (lb > 1) EXPECT_THROW(solve_heuristic(inst, fixed_iterations(10)), InfeasibleError);
}

TEST(CvrpSolver, IterationModeIsDeterministic) {
  const auto inst = random_instance(60, 9);
  const auto a = solve_heuristic(inst, fixed_iterations(150, 4));
  const auto b = solve_heuristic(inst, fixed_iterations(150, 4));
  EXPECT_EQ(a.routes, b.routes);
  EXPECT_EQ(a.cost, b.cost);
}

TEST(CvrpSolver, ImprovesOnSavingsStart) {
  const auto inst = random_instance(80, 21);
  const auto start = solve_heuristic(inst, fixed_iterations(0));
  const auto improved = solve_heuristic(inst, fixed_iterations(300));
  EXPECT_LE(improved.cost, start.cost + 1e-9);
}

TEST(CvrpSolver, TimeLimitHonoured) {
  const auto inst = random_instance(100, 2);
  SolverConfig cfg;
  cfg.time_limit = 0.2;
  const auto r = solve_heuristic(inst, cfg);
  EXPECT_LT(r.elapsed, 0.6);
  EXPECT_NO_THROW(evaluate_solution(inst, r.routes));
}

TEST(CvrpSolver, SingleCustomerAndOperatorSubsets) {
  CvrpInstance one{"one", {0, 0}, {{{3, 4}, 5}}, 10, std::nullopt};
  EXPECT_DOUBLE_EQ(solve_heuristic(one, fixed_iterations(5)).cost, 10.0);
  const auto inst = random_instance(30, 5);
  for (unsigned ops : {0u, unsigned(kTwoOpt), unsigned(kRelocate), unsigned(kSwap), unsigned(kTwoOptStar)}) {
    auto cfg = fixed_iterations(20);
    cfg.local_search_ops = ops;
    EXPECT_NO_THROW(evaluate_solution(inst, solve_heuristic(inst, cfg).routes));
  }
}

TEST(CvrpSolver, EvaluateDetectsViolations) {
  CvrpInstance inst{"e", {0, 0}, {{{1, 0}, 4}, {{2, 0}, 4}}, 5, 1};
  EXPECT_THROW(evaluate_solution(inst, make_routes(inst, {{0, 1}})), InfeasibleError);
  EXPECT_THROW(evaluate_solution(inst, make_routes(inst, {{0}, {1}})), InfeasibleError);
  inst.fleet_limit.reset();
  EXPECT_DOUBLE_EQ(evaluate_solution(inst, make_routes(inst, {{0}, {1}})), 6.0);
  EXPECT_THROW(evaluate_solution(inst, make_routes(inst, {{0}})), InfeasibleError);
}

TEST(CvrpSolver, SizeTables) {
  EXPECT_EQ(time_limit_for_size(60), 0.1);
  EXPECT_EQ(time_limit_for_size(150), 1.0);
  EXPECT_EQ(time_limit_for_size(450), 2.0);
  EXPECT_EQ(batch_size_for_size(50), 512u);
  EXPECT_EQ(batch_size_for_size(199), 256u);
  EXPECT_EQ(batch_size_for_size(250), 128u);
  EXPECT_EQ(batch_size_for_size(300), 64u);
  EXPECT_EQ(batch_size_for_size(500), 32u);
}
