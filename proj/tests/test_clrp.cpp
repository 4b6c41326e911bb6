#include <gtest/gtest.h>

#include <algorithm>
#include <limits>

#include "hvrp/clrp.hpp"
#include "hvrp/error.hpp"
#include "support/oracles.hpp"

using namespace hvrp;

namespace {

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

ClrpInstance random_clrp(int n, int d, std::uint64_t seed, double opening, double route_cost, double capacity) {
  InstanceSpec spec;
  spec.customers = {n, n};
  spec.depots = {d, d};
  ClrpInstance c;
  c.network = generate_mdvrp(spec, seed);
  c.network.vehicles.assign(d, std::nullopt);
  c.depot_capacity.assign(d, capacity);
  c.opening_cost.assign(d, opening);
  c.route_cost = route_cost;
  return c;
}

class RadialEstimator final : public CostEstimator {
 public:
  std::vector<double> estimate_batch(std::span<const CvrpInstance> xs) const override {
    std::vector<double> out;
    for (const auto& x : xs) {
      double s = 0;
      for (const auto& c : x.customers) s += 2 * distance(x.depot, c.pos);
      out.push_back(s);
    }
    return out;
  }
  std::string name() const override { return "radial"; }
};

GaConfig quick(std::uint64_t seed = 1) {
  GaConfig cfg;
  cfg.seed = seed;
  cfg.generations = 40;
  cfg.routing_iterations = 300;
  return cfg;
}

}  // namespace

TEST(ClrpTerms, VehicleLowerBound) {
  ClrpInstance c;
  c.network.depots = {{0, 0}, {5, 5}};
  c.network.capacity = 30;
  for (int q : {30, 30, 30, 5}) c.network.customers.push_back({{1, 1}, q});
  c.network.vehicles.assign(2, std::nullopt);
  c.depot_capacity = {100, 100};
  c.opening_cost = {7, 9};
  c.route_cost = 10;
  const auto t = clrp_terms(c, {0, 0, 0, 0}, 12.5);
  EXPECT_DOUBLE_EQ(t.vehicle_opening, 40.0);  // ceil(95 / 30) = 4 routes
  EXPECT_DOUBLE_EQ(t.depot_opening, 7.0);     // depot 1 serves nobody
  EXPECT_DOUBLE_EQ(t.capacity_excess, 0.0);
  EXPECT_DOUBLE_EQ(t.routing, 12.5);
  EXPECT_DOUBLE_EQ(clrp_terms(c, {0, 0, 0, 1}, 0).capacity_excess, 0.0);
  c.depot_capacity = {60, 100};
  EXPECT_DOUBLE_EQ(clrp_terms(c, {0, 0, 0, 0}, 0).capacity_excess, 35.0);
}

TEST(ClrpDecode, OpenMatchesGenes) {
  EXPECT_EQ(open_depots({2, 0, 2}, 4), (std::vector<bool>{true, false, true, false}));
}

TEST(ClrpInit, CoversDemandAndVariesOpenSets) {
  const auto c = random_clrp(40, 5, 3, 500, 0, 0);
  auto inst = c;
  const double demand = static_cast<double>(c.network.total_demand());
  inst.depot_capacity.assign(5, demand / 2.5);
  GaConfig cfg;
  std::set<std::size_t> counts;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    Rng rng(s);
    for (const auto& ind : clrp_initial_population(inst, cfg, rng)) {
      const auto open = open_depots(ind.genes, 5);
      double cap = 0;
      for (int d = 0; d < 5; ++d) cap += open[d] ? inst.depot_capacity[d] : 0.0;
      EXPECT_GE(cap, demand);
      const auto k = static_cast<std::size_t>(std::count(open.begin(), open.end(), true));
      EXPECT_GE(k, 1u);
      EXPECT_LE(k, 5u);
      counts.insert(k);
    }
  }
  EXPECT_GE(counts.size(), 2u);
}

TEST(ClrpFitness, ReducesToMdvrpWithoutLocationCosts) {
  auto c = random_clrp(30, 3, 4, 0, 0, kUnbounded);
  const auto pc = make_problem(c);
  auto m = c.network;
  const auto pm = make_problem(m);
  EXPECT_FALSE(pc.has_location_costs());
  Rng rng(2);
  Population a, b;
  RadialEstimator est;
  CostCache ca(pc, est), cb(pm, est);
  for (int k = 0; k < 20; ++k) {
    Genes g(30);
    for (auto& x : g) x = uniform_int(rng, 0, 2);
    const double rc = ca.routing_costs(std::span(&g, 1))[0];
    const double rm = cb.routing_costs(std::span(&g, 1))[0];
    a.push_back({g, rc + location_cost(pc, depot_loads(c.network, g))});
    b.push_back({g, rm});
  }
  GaConfig cfg;
  assign_fitness(a, cfg);
  assign_fitness(b, cfg);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(a[k].fitness, b[k].fitness);
}

TEST(ClrpRepair, MovesOffCapacitatedDepot) {
  ClrpInstance c;
  c.network.depots = {{0, 0}, {10, 0}, {50, 50}};
  c.network.capacity = 10;
  for (int i = 0; i < 6; ++i) c.network.customers.push_back({{1.0 + i, 0}, 2});
  c.network.vehicles.assign(3, std::nullopt);
  c.depot_capacity = {6, 8, 100};
  c.opening_cost = {1, 1, 1};
  const auto p = make_problem(c);
  Genes g{0, 0, 0, 0, 0, 1};
  Rng rng(5);
  EXPECT_TRUE(repair(g, p, 1.0, rng));
  const auto loads = depot_loads(c.network, g);
  EXPECT_LE(loads[0], 6);
  EXPECT_LE(loads[1], 8);
  EXPECT_EQ(loads[2], 0);  // an open depot with room is preferred over opening one
  Genes ok{0, 0, 1, 1, 1, 1};
  const auto before = ok;
  EXPECT_TRUE(repair(ok, p, 1.0, rng));
  EXPECT_EQ(ok, before);
}

TEST(ClrpMutation, TargetsServingDepots) {
  const auto c = random_clrp(30, 4, 6, 100, 0, kUnbounded);
  const auto p = make_problem(c);
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    Genes g(30);
    for (auto& x : g) x = uniform_int(rng, 0, 1) * 2;  // depots 0 and 2 serve
    move_to_near_depot(g, p, rng);
    for (int x : g) EXPECT_TRUE(x == 0 || x == 2);
  }
}

TEST(ClrpSolve, ExpensiveDepotsLeaveOne) {
  auto c = random_clrp(25, 3, 7, 0, 0, kUnbounded);
  c.opening_cost = {1e6, 1e6, 0};
  RadialEstimator est;
  const auto r = solve_clrp(c, est, quick());
  const auto open = open_depots(r.final.assignment, 3);
  EXPECT_EQ(open, (std::vector<bool>{false, false, true}));
}

TEST(ClrpSolve, TotalCostRecomputes) {
  const auto c = random_clrp(30, 4, 8, 300, 20, 1e9);
  RadialEstimator est;
  const auto r = solve_clrp(c, est, quick());
  EXPECT_NEAR(check_clrp_solution(c, r.final.solution), r.final.solution.total_cost, 1e-9);
}

TEST(ClrpSolve, ReductionIdentity) {
  const auto c = random_clrp(30, 3, 9, 0, 0, kUnbounded);
  RadialEstimator est;
  const auto a = solve_clrp(c, est, quick(5));
  const auto b = solve_mdvrp(c.network, est, quick(5));
  EXPECT_EQ(a.final.solution.total_cost, b.final.solution.total_cost);
  EXPECT_EQ(a.final.assignment, b.final.assignment);
}

TEST(ClrpSolve, MatchesExhaustiveOptimumOnDeskInstance) {
  auto c = random_clrp(10, 3, 10, 0, 15, 0);
  const double demand = static_cast<double>(c.network.total_demand());
  c.opening_cost = {120, 80, 150};
  c.depot_capacity = {demand * 0.7, demand * 0.6, demand};
  const oracle::Tables t(c.network, c.route_cost);
  const auto opt = oracle::enumerate_assignments(t, [&](int d, long load) {
    return static_cast<double>(load) > c.depot_capacity[d] ? oracle::kInf : c.opening_cost[d];
  });
  oracle::TableEstimator est(t);
  GaConfig cfg;
  cfg.routing_iterations = 2000;
  const auto r = solve_clrp(c, est, cfg);
  EXPECT_NEAR(r.final.solution.total_cost, opt.cost, 1e-6 * opt.cost);
}
