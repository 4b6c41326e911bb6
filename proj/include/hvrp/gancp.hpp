#pragma once

// Genetic search over customer -> depot assignments. Individuals are scored
// by the predicted cost of their CVRP subproblems, a diversity bonus and a
// capacity penalty; the best predicted assignments are then routed with the
// CVRP heuristic.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hvrp/cvrp_solver.hpp"
#include "hvrp/estimators.hpp"
#include "hvrp/instances.hpp"
#include "hvrp/random.hpp"

namespace hvrp {

struct GaConfig {
  int pop_low = 60;    // P_L, children per generation
  int pop_high = 100;  // P_H, pool size after selection
  int generations = 150;
  int stall_limit = 30;
  double p_repair = 0.8;
  double p_flip = 0.5;  // p_m; SWAP otherwise
  double mutation_fraction = 0.05;
  double targeted_fraction = 0.05;
  double targeted_gene_fraction = 0.10;
  double elite_fraction = 0.01;
  double w1 = 1.0;
  double w2 = 0.3;
  double w3 = 2.0;
  int top_k = 5;
  bool inject_nda = true;
  std::uint64_t seed = 1;
  /// Final-stage budget per subproblem. Set: iteration limit (reproducible
  /// runs). Absent: wall-clock limits by subproblem size.
  std::optional<long> routing_iterations = 1500;

  void validate() const;
};

/// The assignment problem the GA searches. Built from an MDVRP (capacity
/// limit m_d Q per depot) or a CLRP (limit W_d, opening costs).
struct AssignmentProblem {
  MdvrpInstance network;
  std::vector<double> depot_limit;   // +inf when unconstrained
  std::vector<double> opening_cost;  // F_d; zeros for MDVRP
  double route_cost = 0.0;           // f, per route
  bool location = false;             // depots open and close (CLRP)

  std::size_t num_customers() const { return network.num_customers(); }
  std::size_t num_depots() const { return network.num_depots(); }
  /// True when opening decisions carry a cost or capacity that binds.
  bool has_location_costs() const;
};

AssignmentProblem make_problem(const MdvrpInstance& inst);
AssignmentProblem make_problem(const ClrpInstance& inst);

/// Sum over depots of (l_d - limit_d)^+.
double overload(const AssignmentProblem& p, std::span<const long> loads);
bool is_overloaded(const AssignmentProblem& p, const Genes& genes);

/// Depot and approximate vehicle opening cost: sum F_d + f ceil(l_d / Q)
/// over serving depots. Zero for MDVRP.
double location_cost(const AssignmentProblem& p, std::span<const long> loads);

struct Individual {
  Genes genes;
  double cost = 0.0;  // predicted routing cost C(I) plus location_cost
  double penalty = 0.0;
  double diversity = 0.0;
  double fitness = 0.0;

  bool overloaded() const { return penalty > 0.0; }
};

/// Ranking key for elites and candidates: capacity-feasible first, then by cost.
bool better_candidate(const Individual& a, const Individual& b);

using Population = std::vector<Individual>;

/// Gene i = argmin_d dist(i, d), ties to the lower depot index.
Genes nearest_depot_assignment(const MdvrpInstance& inst);
/// Gene i = nearest depot of the customer closest to i.
Genes neighbor_depot_assignment(const MdvrpInstance& inst);
/// Gene i = second nearest depot of i.
Genes second_nearest_assignment(const MdvrpInstance& inst);

/// NDA, nearest neighbor's nearest depot, second nearest depot (more than two
/// depots only), then random individuals up to pop_high.
Population initial_population(const AssignmentProblem& p, const GaConfig& cfg, Rng& rng);

/// Moves random customers off overloaded depots to the nearest depot with
/// room, with probability p_repair per overloaded individual. Returns false
/// when some overloaded depot has no movable customer.
bool repair(Genes& genes, const AssignmentProblem& p, double p_repair, Rng& rng);
/// Repairs every individual; returns the number left overloaded.
int repair(Population& pop, const AssignmentProblem& p, double p_repair, Rng& rng);

/// Mean Hamming distance to the rest of the population, divided by N |pop|.
std::vector<double> diversity(std::span<const Genes> pop);

/// Fills cost-dependent fitness for a population whose cost and penalty are
/// set: w1 C~ - w2 d~ + w3 C~ penalty, min-max normalized over `pop`.
void assign_fitness(Population& pop, const GaConfig& cfg);

/// Two distinct individuals, each the winner of a binary tournament.
std::pair<std::size_t, std::size_t> select_parents(const Population& pop, Rng& rng);
std::size_t tournament(const Population& pop, Rng& rng);

Genes crossover(const Genes& a, const Genes& b, Rng& rng);

/// FLIP with probability p_flip, otherwise SWAP, on each gene with
/// probability mutation_fraction. Returns the number of operations applied.
int mutate(Genes& genes, int num_depots, const GaConfig& cfg, Rng& rng);

/// Copies a targeted_gene_fraction of random positions from `elite`.
void copy_from_elite(Genes& genes, const Genes& elite, double fraction, Rng& rng);

/// Reassigns a tenth of random customers of `genes` to their nearest depot
/// or their nearest neighbor's nearest depot, among depots already serving.
void move_to_near_depot(Genes& genes, const AssignmentProblem& p, Rng& rng);

struct GenerationStats {
  int generation = 0;
  double best_cost = 0.0;  // best key over the pool
  bool best_overloaded = false;
  std::size_t evaluated = 0;  // new unique individuals predicted
};

struct EvolveResult {
  Population candidates;  // ranked by better_candidate
  std::vector<GenerationStats> history;
  std::size_t predictions = 0;  // subproblem estimates requested
  double elapsed = 0.0;
};

/// Caches subproblem estimates keyed by (depot, customer set).
class CostCache {
 public:
  CostCache(const AssignmentProblem& p, const CostEstimator& est) : p_(p), est_(est) {}
  /// Predicted routing cost of every assignment, batched over unseen subproblems.
  std::vector<double> routing_costs(std::span<const Genes> genes);
  std::size_t requested() const { return requested_; }

 private:
  const AssignmentProblem& p_;
  const CostEstimator& est_;
  std::map<std::pair<int, std::vector<int>>, double> memo_;
  std::size_t requested_ = 0;
};

/// The generation loop. Stops after cfg.generations or cfg.stall_limit
/// generations without improvement of the best key.
EvolveResult evolve(const AssignmentProblem& p, const CostEstimator& est, const GaConfig& cfg);

struct RoutedCandidate {
  Genes genes;
  double predicted_cost = 0.0;
  std::optional<double> actual_cost;  // absent when routing failed
  bool nda = false;
};

struct FinalSolution {
  Genes assignment;
  RoutingSolution solution;
  double predicted_cost = 0.0;
  std::vector<RoutedCandidate> routed;
};

/// Routes the top_k candidates (and NDA when enabled and within limits) and
/// keeps the cheapest. Throws InfeasibleError when none can be routed.
FinalSolution finalize(const AssignmentProblem& p, const CostEstimator& est, const Population& candidates,
                       const GaConfig& cfg);

/// Routes one assignment. Throws InfeasibleError when a subproblem cannot be
/// served within its fleet.
RoutingSolution route_assignment(const AssignmentProblem& p, const Genes& genes, const GaConfig& cfg);

struct SolveResult {
  FinalSolution final;
  EvolveResult search;
  double finalize_elapsed = 0.0;
};

SolveResult solve_mdvrp(const MdvrpInstance& inst, const CostEstimator& est, const GaConfig& cfg);

}  // namespace hvrp
