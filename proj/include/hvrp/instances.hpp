#pragma once

// Problem and solution data types for CVRP, MDVRP and CLRP, feasibility
// checks, decomposition of a depot assignment into CVRP subproblems, and the
// random instance generators.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hvrp/random.hpp"

namespace hvrp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Euclidean distance, unrounded.
inline double distance(const Point& a, const Point& b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct Customer {
  Point pos;
  int demand = 0;

  friend bool operator==(const Customer&, const Customer&) = default;
};

/// Single-depot capacitated VRP. An absent fleet limit means unlimited vehicles.
struct CvrpInstance {
  std::string name;
  Point depot;
  std::vector<Customer> customers;
  int capacity = 0;
  std::optional<int> fleet_limit;

  std::size_t size() const noexcept { return customers.size(); }
  long total_demand() const noexcept;
  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  friend bool operator==(const CvrpInstance&, const CvrpInstance&) = default;
};

/// Multi-depot VRP with a homogeneous vehicle capacity. vehicles[d] is the
/// fleet size m_d at depot d; nullopt means unlimited.
struct MdvrpInstance {
  std::string name;
  std::vector<Point> depots;
  std::vector<Customer> customers;
  int capacity = 0;
  std::vector<std::optional<int>> vehicles;

  std::size_t num_customers() const noexcept { return customers.size(); }
  std::size_t num_depots() const noexcept { return depots.size(); }
  long total_demand() const noexcept;
  /// m_d * Q, or +infinity for an unlimited fleet.
  double depot_limit(std::size_t d) const noexcept;
  void validate() const;

  friend bool operator==(const MdvrpInstance&, const MdvrpInstance&) = default;
};

/// Capacitated location-routing instance. Vehicles are unlimited; each used
/// route pays route_cost, each opened depot pays opening_cost[d].
struct ClrpInstance {
  MdvrpInstance network;
  std::vector<double> depot_capacity;
  std::vector<double> opening_cost;
  double route_cost = 0.0;

  std::size_t num_customers() const noexcept { return network.num_customers(); }
  std::size_t num_depots() const noexcept { return network.num_depots(); }
  void validate() const;

  friend bool operator==(const ClrpInstance&, const ClrpInstance&) = default;
};

struct Route {
  std::vector<int> customers;  // indices into the owning instance's customer list
  int load = 0;
  double cost = 0.0;  // closed tour length depot -> ... -> depot

  friend bool operator==(const Route&, const Route&) = default;
};

struct DepotRoutes {
  int depot = 0;
  std::vector<Route> routes;

  friend bool operator==(const DepotRoutes&, const DepotRoutes&) = default;
};

struct RoutingSolution {
  std::vector<DepotRoutes> depots;
  double routing_cost = 0.0;
  double opening_cost = 0.0;  // nonzero only for CLRP
  double total_cost = 0.0;

  std::size_t num_routes() const noexcept;
};

/// Closed tour length of a customer sequence served from `depot`.
double tour_length(const Point& depot, std::span<const Customer> customers, std::span<const int> order);

/// Recomputes every route and the totals; throws InfeasibleError naming the
/// violated constraint (unknown customer, duplicate, missing, overload,
/// fleet overflow, route at a foreign depot).
double check_solution(const MdvrpInstance& inst, const RoutingSolution& sol);

// --- decomposition -------------------------------------------------------

using Genes = std::vector<int>;  // customer -> depot index (0-based)

struct Subproblem {
  int depot = 0;
  std::vector<int> customer_ids;  // ids in the parent instance, ascending
  CvrpInstance instance;
};

/// One CVRP subproblem per depot that has at least one assigned customer,
/// in increasing depot order.
std::vector<Subproblem> decompose(const MdvrpInstance& inst, const Genes& genes);

/// Total demand assigned to each depot.
std::vector<long> depot_loads(const MdvrpInstance& inst, const Genes& genes);

// --- generators ----------------------------------------------------------

enum class Positioning { Random, Clustered, RandomClustered };
enum class DemandModel { Uniform, Unitary, Quadrant };

struct IntRange {
  int lo = 0;
  int hi = 0;
  bool contains(int v) const noexcept { return v >= lo && v <= hi; }
};

struct InstanceSpec {
  IntRange customers{50, 500};
  IntRange depots{2, 10};
  Positioning positioning = Positioning::Random;
  DemandModel demand = DemandModel::Uniform;
  double grid_size = 1000.0;
  std::uint64_t seed = 1;

  /// Vehicle capacity Q = ceil(r * sum(q) / N) with r ~ U[lo, hi] the average
  /// route size.
  double route_size_lo = 3.0;
  double route_size_hi = 25.0;

  /// Clustered positioning: seeds ~ UD[lo, hi], attraction exp(-d / decay).
  IntRange cluster_seeds{3, 8};
  double cluster_decay = 40.0;

  /// MDVRP fleet sizing: m_d = ceil(fleet_slack * (sum(q) / D) / Q).
  double fleet_slack = 1.2;

  /// When set, D is drawn so that N/D lies inside (or, with
  /// outside_subproblem_range, outside) this closed range.
  std::optional<std::pair<double, double>> subproblem_range;
  bool outside_subproblem_range = false;

  void validate() const;
};

/// Quadrant 1..4 numbered counterclockwise about the grid center; axis
/// points go to the lower-numbered adjacent quadrant.
int quadrant_of(const Point& p, double grid_size) noexcept;

/// UD[51,100] in odd quadrants, UD[1,50] in even ones.
int quadrant_demand(const Point& p, double grid_size, Rng& rng);

CvrpInstance generate_cvrp(const InstanceSpec& spec, std::uint64_t seed);
MdvrpInstance generate_mdvrp(const InstanceSpec& spec, std::uint64_t seed);

/// Customer positions for `n` customers and one demand per customer.
std::vector<Customer> generate_customers(const InstanceSpec& spec, int n, Rng& rng);

/// Q from the route-size rule of `spec`.
int capacity_for(const InstanceSpec& spec, std::span<const Customer> customers, Rng& rng);

std::string to_string(Positioning p);
std::string to_string(DemandModel d);
Positioning parse_positioning(const std::string& s);
DemandModel parse_demand_model(const std::string& s);

}  // namespace hvrp
