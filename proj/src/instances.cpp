#include "hvrp/instances.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "hvrp/error.hpp"

namespace hvrp {

namespace {

bool finite(const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

void check_customers(std::span<const Customer> customers, int capacity, const std::string& what) {
  if (customers.empty()) throw ConfigError(what + ": at least one customer is required");
  if (capacity <= 0) throw ConfigError(what + ": vehicle capacity must be positive");
  for (std::size_t i = 0; i < customers.size(); ++i) {
    const auto& c = customers[i];
    if (!finite(c.pos)) throw ConfigError(what + ": customer " + std::to_string(i) + " has non-finite coordinates");
    if (c.demand <= 0) throw ConfigError(what + ": customer " + std::to_string(i) + " has non-positive demand");
    if (c.demand > capacity)
      throw ConfigError(what + ": customer " + std::to_string(i) + " demand " + std::to_string(c.demand) +
                        " exceeds vehicle capacity " + std::to_string(capacity));
  }
}

long sum_demand(std::span<const Customer> customers) {
  long s = 0;
  for (const auto& c : customers) s += c.demand;
  return s;
}

}  // namespace

long CvrpInstance::total_demand() const noexcept { return sum_demand(customers); }

void CvrpInstance::validate() const {
  if (!finite(depot)) throw ConfigError("cvrp: depot has non-finite coordinates");
  check_customers(customers, capacity, "cvrp");
  if (fleet_limit && *fleet_limit <= 0) throw ConfigError("cvrp: fleet limit must be positive");
}

long MdvrpInstance::total_demand() const noexcept { return sum_demand(customers); }

double MdvrpInstance::depot_limit(std::size_t d) const noexcept {
  if (d >= vehicles.size() || !vehicles[d]) return std::numeric_limits<double>::infinity();
  return static_cast<double>(*vehicles[d]) * capacity;
}

void MdvrpInstance::validate() const {
  if (depots.size() < 2) throw ConfigError("mdvrp: at least two depots are required");
  if (vehicles.size() != depots.size()) throw ConfigError("mdvrp: one fleet entry per depot is required");
  for (std::size_t d = 0; d < depots.size(); ++d) {
    if (!finite(depots[d])) throw ConfigError("mdvrp: depot " + std::to_string(d) + " has non-finite coordinates");
    if (vehicles[d] && *vehicles[d] <= 0) throw ConfigError("mdvrp: depot " + std::to_string(d) + " has no vehicles");
  }
  check_customers(customers, capacity, "mdvrp");
  double fleet_capacity = 0.0;
  for (std::size_t d = 0; d < depots.size(); ++d) fleet_capacity += depot_limit(d);
  if (static_cast<double>(total_demand()) > fleet_capacity)
    throw ConfigError("mdvrp: total demand " + std::to_string(total_demand()) + " exceeds total fleet capacity");
}

void ClrpInstance::validate() const {
  const auto nd = network.depots.size();
  if (nd < 1) throw ConfigError("clrp: at least one candidate depot is required");
  if (depot_capacity.size() != nd || opening_cost.size() != nd)
    throw ConfigError("clrp: depot capacity and opening cost are required for every depot");
  for (std::size_t d = 0; d < nd; ++d) {
    if (!finite(network.depots[d])) throw ConfigError("clrp: depot " + std::to_string(d) + " has non-finite coordinates");
    if (!(depot_capacity[d] > 0)) throw ConfigError("clrp: depot " + std::to_string(d) + " capacity must be positive");
    if (!(opening_cost[d] >= 0)) throw ConfigError("clrp: depot " + std::to_string(d) + " opening cost is negative");
  }
  if (!(route_cost >= 0)) throw ConfigError("clrp: route opening cost is negative");
  check_customers(network.customers, network.capacity, "clrp");
  const double cap = std::accumulate(depot_capacity.begin(), depot_capacity.end(), 0.0);
  if (cap < static_cast<double>(network.total_demand()))
    throw InfeasibleError("clrp: total depot capacity is below total demand");
}

std::size_t RoutingSolution::num_routes() const noexcept {
  std::size_t n = 0;
  for (const auto& d : depots) n += d.routes.size();
  return n;
}

double tour_length(const Point& depot, std::span<const Customer> customers, std::span<const int> order) {
  if (order.empty()) return 0.0;
  double len = distance(depot, customers[order.front()].pos);
  for (std::size_t k = 1; k < order.size(); ++k) len += distance(customers[order[k - 1]].pos, customers[order[k]].pos);
  return len + distance(customers[order.back()].pos, depot);
}

double check_solution(const MdvrpInstance& inst, const RoutingSolution& sol) {
  const auto n = inst.num_customers();
  std::vector<int> seen(n, 0);
  double total = 0.0;
  std::set<int> depots_seen;
  for (const auto& dr : sol.depots) {
    if (dr.depot < 0 || static_cast<std::size_t>(dr.depot) >= inst.num_depots())
      throw InfeasibleError("route assigned to unknown depot " + std::to_string(dr.depot));
    if (!depots_seen.insert(dr.depot).second)
      throw InfeasibleError("depot " + std::to_string(dr.depot) + " listed twice");
    const auto& fleet = inst.vehicles[dr.depot];
    if (fleet && static_cast<int>(dr.routes.size()) > *fleet)
      throw InfeasibleError("fleet overflow at depot " + std::to_string(dr.depot) + ": " +
                            std::to_string(dr.routes.size()) + " routes > " + std::to_string(*fleet) + " vehicles");
    for (const auto& r : dr.routes) {
      if (r.customers.empty()) throw InfeasibleError("empty route at depot " + std::to_string(dr.depot));
      long load = 0;
      for (int c : r.customers) {
        if (c < 0 || static_cast<std::size_t>(c) >= n) throw InfeasibleError("unknown customer " + std::to_string(c));
        if (seen[c]++) throw InfeasibleError("duplicate customer " + std::to_string(c));
        load += inst.customers[c].demand;
      }
      if (load > inst.capacity)
        throw InfeasibleError("capacity violation at depot " + std::to_string(dr.depot) + ": load " +
                              std::to_string(load) + " > " + std::to_string(inst.capacity));
      total += tour_length(inst.depots[dr.depot], inst.customers, r.customers);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw InfeasibleError("customer " + std::to_string(i) + " is not visited");
  return total;
}

std::vector<Subproblem> decompose(const MdvrpInstance& inst, const Genes& genes) {
  if (genes.size() != inst.num_customers())
    throw ConfigError("assignment length " + std::to_string(genes.size()) + " != number of customers " +
                      std::to_string(inst.num_customers()));
  const int nd = static_cast<int>(inst.num_depots());
  std::vector<std::vector<int>> members(nd);
  for (std::size_t i = 0; i < genes.size(); ++i) {
    if (genes[i] < 0 || genes[i] >= nd) throw ConfigError("gene " + std::to_string(i) + " is not a valid depot index");
    members[genes[i]].push_back(static_cast<int>(i));
  }
  std::vector<Subproblem> out;
  for (int d = 0; d < nd; ++d) {
    if (members[d].empty()) continue;
    Subproblem sp;
    sp.depot = d;
    sp.customer_ids = std::move(members[d]);
    sp.instance.name = inst.name + "#d" + std::to_string(d);
    sp.instance.depot = inst.depots[d];
    sp.instance.capacity = inst.capacity;
    sp.instance.fleet_limit = inst.vehicles.empty() ? std::nullopt : inst.vehicles[d];
    sp.instance.customers.reserve(sp.customer_ids.size());
    for (int c : sp.customer_ids) sp.instance.customers.push_back(inst.customers[c]);
    out.push_back(std::move(sp));
  }
  return out;
}

std::vector<long> depot_loads(const MdvrpInstance& inst, const Genes& genes) {
  std::vector<long> loads(inst.num_depots(), 0);
  for (std::size_t i = 0; i < genes.size(); ++i) loads[genes[i]] += inst.customers[i].demand;
  return loads;
}

// --- generators ----------------------------------------------------------

void InstanceSpec::validate() const {
  if (customers.lo < 1 || customers.hi < customers.lo) throw ConfigError("spec: invalid customer range");
  if (depots.lo < 1 || depots.hi < depots.lo) throw ConfigError("spec: invalid depot range");
  if (!(grid_size > 0)) throw ConfigError("spec: grid size must be positive");
  if (!(route_size_lo > 0) || route_size_hi < route_size_lo) throw ConfigError("spec: invalid route size range");
  if (cluster_seeds.lo < 1 || cluster_seeds.hi < cluster_seeds.lo) throw ConfigError("spec: invalid cluster seed range");
  if (!(cluster_decay > 0)) throw ConfigError("spec: cluster decay must be positive");
  if (!(fleet_slack > 0)) throw ConfigError("spec: fleet slack must be positive");
  if (subproblem_range && (subproblem_range->first <= 0 || subproblem_range->second < subproblem_range->first))
    throw ConfigError("spec: invalid subproblem range");
}

int quadrant_of(const Point& p, double grid_size) noexcept {
  const double c = grid_size / 2.0;
  if (p.y >= c) return p.x >= c ? 1 : 2;
  return p.x <= c ? 3 : 4;
}

int quadrant_demand(const Point& p, double grid_size, Rng& rng) {
  return quadrant_of(p, grid_size) % 2 == 1 ? uniform_int(rng, 51, 100) : uniform_int(rng, 1, 50);
}

namespace {

Point random_grid_point(double grid, Rng& rng) {
  const int g = static_cast<int>(std::floor(grid));
  return {static_cast<double>(uniform_int(rng, 0, g)), static_cast<double>(uniform_int(rng, 0, g))};
}

struct PointSet {
  std::set<std::pair<double, double>> used;
  bool insert(const Point& p) { return used.emplace(p.x, p.y).second; }
};

void place_random(int count, double grid, Rng& rng, PointSet& used, std::vector<Point>& out) {
  for (int k = 0; k < count;) {
    Point p = random_grid_point(grid, rng);
    if (used.insert(p)) {
      out.push_back(p);
      ++k;
    }
  }
}

void place_clustered(int count, const InstanceSpec& spec, Rng& rng, PointSet& used, std::vector<Point>& out) {
  if (count <= 0) return;
  const int seeds = std::min(count, uniform_int(rng, spec.cluster_seeds.lo, spec.cluster_seeds.hi));
  std::vector<Point> centers;
  place_random(seeds, spec.grid_size, rng, used, centers);
  out.insert(out.end(), centers.begin(), centers.end());
  const double decay = spec.cluster_decay * spec.grid_size / 1000.0;
  for (int k = seeds; k < count;) {
    Point p = random_grid_point(spec.grid_size, rng);
    double attraction = 0.0;
    for (const auto& s : centers) attraction += std::exp(-distance(p, s) / decay);
    if (uniform_real(rng) < std::min(1.0, attraction) && used.insert(p)) {
      out.push_back(p);
      ++k;
    }
  }
}

}  // namespace

std::vector<Customer> generate_customers(const InstanceSpec& spec, int n, Rng& rng) {
  PointSet used;
  std::vector<Point> pts;
  pts.reserve(n);
  switch (spec.positioning) {
    case Positioning::Random:
      place_random(n, spec.grid_size, rng, used, pts);
      break;
    case Positioning::Clustered:
      place_clustered(n, spec, rng, used, pts);
      break;
    case Positioning::RandomClustered: {
      const int half = n / 2;
      place_random(half, spec.grid_size, rng, used, pts);
      place_clustered(n - half, spec, rng, used, pts);
      break;
    }
  }
  std::vector<Customer> customers(n);
  for (int i = 0; i < n; ++i) {
    customers[i].pos = pts[i];
    switch (spec.demand) {
      case DemandModel::Uniform:
        customers[i].demand = uniform_int(rng, 1, 100);
        break;
      case DemandModel::Unitary:
        customers[i].demand = 1;
        break;
      case DemandModel::Quadrant:
        customers[i].demand = quadrant_demand(pts[i], spec.grid_size, rng);
        break;
    }
  }
  return customers;
}

int capacity_for(const InstanceSpec& spec, std::span<const Customer> customers, Rng& rng) {
  const double r = uniform_real(rng, spec.route_size_lo, spec.route_size_hi);
  const long total = sum_demand(customers);
  int q = static_cast<int>(std::ceil(r * static_cast<double>(total) / static_cast<double>(customers.size())));
  for (const auto& c : customers) q = std::max(q, c.demand);
  return q;
}

CvrpInstance generate_cvrp(const InstanceSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  CvrpInstance inst;
  const int n = uniform_int(rng, spec.customers.lo, spec.customers.hi);
  inst.depot = random_grid_point(spec.grid_size, rng);
  inst.customers = generate_customers(spec, n, rng);
  inst.capacity = capacity_for(spec, inst.customers, rng);
  inst.name = "cvrp-n" + std::to_string(n) + "-s" + std::to_string(seed);
  return inst;
}

MdvrpInstance generate_mdvrp(const InstanceSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.depots.lo < 2) throw ConfigError("spec: MDVRP requires at least two depots");
  Rng rng(seed);
  const int n = uniform_int(rng, spec.customers.lo, spec.customers.hi);
  std::vector<int> allowed;
  for (int d = spec.depots.lo; d <= spec.depots.hi; ++d) {
    if (spec.subproblem_range) {
      const double ratio = static_cast<double>(n) / d;
      const bool inside = ratio >= spec.subproblem_range->first && ratio <= spec.subproblem_range->second;
      if (inside == spec.outside_subproblem_range) continue;
    }
    allowed.push_back(d);
  }
  if (allowed.empty())
    throw ConfigError("spec: no depot count in range satisfies the subproblem size constraint for N=" +
                      std::to_string(n));
  const int nd = allowed[uniform_int(rng, 0, static_cast<int>(allowed.size()) - 1)];

  MdvrpInstance inst;
  inst.customers = generate_customers(spec, n, rng);
  for (int d = 0; d < nd; ++d) inst.depots.push_back(random_grid_point(spec.grid_size, rng));
  inst.capacity = capacity_for(spec, inst.customers, rng);
  const double per_depot = static_cast<double>(inst.total_demand()) / nd;
  const int m = std::max(1, static_cast<int>(std::ceil(spec.fleet_slack * per_depot / inst.capacity)));
  inst.vehicles.assign(nd, m);
  inst.name = "mdvrp-n" + std::to_string(n) + "-d" + std::to_string(nd) + "-s" + std::to_string(seed);
  return inst;
}

std::string to_string(Positioning p) {
  switch (p) {
    case Positioning::Random: return "R";
    case Positioning::Clustered: return "C";
    case Positioning::RandomClustered: return "RC";
  }
  return "?";
}

std::string to_string(DemandModel d) {
  switch (d) {
    case DemandModel::Uniform: return "uniform";
    case DemandModel::Unitary: return "unitary";
    case DemandModel::Quadrant: return "quadrant";
  }
  return "?";
}

Positioning parse_positioning(const std::string& s) {
  if (s == "R") return Positioning::Random;
  if (s == "C") return Positioning::Clustered;
  if (s == "RC") return Positioning::RandomClustered;
  throw ConfigError("unknown positioning '" + s + "' (expected R, C or RC)");
}

DemandModel parse_demand_model(const std::string& s) {
  if (s == "uniform") return DemandModel::Uniform;
  if (s == "unitary") return DemandModel::Unitary;
  if (s == "quadrant") return DemandModel::Quadrant;
  throw ConfigError("unknown demand model '" + s + "' (expected uniform, unitary or quadrant)");
}

}  // namespace hvrp
