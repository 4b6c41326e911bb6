#include "hvrp/gancp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "hvrp/error.hpp"

namespace hvrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool in_unit(double x) { return x > 0.0 && x < 1.0; }

// Depots sorted by distance from a point, ties to the lower index.
std::vector<int> depots_by_distance(const MdvrpInstance& inst, const Point& at) {
  std::vector<int> order(inst.num_depots());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return distance(at, inst.depots[a]) < distance(at, inst.depots[b]);
  });
  return order;
}

int nearest_customer(const MdvrpInstance& inst, std::size_t i) {
  int best = -1;
  double bd = kInf;
  for (std::size_t j = 0; j < inst.num_customers(); ++j) {
    if (j == i) continue;
    const double d = distance(inst.customers[i].pos, inst.customers[j].pos);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

std::vector<bool> serving(const Genes& genes, std::size_t nd) {
  std::vector<bool> open(nd, false);
  for (int g : genes) open[g] = true;
  return open;
}

std::uint64_t hash_ids(int depot, std::span<const int> ids) {
  std::uint64_t h = mix_seed(static_cast<std::uint64_t>(depot) + 1);
  for (int c : ids) h = mix_seed(h ^ static_cast<std::uint64_t>(c));
  return h;
}

void evaluate(Population& pop, const AssignmentProblem& p, CostCache& cache) {
  std::vector<Genes> genes;
  genes.reserve(pop.size());
  for (const auto& ind : pop) genes.push_back(ind.genes);
  const auto routing = cache.routing_costs(genes);
  for (std::size_t k = 0; k < pop.size(); ++k) {
    const auto loads = depot_loads(p.network, pop[k].genes);
    pop[k].cost = routing[k] + location_cost(p, loads);
    pop[k].penalty = overload(p, loads);
  }
}

// Drops individuals whose genes already occur earlier in `pop` or in `seen`.
void dedup(Population& pop, std::set<Genes>& seen) {
  Population out;
  out.reserve(pop.size());
  for (auto& ind : pop)
    if (seen.insert(ind.genes).second) out.push_back(std::move(ind));
  pop = std::move(out);
}

std::vector<std::size_t> ranked(const Population& pop) {
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return better_candidate(pop[a], pop[b]); });
  return idx;
}

std::size_t elite_count(const GaConfig& cfg, std::size_t n) {
  return std::min(n, static_cast<std::size_t>(std::max(1.0, std::ceil(cfg.elite_fraction * static_cast<double>(n)))));
}

// Pool for the next generation: elites by key, then the rest by fitness.
Population select_survivors(Population merged, const GaConfig& cfg) {
  const std::size_t keep = std::min(merged.size(), static_cast<std::size_t>(cfg.pop_high));
  const auto by_key = ranked(merged);
  std::vector<bool> taken(merged.size(), false);
  Population next;
  next.reserve(keep);
  for (std::size_t k = 0; k < elite_count(cfg, merged.size()) && next.size() < keep; ++k) {
    taken[by_key[k]] = true;
    next.push_back(merged[by_key[k]]);
  }
  std::vector<std::size_t> by_fit(merged.size());
  std::iota(by_fit.begin(), by_fit.end(), 0);
  std::stable_sort(by_fit.begin(), by_fit.end(),
                   [&](std::size_t a, std::size_t b) { return merged[a].fitness < merged[b].fitness; });
  for (std::size_t k : by_fit) {
    if (next.size() >= keep) break;
    if (!taken[k]) next.push_back(merged[k]);
  }
  return next;
}

void merge_best(Population& hall, const Population& pop, std::size_t cap) {
  std::set<Genes> have;
  for (const auto& h : hall) have.insert(h.genes);
  for (const auto& ind : pop)
    if (have.insert(ind.genes).second) hall.push_back(ind);
  const auto idx = ranked(hall);
  Population out;
  for (std::size_t k = 0; k < std::min(cap, idx.size()); ++k) out.push_back(hall[idx[k]]);
  hall = std::move(out);
}

}  // namespace

void GaConfig::validate() const {
  if (pop_low < 1 || pop_low > pop_high) throw ConfigError("ga: need 0 < pop_low <= pop_high");
  if (pop_high < 2) throw ConfigError("ga: pop_high must be at least 2");
  if (generations < 0) throw ConfigError("ga: generations must be non-negative");
  if (stall_limit < 1) throw ConfigError("ga: stall limit must be positive");
  if (p_repair < 0 || p_repair > 1) throw ConfigError("ga: p_repair must lie in [0, 1]");
  if (p_flip < 0 || p_flip > 1) throw ConfigError("ga: p_flip must lie in [0, 1]");
  if (!in_unit(mutation_fraction) || !in_unit(targeted_fraction) || !in_unit(targeted_gene_fraction) ||
      !in_unit(elite_fraction))
    throw ConfigError("ga: fractions must lie in (0, 1)");
  if (w1 < 0 || w2 < 0 || w3 < 0) throw ConfigError("ga: weights must be non-negative");
  if (top_k < 1) throw ConfigError("ga: top_k must be positive");
  if (routing_iterations && *routing_iterations < 0) throw ConfigError("ga: routing iterations must be non-negative");
}

bool AssignmentProblem::has_location_costs() const {
  if (!location) return false;
  const double demand = static_cast<double>(network.total_demand());
  for (std::size_t d = 0; d < num_depots(); ++d)
    if (opening_cost[d] > 0.0 || depot_limit[d] < demand) return true;
  return false;
}

AssignmentProblem make_problem(const MdvrpInstance& inst) {
  inst.validate();
  AssignmentProblem p;
  p.network = inst;
  for (std::size_t d = 0; d < inst.num_depots(); ++d) p.depot_limit.push_back(inst.depot_limit(d));
  p.opening_cost.assign(inst.num_depots(), 0.0);
  return p;
}

AssignmentProblem make_problem(const ClrpInstance& inst) {
  inst.validate();
  AssignmentProblem p;
  p.network = inst.network;
  p.network.vehicles.assign(inst.num_depots(), std::nullopt);
  p.depot_limit = inst.depot_capacity;
  p.opening_cost = inst.opening_cost;
  p.route_cost = inst.route_cost;
  p.location = true;
  return p;
}

double overload(const AssignmentProblem& p, std::span<const long> loads) {
  double s = 0.0;
  for (std::size_t d = 0; d < loads.size(); ++d) s += std::max(0.0, static_cast<double>(loads[d]) - p.depot_limit[d]);
  return s;
}

bool is_overloaded(const AssignmentProblem& p, const Genes& genes) {
  return overload(p, depot_loads(p.network, genes)) > 0.0;
}

double location_cost(const AssignmentProblem& p, std::span<const long> loads) {
  if (!p.location) return 0.0;
  double s = 0.0;
  for (std::size_t d = 0; d < loads.size(); ++d) {
    if (loads[d] == 0) continue;
    const long vehicles = (loads[d] + p.network.capacity - 1) / p.network.capacity;
    s += p.opening_cost[d] + p.route_cost * static_cast<double>(vehicles);
  }
  return s;
}

bool better_candidate(const Individual& a, const Individual& b) {
  if (a.overloaded() != b.overloaded()) return !a.overloaded();
  return a.cost < b.cost;
}

Genes nearest_depot_assignment(const MdvrpInstance& inst) {
  Genes g(inst.num_customers());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = depots_by_distance(inst, inst.customers[i].pos).front();
  return g;
}

Genes neighbor_depot_assignment(const MdvrpInstance& inst) {
  const Genes nda = nearest_depot_assignment(inst);
  Genes g(inst.num_customers());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int j = nearest_customer(inst, i);
    g[i] = j < 0 ? nda[i] : nda[j];
  }
  return g;
}

Genes second_nearest_assignment(const MdvrpInstance& inst) {
  Genes g(inst.num_customers());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = depots_by_distance(inst, inst.customers[i].pos)[1];
  return g;
}

Population initial_population(const AssignmentProblem& p, const GaConfig& cfg, Rng& rng) {
  const auto& net = p.network;
  const std::size_t n = net.num_customers();
  const int nd = static_cast<int>(net.num_depots());
  Population pop;
  auto add = [&](Genes g) {
    if (pop.size() < static_cast<std::size_t>(cfg.pop_high)) pop.push_back(Individual{std::move(g)});
  };
  add(nearest_depot_assignment(net));
  add(neighbor_depot_assignment(net));
  if (nd > 2) add(second_nearest_assignment(net));

  // With location costs a random individual first draws its open depots:
  // depot d stays closed with probability F_d / (2 max F), then depots are
  // reopened at random until the open capacity covers the demand.
  const bool draw_open = p.has_location_costs();
  const double demand = static_cast<double>(net.total_demand());
  const double max_open = *std::max_element(p.opening_cost.begin(), p.opening_cost.end());
  while (pop.size() < static_cast<std::size_t>(cfg.pop_high)) {
    std::vector<int> open;
    if (draw_open) {
      std::vector<int> closed;
      for (int d = 0; d < nd; ++d) {
        const double q = max_open > 0 ? 0.5 * p.opening_cost[d] / max_open : 0.0;
        (bernoulli(rng, q) ? closed : open).push_back(d);
      }
      double cap = 0.0;
      for (int d : open) cap += p.depot_limit[d];
      while (!closed.empty() && (open.empty() || cap < demand)) {
        const std::size_t k = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(closed.size()) - 1));
        cap += p.depot_limit[closed[k]];
        open.push_back(closed[k]);
        closed.erase(closed.begin() + static_cast<long>(k));
      }
      std::sort(open.begin(), open.end());
    } else {
      open.resize(nd);
      std::iota(open.begin(), open.end(), 0);
    }
    Genes g(n);
    for (auto& x : g) x = open[uniform_int(rng, 0, static_cast<int>(open.size()) - 1)];
    add(std::move(g));
  }
  return pop;
}

bool repair(Genes& genes, const AssignmentProblem& p, double p_repair, Rng& rng) {
  auto loads = depot_loads(p.network, genes);
  if (overload(p, loads) <= 0.0) return true;
  if (!bernoulli(rng, p_repair)) return false;
  const auto& net = p.network;
  const int nd = static_cast<int>(net.num_depots());
  for (;;) {
    std::vector<int> over;
    for (int d = 0; d < nd; ++d)
      if (static_cast<double>(loads[d]) > p.depot_limit[d]) over.push_back(d);
    if (over.empty()) return true;
    const int src = over[uniform_int(rng, 0, static_cast<int>(over.size()) - 1)];
    std::vector<int> members;
    for (std::size_t i = 0; i < genes.size(); ++i)
      if (genes[i] == src) members.push_back(static_cast<int>(i));
    std::shuffle(members.begin(), members.end(), rng);
    const auto open = serving(genes, net.num_depots());
    bool moved = false;
    for (int i : members) {
      const int q = net.customers[i].demand;
      int dst = -1;
      // Open depots first; a closed depot is opened only when no open one has room.
      for (int pass = 0; pass < 2 && dst < 0; ++pass) {
        for (int d : depots_by_distance(net, net.customers[i].pos)) {
          if (d == src || (p.location && (pass == 0) != open[d])) continue;
          if (static_cast<double>(loads[d] + q) <= p.depot_limit[d]) {
            dst = d;
            break;
          }
        }
        if (!p.location) break;
      }
      if (dst < 0) continue;
      genes[i] = dst;
      loads[src] -= q;
      loads[dst] += q;
      moved = true;
      break;
    }
    if (!moved) return false;
  }
}

int repair(Population& pop, const AssignmentProblem& p, double p_repair, Rng& rng) {
  int left = 0;
  for (auto& ind : pop)
    if (!repair(ind.genes, p, p_repair, rng)) ++left;
  return left;
}

std::vector<double> diversity(std::span<const Genes> pop) {
  std::vector<double> out(pop.size(), 0.0);
  if (pop.size() < 2) return out;
  const std::size_t n = pop.front().size();
  if (n == 0) return out;
  int nd = 0;
  for (const auto& g : pop)
    for (int x : g) nd = std::max(nd, x + 1);
  // count[i][d] = individuals with gene i equal to d
  std::vector<int> count(n * static_cast<std::size_t>(nd), 0);
  for (const auto& g : pop)
    for (std::size_t i = 0; i < n; ++i) ++count[i * nd + g[i]];
  const double m = static_cast<double>(pop.size());
  for (std::size_t k = 0; k < pop.size(); ++k) {
    long diff = 0;
    for (std::size_t i = 0; i < n; ++i) diff += static_cast<long>(pop.size()) - count[i * nd + pop[k][i]];
    out[k] = static_cast<double>(diff) / (static_cast<double>(n) * m);
  }
  return out;
}

void assign_fitness(Population& pop, const GaConfig& cfg) {
  if (pop.empty()) return;
  std::vector<Genes> genes;
  genes.reserve(pop.size());
  for (const auto& ind : pop) genes.push_back(ind.genes);
  const auto div = diversity(genes);
  auto bounds = [&](auto get) {
    double lo = kInf, hi = -kInf;
    for (std::size_t k = 0; k < pop.size(); ++k) {
      lo = std::min(lo, get(k));
      hi = std::max(hi, get(k));
    }
    return std::pair{lo, hi};
  };
  const auto [clo, chi] = bounds([&](std::size_t k) { return pop[k].cost; });
  const auto [dlo, dhi] = bounds([&](std::size_t k) { return div[k]; });
  for (std::size_t k = 0; k < pop.size(); ++k) {
    auto& ind = pop[k];
    ind.diversity = div[k];
    const double c = chi > clo ? (ind.cost - clo) / (chi - clo) : 0.0;
    const double d = dhi > dlo ? (div[k] - dlo) / (dhi - dlo) : 0.0;
    ind.fitness = cfg.w1 * c - cfg.w2 * d + cfg.w3 * c * ind.penalty;
  }
}

std::size_t tournament(const Population& pop, Rng& rng) {
  const int n = static_cast<int>(pop.size());
  const auto a = static_cast<std::size_t>(uniform_int(rng, 0, n - 1));
  const auto b = static_cast<std::size_t>(uniform_int(rng, 0, n - 1));
  return pop[b].fitness < pop[a].fitness ? b : a;
}

std::pair<std::size_t, std::size_t> select_parents(const Population& pop, Rng& rng) {
  if (pop.size() < 2) throw ConfigError("ga: parent selection needs at least two individuals");
  const std::size_t first = tournament(pop, rng);
  // second tournament over the others
  const int n = static_cast<int>(pop.size()) - 1;
  auto draw = [&] {
    auto k = static_cast<std::size_t>(uniform_int(rng, 0, n - 1));
    return k >= first ? k + 1 : k;
  };
  const std::size_t a = draw(), b = draw();
  return {first, pop[b].fitness < pop[a].fitness ? b : a};
}

Genes crossover(const Genes& a, const Genes& b, Rng& rng) {
  if (a.size() != b.size()) throw ConfigError("ga: crossover parents differ in length");
  Genes child(a.size());
  std::uniform_int_distribution<int> coin(0, 1);
  for (std::size_t i = 0; i < a.size(); ++i) child[i] = coin(rng) ? b[i] : a[i];
  return child;
}

int mutate(Genes& genes, int num_depots, const GaConfig& cfg, Rng& rng) {
  const int n = static_cast<int>(genes.size());
  int ops = 0;
  for (int i = 0; i < n; ++i) {
    if (!bernoulli(rng, cfg.mutation_fraction)) continue;
    ++ops;
    if (bernoulli(rng, cfg.p_flip) || n < 2) {
      if (num_depots < 2) continue;
      int d = uniform_int(rng, 0, num_depots - 2);
      if (d >= genes[i]) ++d;
      genes[i] = d;
    } else {
      int j = uniform_int(rng, 0, n - 2);
      if (j >= i) ++j;
      std::swap(genes[i], genes[j]);
    }
  }
  return ops;
}

void copy_from_elite(Genes& genes, const Genes& elite, double fraction, Rng& rng) {
  const std::size_t n = genes.size();
  const auto k = std::min(n, static_cast<std::size_t>(std::max(1.0, std::round(fraction * static_cast<double>(n)))));
  std::vector<std::size_t> pos(n);
  std::iota(pos.begin(), pos.end(), 0);
  for (std::size_t t = 0; t < k; ++t) {
    const auto r = t + static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(n - t) - 1));
    std::swap(pos[t], pos[r]);
    genes[pos[t]] = elite[pos[t]];
  }
}

void move_to_near_depot(Genes& genes, const AssignmentProblem& p, Rng& rng) {
  const auto& net = p.network;
  const std::size_t n = genes.size();
  const auto open = serving(genes, net.num_depots());
  auto nearest_open = [&](std::size_t i) {
    for (int d : depots_by_distance(net, net.customers[i].pos))
      if (open[d]) return d;
    return genes[i];
  };
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(0.1 * static_cast<double>(n))));
  for (std::size_t t = 0; t < k; ++t) {
    const auto i = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(n) - 1));
    if (bernoulli(rng, 0.5)) {
      genes[i] = nearest_open(i);
    } else {
      const int j = nearest_customer(net, i);
      genes[i] = nearest_open(j < 0 ? i : static_cast<std::size_t>(j));
    }
  }
}

std::vector<double> CostCache::routing_costs(std::span<const Genes> genes) {
  using Key = std::pair<int, std::vector<int>>;
  std::map<Key, std::size_t> pending;
  std::vector<CvrpInstance> batch;
  std::vector<std::vector<Key>> keys(genes.size());
  for (std::size_t k = 0; k < genes.size(); ++k) {
    for (auto& sp : decompose(p_.network, genes[k])) {
      Key key{sp.depot, sp.customer_ids};
      if (!memo_.count(key) && !pending.count(key)) {
        pending.emplace(key, batch.size());
        batch.push_back(std::move(sp.instance));
      }
      keys[k].push_back(std::move(key));
    }
  }
  if (!batch.empty()) {
    const auto est = est_.estimate_batch(batch);
    requested_ += batch.size();
    for (const auto& [key, slot] : pending) memo_.emplace(key, est[slot]);
  }
  std::vector<double> out(genes.size(), 0.0);
  for (std::size_t k = 0; k < genes.size(); ++k)
    for (const auto& key : keys[k]) out[k] += memo_.at(key);
  return out;
}

EvolveResult evolve(const AssignmentProblem& p, const CostEstimator& est, const GaConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(cfg.seed, {0x9a}));
  CostCache cache(p, est);
  const int nd = static_cast<int>(p.num_depots());
  const bool locate = p.has_location_costs();

  std::set<Genes> seen;
  Population pool = initial_population(p, cfg, rng);
  repair(pool, p, cfg.p_repair, rng);
  dedup(pool, seen);
  evaluate(pool, p, cache);
  assign_fitness(pool, cfg);

  EvolveResult res;
  Population hall;
  merge_best(hall, pool, static_cast<std::size_t>(cfg.pop_high));
  auto record = [&](int gen, std::size_t evaluated) {
    const auto& b = hall.front();
    res.history.push_back({gen, b.cost, b.overloaded(), evaluated});
  };
  record(0, pool.size());

  int stall = 0;
  for (int gen = 1; gen <= cfg.generations && stall < cfg.stall_limit && pool.size() >= 2; ++gen) {
    const Individual best_before = hall.front();

    Population children;
    std::set<Genes> batch_seen;
    for (const auto& ind : pool) batch_seen.insert(ind.genes);
    for (int tries = 0; children.size() < static_cast<std::size_t>(cfg.pop_low) && tries < 20 * cfg.pop_low;
         ++tries) {
      const auto [a, b] = select_parents(pool, rng);
      Individual child{crossover(pool[a].genes, pool[b].genes, rng)};
      repair(child.genes, p, cfg.p_repair, rng);
      if (batch_seen.insert(child.genes).second) children.push_back(std::move(child));
    }
    if (children.empty()) break;
    evaluate(children, p, cache);
    assign_fitness(children, cfg);

    // FLIP/SWAP on the best third by fitness
    std::vector<std::size_t> by_fit(children.size());
    std::iota(by_fit.begin(), by_fit.end(), 0);
    std::stable_sort(by_fit.begin(), by_fit.end(),
                     [&](std::size_t a, std::size_t b) { return children[a].fitness < children[b].fitness; });
    const std::size_t tertile = (children.size() + 2) / 3;
    for (std::size_t t = 0; t < tertile; ++t) mutate(children[by_fit[t]].genes, nd, cfg, rng);

    const auto elites = ranked(pool);
    const std::size_t n_elite = elite_count(cfg, pool.size());
    const auto n_targeted = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(cfg.targeted_fraction * static_cast<double>(children.size()))));
    for (std::size_t t = 0; t < n_targeted; ++t) {
      const std::size_t i = tournament(children, rng);
      const auto& e = pool[elites[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(n_elite) - 1))]];
      copy_from_elite(children[i].genes, e.genes, cfg.targeted_gene_fraction, rng);
    }
    if (locate) {
      const auto n_near =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(children.size()))));
      for (std::size_t t = 0; t < n_near; ++t) move_to_near_depot(children[tournament(children, rng)].genes, p, rng);
    }

    std::set<Genes> pool_genes;
    for (const auto& ind : pool) pool_genes.insert(ind.genes);
    dedup(children, pool_genes);
    evaluate(children, p, cache);

    Population merged = pool;
    merged.insert(merged.end(), children.begin(), children.end());
    assign_fitness(merged, cfg);
    pool = select_survivors(std::move(merged), cfg);
    assign_fitness(pool, cfg);
    merge_best(hall, pool, static_cast<std::size_t>(cfg.pop_high));

    const auto& now = hall.front();
    const bool improved = better_candidate(now, best_before) &&
                          (now.overloaded() != best_before.overloaded() ||
                           now.cost < best_before.cost - 1e-9 * std::max(1.0, std::abs(best_before.cost)));
    stall = improved ? 0 : stall + 1;
    record(gen, children.size());
  }

  res.candidates = std::move(hall);
  res.predictions = cache.requested();
  res.elapsed = seconds_since(t0);
  return res;
}

RoutingSolution route_assignment(const AssignmentProblem& p, const Genes& genes, const GaConfig& cfg) {
  const auto loads = depot_loads(p.network, genes);
  for (std::size_t d = 0; d < loads.size(); ++d)
    if (static_cast<double>(loads[d]) > p.depot_limit[d])
      throw InfeasibleError("depot " + std::to_string(d) + " load " + std::to_string(loads[d]) +
                            " exceeds its limit");
  RoutingSolution sol;
  for (auto& sp : decompose(p.network, genes)) {
    SolverConfig sc;
    sc.seed = derive_seed(cfg.seed, {hash_ids(sp.depot, sp.customer_ids)});
    sc.route_fixed_cost = p.route_cost;
    if (cfg.routing_iterations)
      sc.iteration_limit = *cfg.routing_iterations;
    else
      sc.time_limit = time_limit_for_size(static_cast<double>(sp.customer_ids.size()));
    const auto res = solve_heuristic(sp.instance, sc);
    DepotRoutes dr;
    dr.depot = sp.depot;
    for (auto r : res.routes) {
      for (auto& c : r.customers) c = sp.customer_ids[static_cast<std::size_t>(c)];
      dr.routes.push_back(std::move(r));
    }
    sol.routing_cost += res.cost;
    if (p.location) sol.opening_cost += p.opening_cost[sp.depot] + p.route_cost * static_cast<double>(dr.routes.size());
    sol.depots.push_back(std::move(dr));
  }
  sol.total_cost = sol.routing_cost + sol.opening_cost;
  return sol;
}

FinalSolution finalize(const AssignmentProblem& p, const CostEstimator& est, const Population& candidates,
                       const GaConfig& cfg) {
  cfg.validate();
  if (candidates.empty()) throw ConfigError("finalize: no candidates");
  FinalSolution out;
  const std::size_t k = std::min(candidates.size(), static_cast<std::size_t>(cfg.top_k));
  for (std::size_t i = 0; i < k; ++i) out.routed.push_back({candidates[i].genes, candidates[i].cost, std::nullopt, false});
  if (cfg.inject_nda) {
    Genes nda = nearest_depot_assignment(p.network);
    const bool present = std::any_of(out.routed.begin(), out.routed.end(), [&](const auto& r) { return r.genes == nda; });
    if (!present && !is_overloaded(p, nda)) {
      CostCache cache(p, est);
      const auto loads = depot_loads(p.network, nda);
      const double pred = cache.routing_costs(std::span(&nda, 1)).front() + location_cost(p, loads);
      out.routed.push_back({std::move(nda), pred, std::nullopt, true});
    }
  }
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < out.routed.size(); ++i) {
    auto& rc = out.routed[i];
    try {
      auto sol = route_assignment(p, rc.genes, cfg);
      rc.actual_cost = sol.total_cost;
      if (!best || sol.total_cost < out.solution.total_cost) {
        best = i;
        out.solution = std::move(sol);
      }
    } catch (const InfeasibleError&) {
    }
  }
  if (!best) throw InfeasibleError("none of the " + std::to_string(out.routed.size()) + " candidates could be routed");
  out.assignment = out.routed[*best].genes;
  out.predicted_cost = out.routed[*best].predicted_cost;
  return out;
}

SolveResult solve_mdvrp(const MdvrpInstance& inst, const CostEstimator& est, const GaConfig& cfg) {
  const auto p = make_problem(inst);
  SolveResult r;
  r.search = evolve(p, est, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  r.final = finalize(p, est, r.search.candidates, cfg);
  r.finalize_elapsed = seconds_since(t0);
  return r;
}

}  // namespace hvrp
