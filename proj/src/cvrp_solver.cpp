#include "hvrp/cvrp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "hvrp/error.hpp"

namespace hvrp {

void SolverConfig::validate() const {
  if (!(time_limit > 0)) throw ConfigError("solver: time limit must be positive");
  if (iteration_limit && *iteration_limit < 0) throw ConfigError("solver: iteration limit must be non-negative");
  if (route_fixed_cost < 0) throw ConfigError("solver: route fixed cost must be non-negative");
  if (granular_neighbors < 1) throw ConfigError("solver: granular neighborhood must be at least 1");
}

double time_limit_for_size(double s) {
  if (s < 100) return 0.1;
  if (s < 200) return 1.0;
  return 2.0;
}

std::size_t batch_size_for_size(double s) {
  if (s < 100) return 512;
  if (s < 200) return 256;
  if (s < 300) return 128;
  if (s < 400) return 64;
  return 32;
}

std::vector<Route> make_routes(const CvrpInstance& inst, const std::vector<std::vector<int>>& sequences) {
  std::vector<Route> out;
  for (const auto& seq : sequences) {
    if (seq.empty()) continue;
    Route r;
    r.customers = seq;
    for (int c : seq) r.load += inst.customers.at(c).demand;
    r.cost = tour_length(inst.depot, inst.customers, seq);
    out.push_back(std::move(r));
  }
  return out;
}

double evaluate_solution(const CvrpInstance& inst, std::span<const Route> routes) {
  const auto n = inst.size();
  std::vector<char> seen(n, 0);
  double total = 0.0;
  std::size_t used = 0;
  for (const auto& r : routes) {
    if (r.customers.empty()) continue;
    ++used;
    long load = 0;
    for (int c : r.customers) {
      if (c < 0 || static_cast<std::size_t>(c) >= n) throw InfeasibleError("unknown customer " + std::to_string(c));
      if (seen[c]) throw InfeasibleError("duplicate customer " + std::to_string(c));
      seen[c] = 1;
      load += inst.customers[c].demand;
    }
    if (load > inst.capacity)
      throw InfeasibleError("capacity violation: route load " + std::to_string(load) + " > " + std::to_string(inst.capacity));
    total += tour_length(inst.depot, inst.customers, r.customers);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw InfeasibleError("customer " + std::to_string(i) + " is not visited");
  if (inst.fleet_limit && used > static_cast<std::size_t>(*inst.fleet_limit))
    throw InfeasibleError("fleet overflow: " + std::to_string(used) + " routes > " + std::to_string(*inst.fleet_limit) +
                          " vehicles");
  return total;
}

namespace {

constexpr double kEps = 1e-9;

// Node 0 is the depot, node i+1 is customer i.
class Workspace {
 public:
  Workspace(const CvrpInstance& inst, const SolverConfig& cfg)
      : n_(static_cast<int>(inst.size())),
        capacity_(inst.capacity),
        fixed_(cfg.route_fixed_cost),
        fleet_(inst.fleet_limit),
        dist_((n_ + 1) * (n_ + 1)),
        demand_(n_ + 1, 0) {
    std::vector<Point> pts{inst.depot};
    for (const auto& c : inst.customers) pts.push_back(c.pos);
    for (int a = 0; a <= n_; ++a)
      for (int b = 0; b <= n_; ++b) dist_[a * (n_ + 1) + b] = distance(pts[a], pts[b]);
    for (int i = 0; i < n_; ++i) demand_[i + 1] = inst.customers[i].demand;
    const int k = std::min(cfg.granular_neighbors, n_ - 1);
    neighbors_.resize(n_ + 1);
    for (int u = 1; u <= n_; ++u) {
      std::vector<int> others;
      for (int v = 1; v <= n_; ++v)
        if (v != u) others.push_back(v);
      std::partial_sort(others.begin(), others.begin() + std::max(0, k), others.end(),
                        [&](int a, int b) { return d(u, a) < d(u, b) || (d(u, a) == d(u, b) && a < b); });
      others.resize(std::max(0, k));
      neighbors_[u] = std::move(others);
    }
  }

  int n() const { return n_; }
  int capacity() const { return capacity_; }
  double fixed() const { return fixed_; }
  const std::optional<int>& fleet() const { return fleet_; }
  double d(int a, int b) const { return dist_[a * (n_ + 1) + b]; }
  int q(int node) const { return demand_[node]; }
  const std::vector<int>& neighbors(int u) const { return neighbors_[u]; }

 private:
  int n_;
  int capacity_;
  double fixed_;
  std::optional<int> fleet_;
  std::vector<double> dist_;
  std::vector<int> demand_;
  std::vector<std::vector<int>> neighbors_;
};

struct Solution {
  std::vector<std::vector<int>> routes;
  std::vector<int> route_of, pos_of;
  std::vector<int> load;
  std::vector<double> len;
  std::vector<std::vector<int>> prefix;  // prefix[r][p] = load of routes[r][0..p]

  void refresh(const Workspace& ws, int r) {
    const auto& rt = routes[r];
    load[r] = 0;
    len[r] = 0.0;
    prefix[r].resize(rt.size());
    int prev = 0;
    for (std::size_t p = 0; p < rt.size(); ++p) {
      route_of[rt[p]] = r;
      pos_of[rt[p]] = static_cast<int>(p);
      load[r] += ws.q(rt[p]);
      prefix[r][p] = load[r];
      len[r] += ws.d(prev, rt[p]);
      prev = rt[p];
    }
    if (!rt.empty()) len[r] += ws.d(prev, 0);
  }

  void rebuild(const Workspace& ws) {
    route_of.assign(ws.n() + 1, -1);
    pos_of.assign(ws.n() + 1, -1);
    load.assign(routes.size(), 0);
    len.assign(routes.size(), 0.0);
    prefix.assign(routes.size(), {});
    for (std::size_t r = 0; r < routes.size(); ++r) refresh(ws, static_cast<int>(r));
  }

  void compact(const Workspace& ws) {
    routes.erase(std::remove_if(routes.begin(), routes.end(), [](const auto& r) { return r.empty(); }), routes.end());
    rebuild(ws);
  }

  int used_routes() const {
    int c = 0;
    for (const auto& r : routes) c += !r.empty();
    return c;
  }

  double cost(const Workspace& ws) const {
    double c = 0.0;
    for (std::size_t r = 0; r < routes.size(); ++r)
      if (!routes[r].empty()) c += len[r] + ws.fixed();
    return c;
  }

  int pred(int u) const {
    const int p = pos_of[u];
    return p > 0 ? routes[route_of[u]][p - 1] : 0;
  }
  int succ(int u) const {
    const auto& rt = routes[route_of[u]];
    const int p = pos_of[u];
    return p + 1 < static_cast<int>(rt.size()) ? rt[p + 1] : 0;
  }
};

// --- construction --------------------------------------------------------

int fleet_lower_bound(const CvrpInstance& inst) {
  return static_cast<int>((inst.total_demand() + inst.capacity - 1) / inst.capacity);
}

/// Parallel savings with s_ij = d0i + d0j - lambda * dij (+ fixed route cost),
/// optionally multiplicatively perturbed.
std::vector<std::vector<int>> savings_routes(const Workspace& ws, double lambda, double noise, Rng& rng) {
  const int n = ws.n();
  struct Saving {
    double value;
    int i, j;
  };
  std::vector<Saving> sv;
  sv.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      double s = ws.d(0, i) + ws.d(0, j) - lambda * ws.d(i, j) + ws.fixed();
      if (noise > 0) s *= 1.0 + noise * (2.0 * uniform_real(rng) - 1.0);
      sv.push_back({s, i, j});
    }
  std::stable_sort(sv.begin(), sv.end(), [](const Saving& a, const Saving& b) { return a.value > b.value; });

  std::vector<std::vector<int>> routes(n);
  std::vector<int> owner(n + 1);
  std::vector<int> load(n);
  for (int i = 1; i <= n; ++i) {
    routes[i - 1] = {i};
    owner[i] = i - 1;
    load[i - 1] = ws.q(i);
  }
  for (const auto& s : sv) {
    if (s.value <= 0) break;
    const int ri = owner[s.i], rj = owner[s.j];
    if (ri == rj || load[ri] + load[rj] > ws.capacity()) continue;
    auto& a = routes[ri];
    auto& b = routes[rj];
    const bool i_front = a.front() == s.i, i_back = a.back() == s.i;
    const bool j_front = b.front() == s.j, j_back = b.back() == s.j;
    if (!(i_front || i_back) || !(j_front || j_back)) continue;
    // merge into a as [.. i][j ..]
    if (!i_back) std::reverse(a.begin(), a.end());
    if (!j_front) std::reverse(b.begin(), b.end());
    a.insert(a.end(), b.begin(), b.end());
    for (int c : b) owner[c] = ri;
    load[ri] += load[rj];
    load[rj] = 0;
    b.clear();
  }
  routes.erase(std::remove_if(routes.begin(), routes.end(), [](const auto& r) { return r.empty(); }), routes.end());
  return routes;
}

double seq_len(const Workspace& ws, const std::vector<int>& r) {
  if (r.empty()) return 0.0;
  double l = ws.d(0, r.front()) + ws.d(r.back(), 0);
  for (std::size_t k = 1; k < r.size(); ++k) l += ws.d(r[k - 1], r[k]);
  return l;
}

int seq_load(const Workspace& ws, const std::vector<int>& r) {
  int l = 0;
  for (int c : r) l += ws.q(c);
  return l;
}

/// Merges routes until the fleet limit holds; false if impossible this way.
bool enforce_fleet(const Workspace& ws, std::vector<std::vector<int>>& routes, Rng& rng) {
  if (!ws.fleet()) return true;
  const int limit = *ws.fleet();
  while (static_cast<int>(routes.size()) > limit) {
    double best = std::numeric_limits<double>::infinity();
    int ba = -1, bb = -1;
    bool rev_a = false, rev_b = false;
    for (std::size_t a = 0; a < routes.size(); ++a)
      for (std::size_t b = 0; b < routes.size(); ++b) {
        if (a == b) continue;
        if (seq_load(ws, routes[a]) + seq_load(ws, routes[b]) > ws.capacity()) continue;
        for (int ra = 0; ra < 2; ++ra)
          for (int rb = 0; rb < 2; ++rb) {
            const int ea = ra ? routes[a].front() : routes[a].back();
            const int sb = rb ? routes[b].back() : routes[b].front();
            const double delta = ws.d(ea, sb) - ws.d(ea, 0) - ws.d(0, sb);
            if (delta < best) {
              best = delta;
              ba = static_cast<int>(a);
              bb = static_cast<int>(b);
              rev_a = ra;
              rev_b = rb;
            }
          }
      }
    if (ba < 0) break;
    auto a = routes[ba], b = routes[bb];
    if (rev_a) std::reverse(a.begin(), a.end());
    if (rev_b) std::reverse(b.begin(), b.end());
    a.insert(a.end(), b.begin(), b.end());
    routes[ba] = std::move(a);
    routes.erase(routes.begin() + bb);
  }
  if (static_cast<int>(routes.size()) <= limit) return true;

  // Bin packing fallback: first-fit decreasing with randomized tie orders,
  // each bin ordered by nearest neighbor.
  std::vector<int> items(ws.n());
  std::iota(items.begin(), items.end(), 1);
  for (int attempt = 0; attempt < 50; ++attempt) {
    if (attempt > 0) std::shuffle(items.begin(), items.end(), rng);
    std::stable_sort(items.begin(), items.end(), [&](int a, int b) { return ws.q(a) > ws.q(b); });
    std::vector<std::vector<int>> bins;
    std::vector<int> loads;
    for (int c : items) {
      bool placed = false;
      for (std::size_t k = 0; k < bins.size() && !placed; ++k)
        if (loads[k] + ws.q(c) <= ws.capacity()) {
          bins[k].push_back(c);
          loads[k] += ws.q(c);
          placed = true;
        }
      if (!placed) {
        bins.push_back({c});
        loads.push_back(ws.q(c));
      }
    }
    if (static_cast<int>(bins.size()) > limit) {
      for (std::size_t k = 0; k + 1 < items.size(); ++k)
        if (ws.q(items[k]) == ws.q(items[k + 1]) || bernoulli(rng, 0.3)) std::swap(items[k], items[k + 1]);
      continue;
    }
    routes.clear();
    for (auto& bin : bins) {
      std::vector<int> tour;
      std::vector<char> used(bin.size(), 0);
      int cur = 0;
      for (std::size_t step = 0; step < bin.size(); ++step) {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < bin.size(); ++k)
          if (!used[k] && ws.d(cur, bin[k]) < bd) {
            bd = ws.d(cur, bin[k]);
            best = k;
          }
        used[best] = 1;
        cur = bin[best];
        tour.push_back(cur);
      }
      routes.push_back(std::move(tour));
    }
    return true;
  }
  return false;
}

// --- local search ----------------------------------------------------------

class LocalSearch {
 public:
  LocalSearch(const Workspace& ws, unsigned ops) : ws_(ws), ops_(ops) {}

  /// Runs improvement sweeps to a local optimum; returns number of moves.
  long run(Solution& s, Rng& rng) {
    std::vector<int> order(ws_.n());
    std::iota(order.begin(), order.end(), 1);
    long moves = 0;
    bool improved = true;
    while (improved) {
      improved = false;
      std::shuffle(order.begin(), order.end(), rng);
      for (int u : order) {
        for (int v : ws_.neighbors(u)) {
          if (try_moves(s, u, v)) {
            improved = true;
            ++moves;
          }
        }
        if ((ops_ & kRelocate) && try_relocate_depot(s, u)) {
          improved = true;
          ++moves;
        }
      }
    }
    return moves;
  }

 private:
  bool try_moves(Solution& s, int u, int v) {
    if ((ops_ & kRelocate) && (relocate(s, u, v, true) || relocate(s, u, v, false))) return true;
    if ((ops_ & kSwap) && swap(s, u, v)) return true;
    if (s.route_of[u] == s.route_of[v]) {
      if ((ops_ & kTwoOpt) && two_opt(s, u, v)) return true;
    } else if ((ops_ & kTwoOptStar) && (two_opt_star_cross(s, u, v) || two_opt_star_reverse(s, u, v))) {
      return true;
    }
    return false;
  }

  // Move u between a and b in route rv at position `at` (index where u lands).
  bool apply_relocate(Solution& s, int u, int rv, int at, double delta) {
    if (delta >= -kEps) return false;
    const int ru = s.route_of[u];
    auto& src = s.routes[ru];
    const int pu = s.pos_of[u];
    src.erase(src.begin() + pu);
    if (ru == rv && at > pu) --at;
    auto& dst = s.routes[rv];
    dst.insert(dst.begin() + at, u);
    s.refresh(ws_, ru);
    if (rv != ru) s.refresh(ws_, rv);
    return true;
  }

  double removal_gain(const Solution& s, int u) const {
    const int p = s.pred(u), n = s.succ(u);
    double g = ws_.d(p, u) + ws_.d(u, n) - ws_.d(p, n);
    if (s.routes[s.route_of[u]].size() == 1) g += ws_.fixed();
    return g;
  }

  bool relocate(Solution& s, int u, int v, bool after) {
    const int ru = s.route_of[u], rv = s.route_of[v];
    if (ru != rv && s.load[rv] + ws_.q(u) > ws_.capacity()) return false;
    const int a = after ? v : s.pred(v);
    const int b = after ? s.succ(v) : v;
    if (a == u || b == u) return false;
    const double ins = ws_.d(a, u) + ws_.d(u, b) - ws_.d(a, b);
    const double gain = ru == rv ? removal_gain(s, u) - (s.routes[ru].size() == 1 ? ws_.fixed() : 0.0) : removal_gain(s, u);
    const int at = after ? s.pos_of[v] + 1 : s.pos_of[v];
    return apply_relocate(s, u, rv, at, ins - gain);
  }

  // Relocate u to the first or last position of any route.
  bool try_relocate_depot(Solution& s, int u) {
    const double gain = removal_gain(s, u);
    const int ru = s.route_of[u];
    for (std::size_t r = 0; r < s.routes.size(); ++r) {
      const auto& rt = s.routes[r];
      if (rt.empty() || static_cast<int>(r) == ru) continue;
      if (s.load[r] + ws_.q(u) > ws_.capacity()) continue;
      const double front = ws_.d(0, u) + ws_.d(u, rt.front()) - ws_.d(0, rt.front());
      const double back = ws_.d(rt.back(), u) + ws_.d(u, 0) - ws_.d(rt.back(), 0);
      if (front - gain < -kEps) return apply_relocate(s, u, static_cast<int>(r), 0, front - gain);
      if (back - gain < -kEps) return apply_relocate(s, u, static_cast<int>(r), static_cast<int>(rt.size()), back - gain);
    }
    return false;
  }

  bool swap(Solution& s, int u, int v) {
    const int ru = s.route_of[u], rv = s.route_of[v];
    if (ru == rv && std::abs(s.pos_of[u] - s.pos_of[v]) <= 1) return false;
    if (ru != rv) {
      if (s.load[ru] - ws_.q(u) + ws_.q(v) > ws_.capacity()) return false;
      if (s.load[rv] - ws_.q(v) + ws_.q(u) > ws_.capacity()) return false;
    }
    const int pu = s.pred(u), nu = s.succ(u), pv = s.pred(v), nv = s.succ(v);
    const double delta = ws_.d(pu, v) + ws_.d(v, nu) - ws_.d(pu, u) - ws_.d(u, nu) + ws_.d(pv, u) + ws_.d(u, nv) -
                         ws_.d(pv, v) - ws_.d(v, nv);
    if (delta >= -kEps) return false;
    std::swap(s.routes[ru][s.pos_of[u]], s.routes[rv][s.pos_of[v]]);
    s.refresh(ws_, ru);
    if (rv != ru) s.refresh(ws_, rv);
    return true;
  }

  // Same route: make (u, v) adjacent by reversing the segment between them.
  bool two_opt(Solution& s, int u, int v) {
    int a = u, b = v;
    if (s.pos_of[a] > s.pos_of[b]) std::swap(a, b);
    const int pa = s.pos_of[a], pb = s.pos_of[b];
    if (pb == pa + 1) return false;
    const int na = s.succ(a), nb = s.succ(b);
    const double delta = ws_.d(a, b) + ws_.d(na, nb) - ws_.d(a, na) - ws_.d(b, nb);
    if (delta >= -kEps) return false;
    auto& rt = s.routes[s.route_of[a]];
    std::reverse(rt.begin() + pa + 1, rt.begin() + pb + 1);
    s.refresh(ws_, s.route_of[a]);
    return true;
  }

  double empty_bonus(std::size_t new_size) const { return new_size == 0 ? ws_.fixed() : 0.0; }

  // (u -> v) joins head of u's route to the tail of v's route starting at v.
  bool two_opt_star_cross(Solution& s, int u, int v) {
    const int ra = s.route_of[u], rb = s.route_of[v];
    const int pa = s.pos_of[u], pb = s.pos_of[v];
    const auto& A = s.routes[ra];
    const auto& B = s.routes[rb];
    const int head_a = s.prefix[ra][pa];
    const int head_b = pb > 0 ? s.prefix[rb][pb - 1] : 0;
    if (head_a + (s.load[rb] - head_b) > ws_.capacity()) return false;
    if (head_b + (s.load[ra] - head_a) > ws_.capacity()) return false;
    const int na = s.succ(u), pv = s.pred(v);
    const std::size_t new_a = pa + 1 + (B.size() - pb);
    const std::size_t new_b = pb + (A.size() - pa - 1);
    const double delta = ws_.d(u, v) + ws_.d(pv, na) - ws_.d(u, na) - ws_.d(pv, v) - empty_bonus(new_a) - empty_bonus(new_b);
    if (delta >= -kEps) return false;
    std::vector<int> a2(A.begin(), A.begin() + pa + 1);
    a2.insert(a2.end(), B.begin() + pb, B.end());
    std::vector<int> b2(B.begin(), B.begin() + pb);
    b2.insert(b2.end(), A.begin() + pa + 1, A.end());
    s.routes[ra] = std::move(a2);
    s.routes[rb] = std::move(b2);
    s.refresh(ws_, ra);
    s.refresh(ws_, rb);
    return true;
  }

  // (u -> v) joins head of u's route to the reversed head of v's route.
  bool two_opt_star_reverse(Solution& s, int u, int v) {
    const int ra = s.route_of[u], rb = s.route_of[v];
    const int pa = s.pos_of[u], pb = s.pos_of[v];
    const auto& A = s.routes[ra];
    const auto& B = s.routes[rb];
    const int head_a = s.prefix[ra][pa];
    const int head_b = s.prefix[rb][pb];
    if (head_a + head_b > ws_.capacity()) return false;
    if ((s.load[ra] - head_a) + (s.load[rb] - head_b) > ws_.capacity()) return false;
    const int na = s.succ(u), nb = s.succ(v);
    const std::size_t new_b = (A.size() - pa - 1) + (B.size() - pb - 1);
    const double delta = ws_.d(u, v) + ws_.d(na, nb) - ws_.d(u, na) - ws_.d(v, nb) - empty_bonus(new_b);
    if (delta >= -kEps) return false;
    std::vector<int> a2(A.begin(), A.begin() + pa + 1);
    a2.insert(a2.end(), std::make_reverse_iterator(B.begin() + pb + 1), B.rend());
    std::vector<int> b2(A.rbegin(), std::make_reverse_iterator(A.begin() + pa + 1));
    b2.insert(b2.end(), B.begin() + pb + 1, B.end());
    s.routes[ra] = std::move(a2);
    s.routes[rb] = std::move(b2);
    s.refresh(ws_, ra);
    s.refresh(ws_, rb);
    return true;
  }

  const Workspace& ws_;
  unsigned ops_;
};

// --- perturbation ----------------------------------------------------------

/// Removes a spatially clustered set of customers and reinserts them by
/// cheapest insertion in random order. Returns false (leaving `s` untouched)
/// when some customer cannot be reinserted.
bool ruin_recreate(const Workspace& ws, Solution& s, Rng& rng) {
  const int n = ws.n();
  const int max_remove = std::max(2, std::min(n, static_cast<int>(std::ceil(0.15 * n)) + 2));
  const int count = uniform_int(rng, std::min(2, n), max_remove);
  const int seed = uniform_int(rng, 1, n);

  std::vector<int> removed{seed};
  const auto& nb = ws.neighbors(seed);
  for (std::size_t k = 0; k < nb.size() && static_cast<int>(removed.size()) < count; ++k)
    if (bernoulli(rng, 0.8)) removed.push_back(nb[k]);

  Solution trial = s;
  for (int c : removed) {
    auto& rt = trial.routes[trial.route_of[c]];
    rt.erase(std::find(rt.begin(), rt.end(), c));
  }
  std::vector<int> load(trial.routes.size());
  for (std::size_t r = 0; r < trial.routes.size(); ++r) load[r] = seq_load(ws, trial.routes[r]);
  std::shuffle(removed.begin(), removed.end(), rng);

  for (int c : removed) {
    double best = std::numeric_limits<double>::infinity();
    int br = -1, bp = 0;
    int used = 0;
    for (const auto& rt : trial.routes) used += !rt.empty();
    for (std::size_t r = 0; r < trial.routes.size(); ++r) {
      const auto& rt = trial.routes[r];
      if (rt.empty()) continue;
      if (load[r] + ws.q(c) > ws.capacity()) continue;
      int prev = 0;
      for (std::size_t p = 0; p <= rt.size(); ++p) {
        const int next = p < rt.size() ? rt[p] : 0;
        const double delta = ws.d(prev, c) + ws.d(c, next) - ws.d(prev, next);
        if (delta < best) {
          best = delta;
          br = static_cast<int>(r);
          bp = static_cast<int>(p);
        }
        prev = next;
      }
    }
    if (!ws.fleet() || used < *ws.fleet()) {
      const double fresh = 2.0 * ws.d(0, c) + ws.fixed();
      if (fresh < best) {
        best = fresh;
        br = -1;
        for (std::size_t r = 0; r < trial.routes.size(); ++r)
          if (trial.routes[r].empty()) {
            br = static_cast<int>(r);
            break;
          }
        if (br < 0) {
          trial.routes.emplace_back();
          load.push_back(0);
          br = static_cast<int>(trial.routes.size()) - 1;
        }
        bp = 0;
      }
    }
    if (br < 0) return false;
    trial.routes[br].insert(trial.routes[br].begin() + bp, c);
    load[br] += ws.q(c);
  }
  trial.rebuild(ws);
  s = std::move(trial);
  return true;
}

Solution make_solution(const Workspace& ws, std::vector<std::vector<int>> routes) {
  Solution s;
  s.routes = std::move(routes);
  s.rebuild(ws);
  return s;
}

CvrpResult to_result(const CvrpInstance& inst, const Solution& s, double elapsed, long iterations) {
  std::vector<std::vector<int>> seqs;
  for (const auto& rt : s.routes) {
    if (rt.empty()) continue;
    std::vector<int> seq;
    for (int node : rt) seq.push_back(node - 1);
    seqs.push_back(std::move(seq));
  }
  CvrpResult res;
  res.routes = make_routes(inst, seqs);
  for (const auto& r : res.routes) res.cost += r.cost;
  res.elapsed = elapsed;
  res.iterations = iterations;
  return res;
}

}  // namespace

CvrpResult solve_heuristic(const CvrpInstance& inst, const SolverConfig& cfg) {
  inst.validate();
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  const int lb = fleet_lower_bound(inst);
  if (inst.fleet_limit && lb > *inst.fleet_limit)
    throw InfeasibleError("fleet limit " + std::to_string(*inst.fleet_limit) + " is below the vehicle lower bound " +
                          std::to_string(lb) + " = ceil(total demand / capacity)");

  Workspace ws(inst, cfg);
  Rng rng(cfg.seed);
  LocalSearch ls(ws, cfg.local_search_ops);
  const bool deterministic = cfg.iteration_limit.has_value();
  const long budget = deterministic ? *cfg.iteration_limit : std::numeric_limits<long>::max();

  auto construct = [&](double lambda, double noise) -> std::optional<Solution> {
    auto routes = savings_routes(ws, lambda, noise, rng);
    if (!enforce_fleet(ws, routes, rng)) return std::nullopt;
    Solution s = make_solution(ws, std::move(routes));
    ls.run(s, rng);
    s.compact(ws);
    return s;
  };

  std::optional<Solution> best = construct(1.0, 0.0);
  if (!best)
    throw InfeasibleError("no assignment of customers to at most " + std::to_string(*inst.fleet_limit) +
                          " vehicles was found (fleet limit)");
  double best_cost = best->cost(ws);
  Solution current = *best;
  double current_cost = best_cost;
  const long stall_restart = std::max<long>(100, 4L * ws.n());
  long since_improvement = 0;
  long it = 0;

  for (; it < budget; ++it) {
    if (!deterministic && seconds() >= cfg.time_limit) break;
    if (ws.n() <= 1) break;
    Solution trial = current;
    if (since_improvement >= stall_restart) {
      auto fresh = construct(uniform_real(rng, 0.6, 1.8), 0.1);
      since_improvement = 0;
      if (!fresh) continue;
      trial = std::move(*fresh);
    } else {
      if (!ruin_recreate(ws, trial, rng)) continue;
      ls.run(trial, rng);
      trial.compact(ws);
    }
    const double c = trial.cost(ws);
    const double progress = deterministic ? static_cast<double>(it) / std::max<long>(1, budget)
                                          : seconds() / cfg.time_limit;
    const double threshold = 0.01 * std::max(0.0, 1.0 - progress);
    if (c < current_cost * (1.0 + threshold) - kEps || c < current_cost - kEps) {
      current = trial;
      current_cost = c;
    }
    if (c < best_cost - kEps) {
      best = std::move(trial);
      best_cost = c;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
  }
  return to_result(inst, *best, seconds(), it);
}

// --- exact ---------------------------------------------------------------

CvrpResult solve_exact(const CvrpInstance& inst, double route_fixed_cost) {
  inst.validate();
  const int n = static_cast<int>(inst.size());
  if (static_cast<std::size_t>(n) > kExactMaxCustomers)
    throw SizeError("exact CVRP solver supports at most " + std::to_string(kExactMaxCustomers) + " customers, got " +
                    std::to_string(n));
  const auto start = std::chrono::steady_clock::now();
  const int full = 1 << n;
  auto d = [&](int a, int b) {  // -1 is the depot
    const Point& pa = a < 0 ? inst.depot : inst.customers[a].pos;
    const Point& pb = b < 0 ? inst.depot : inst.customers[b].pos;
    return distance(pa, pb);
  };

  // Held-Karp: path[mask][j] = shortest depot -> (mask) path ending at j.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> path(static_cast<std::size_t>(full) * n, kInf);
  std::vector<int> parent(static_cast<std::size_t>(full) * n, -1);
  std::vector<long> demand(full, 0);
  for (int m = 1; m < full; ++m) {
    const int low = __builtin_ctz(m);
    demand[m] = demand[m & (m - 1)] + inst.customers[low].demand;
  }
  for (int j = 0; j < n; ++j) path[(1 << j) * n + j] = d(-1, j);
  for (int m = 1; m < full; ++m) {
    if (demand[m] > inst.capacity) continue;
    for (int j = 0; j < n; ++j) {
      const double pj = path[m * n + j];
      if (!(m >> j & 1) || pj == kInf) continue;
      for (int k = 0; k < n; ++k) {
        if (m >> k & 1) continue;
        const int mk = m | (1 << k);
        const double c = pj + d(j, k);
        if (c < path[mk * n + k]) {
          path[mk * n + k] = c;
          parent[mk * n + k] = j;
        }
      }
    }
  }
  std::vector<double> tour(full, kInf);
  std::vector<int> last(full, -1);
  for (int m = 1; m < full; ++m) {
    if (demand[m] > inst.capacity) continue;
    for (int j = 0; j < n; ++j) {
      if (!(m >> j & 1)) continue;
      const double c = path[m * n + j] + d(j, -1);
      if (c < tour[m]) {
        tour[m] = c;
        last[m] = j;
      }
    }
  }

  // Partition DP with route counting: best[r][mask] using exactly r routes.
  const int max_routes = inst.fleet_limit ? std::min(*inst.fleet_limit, n) : n;
  std::vector<std::vector<double>> best(max_routes + 1, std::vector<double>(full, kInf));
  std::vector<std::vector<int>> choice(max_routes + 1, std::vector<int>(full, 0));
  best[0][0] = 0.0;
  for (int r = 1; r <= max_routes; ++r) {
    for (int m = 1; m < full; ++m) {
      const int low = m & -m;
      const int rest = m ^ low;
      // enumerate submasks of `rest`, route = sub | low
      for (int sub = rest;; sub = (sub - 1) & rest) {
        const int route = sub | low;
        if (tour[route] < kInf && best[r - 1][m ^ route] < kInf) {
          const double c = best[r - 1][m ^ route] + tour[route] + route_fixed_cost;
          if (c < best[r][m]) {
            best[r][m] = c;
            choice[r][m] = route;
          }
        }
        if (sub == 0) break;
      }
    }
  }
  int br = -1;
  for (int r = 1; r <= max_routes; ++r)
    if (best[r][full - 1] < kInf && (br < 0 || best[r][full - 1] < best[br][full - 1] - 1e-12)) br = r;
  if (br < 0) throw InfeasibleError("no feasible solution within the fleet limit");

  std::vector<std::vector<int>> seqs;
  for (int m = full - 1, r = br; m; --r) {
    const int route = choice[r][m];
    std::vector<int> seq;
    int mask = route, j = last[route];
    while (j >= 0) {
      seq.push_back(j);
      const int pj = parent[mask * n + j];
      mask ^= 1 << j;
      j = pj;
    }
    std::reverse(seq.begin(), seq.end());
    seqs.push_back(std::move(seq));
    m ^= route;
  }
  CvrpResult res;
  res.routes = make_routes(inst, seqs);
  for (const auto& r : res.routes) res.cost += r.cost;
  res.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace hvrp
