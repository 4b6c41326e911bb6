#include "hvrp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hvrp/error.hpp"
#include "hvrp/io.hpp"

namespace hvrp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct DClass {
  Positioning pos;
  DemandModel demand;
};

// D1..D8
constexpr DClass kDClasses[] = {
    {Positioning::Clustered, DemandModel::Uniform},       {Positioning::RandomClustered, DemandModel::Uniform},
    {Positioning::Random, DemandModel::Unitary},          {Positioning::Random, DemandModel::Quadrant},
    {Positioning::Clustered, DemandModel::Unitary},       {Positioning::Clustered, DemandModel::Quadrant},
    {Positioning::RandomClustered, DemandModel::Unitary}, {Positioning::RandomClustered, DemandModel::Quadrant},
};

std::map<std::string, double> read_best_known(const std::filesystem::path& path) {
  std::map<std::string, double> out;
  if (!std::filesystem::exists(path)) return out;
  std::istringstream in(read_text_file(path));
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(path.string(), no, "expected name,value");
    const auto name = line.substr(0, comma);
    if (name == "instance") continue;
    try {
      out[name] = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError(path.string(), no, "bad value");
    }
  }
  return out;
}

std::optional<double> mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::optional<double> gap_or_none(const std::optional<double>& v, const std::optional<double>& ref) {
  if (!v || !ref || *ref <= 0) return std::nullopt;
  return percent_gap(*v, *ref);
}

// --- CSV ------------------------------------------------------------------

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line, const std::string& source, std::size_t no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(source, no, "unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

using Field = std::optional<double> ReportRow::*;

const std::vector<std::pair<std::string, Field>>& numeric_fields() {
  static const std::vector<std::pair<std::string, Field>> f = {
      {"nda", &ReportRow::nda},
      {"kmeans", &ReportRow::kmeans},
      {"kmeans_time", &ReportRow::kmeans_time},
      {"gancp_predicted_avg", &ReportRow::predicted_avg},
      {"gancp_plus_avg", &ReportRow::plus_avg},
      {"gancp_plus_best", &ReportRow::plus_best},
      {"gancp_time_avg", &ReportRow::gancp_time_avg},
      {"finalize_time_avg", &ReportRow::finalize_time_avg},
      {"gap_nda_avg", &ReportRow::gap_nda_avg},
      {"gap_nda_best", &ReportRow::gap_nda_best},
      {"gap_kmeans_avg", &ReportRow::gap_kmeans_avg},
      {"gap_kmeans_best", &ReportRow::gap_kmeans_best},
      {"best_known", &ReportRow::best_known},
      {"gap_known_best", &ReportRow::gap_known_best},
  };
  return f;
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string row_line(const ReportRow& r) {
  std::string s = quote(r.suite) + "," + quote(r.instance) + "," + std::to_string(r.customers) + "," +
                  std::to_string(r.depots) + "," + std::to_string(r.repeats);
  for (const auto& [name, f] : numeric_fields()) s += "," + cell(r.*f);
  return s;
}

}  // namespace

Genes nda_assign(const MdvrpInstance& inst) { return nearest_depot_assignment(inst); }

std::vector<int> kmeans(std::span<const Point> points, int k, Rng& rng, std::vector<Point>* centroids_out) {
  const int n = static_cast<int>(points.size());
  if (k < 1 || k > n) throw ConfigError("kmeans: need 1 <= k <= number of points");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<Point> c(k);
  for (int j = 0; j < k; ++j) c[j] = points[idx[j]];
  std::vector<int> label(n, -1);
  for (int it = 0; it < 300; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      for (int j = 1; j < k; ++j)
        if (distance(points[i], c[j]) < distance(points[i], c[best])) best = j;
      if (best != label[i]) {
        label[i] = best;
        changed = true;
      }
    }
    std::vector<double> sx(k, 0), sy(k, 0);
    std::vector<int> cnt(k, 0);
    for (int i = 0; i < n; ++i) {
      sx[label[i]] += points[i].x;
      sy[label[i]] += points[i].y;
      ++cnt[label[i]];
    }
    for (int j = 0; j < k; ++j) {
      if (cnt[j] == 0) {
        const int i = uniform_int(rng, 0, n - 1);
        c[j] = points[i];
        label[i] = j;
        changed = true;
      } else {
        c[j] = {sx[j] / cnt[j], sy[j] / cnt[j]};
      }
    }
    if (!changed) break;
  }
  if (centroids_out) *centroids_out = c;
  return label;
}

std::vector<int> match_clusters(std::span<const Point> centroids, std::span<const Point> depots) {
  const std::size_t k = centroids.size();
  if (k > depots.size()) throw ConfigError("kmeans: more clusters than depots");
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = 0; d < depots.size(); ++d) pairs.emplace_back(distance(centroids[c], depots[d]), c, d);
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> match(k, -1);
  std::vector<bool> used(depots.size(), false);
  for (const auto& [dist, c, d] : pairs) {
    if (match[c] >= 0 || used[d]) continue;
    match[c] = static_cast<int>(d);
    used[d] = true;
  }
  return match;
}

KmeansResult kmeans10(const AssignmentProblem& p, const GaConfig& routing, std::uint64_t seed, int restarts) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& net = p.network;
  std::vector<Point> pts;
  for (const auto& c : net.customers) pts.push_back(c.pos);
  const int k = std::min(static_cast<int>(net.num_depots()), static_cast<int>(pts.size()));
  KmeansResult out;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    std::vector<Point> cent;
    const auto label = kmeans(pts, k, rng, &cent);
    const auto match = match_clusters(cent, net.depots);
    Genes g(pts.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = match[label[i]];
    try {
      auto sol = route_assignment(p, g, routing);
      ++out.routable;
      if (!out.solution || sol.total_cost < out.solution->total_cost) {
        out.solution = std::move(sol);
        out.genes = g;
      }
    } catch (const InfeasibleError&) {
    }
  }
  out.elapsed = seconds_since(t0);
  return out;
}

std::vector<BenchInstance> suite_instances(const SuiteConfig& cfg) {
  std::vector<BenchInstance> out;
  if (cfg.suite == "cordeau") {
    const auto dir = cfg.data_dir / "cordeau";
    if (!std::filesystem::exists(dir)) return out;
    const auto known = read_best_known(cfg.data_dir / "best_known.csv");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      BenchInstance b;
      b.id = f.filename().string();
      b.instance = load_mdvrp(f);
      if (auto it = known.find(b.id); it != known.end()) b.best_known = it->second;
      out.push_back(std::move(b));
    }
    return out;
  }
  InstanceSpec spec;
  spec.customers = cfg.customers;
  spec.depots = cfg.depots;
  spec.subproblem_range = cfg.subproblem_range;
  if (cfg.suite == "T") {
  } else if (cfg.suite == "O") {
    spec.outside_subproblem_range = true;
  } else if (cfg.suite.size() == 2 && cfg.suite[0] == 'D' && cfg.suite[1] >= '1' && cfg.suite[1] <= '8') {
    const auto& c = kDClasses[cfg.suite[1] - '1'];
    spec.positioning = c.pos;
    spec.demand = c.demand;
  } else {
    throw ConfigError("bench: unknown suite '" + cfg.suite + "'");
  }
  for (std::size_t k = 0; k < cfg.count; ++k) {
    // O instances redraw until a depot count outside the range exists
    for (std::uint64_t attempt = 0;; ++attempt) {
      try {
        BenchInstance b;
        b.instance = generate_mdvrp(spec, derive_seed(cfg.seed, {k, attempt}));
        b.id = cfg.suite + "-" + std::to_string(k) + "-n" + std::to_string(b.instance.num_customers()) + "-d" +
               std::to_string(b.instance.num_depots());
        b.instance.name = b.id;
        out.push_back(std::move(b));
        break;
      } catch (const ConfigError&) {
        if (attempt > 100) throw;
      }
    }
  }
  return out;
}

ReportRow Report::aggregate() const {
  ReportRow a;
  a.suite = rows.empty() ? std::string() : rows.front().suite;
  a.instance = "ALL";
  if (rows.empty()) return a;
  double n = 0, d = 0, r = 0;
  for (const auto& row : rows) {
    n += row.customers;
    d += row.depots;
    r += row.repeats;
  }
  const double m = static_cast<double>(rows.size());
  a.customers = static_cast<int>(std::lround(n / m));
  a.depots = static_cast<int>(std::lround(d / m));
  a.repeats = static_cast<int>(std::lround(r / m));
  for (const auto& [name, f] : numeric_fields()) {
    std::vector<double> xs;
    for (const auto& row : rows)
      if (row.*f) xs.push_back(*(row.*f));
    a.*f = mean(xs);
  }
  return a;
}

Report run_experiment(const std::vector<BenchInstance>& instances, const std::string& suite, const CostEstimator& est,
                      const ExperimentConfig& cfg) {
  if (cfg.repeats < 1) throw ConfigError("bench: repeats must be positive");
  Report rep;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const auto& b = instances[k];
    const auto p = make_problem(b.instance);
    ReportRow row;
    row.suite = suite;
    row.instance = b.id;
    row.customers = static_cast<int>(b.instance.num_customers());
    row.depots = static_cast<int>(b.instance.num_depots());
    row.repeats = cfg.repeats;
    row.best_known = b.best_known;
    if (cfg.baselines) {
      const auto nda = nda_assign(b.instance);
      try {
        row.nda = route_assignment(p, nda, cfg.ga).total_cost;
      } catch (const InfeasibleError&) {
      }
      const auto km = kmeans10(p, cfg.ga, derive_seed(cfg.ga.seed, {k, 0x6b6d}));
      if (km.solution) row.kmeans = km.solution->total_cost;
      row.kmeans_time = km.elapsed;
    }
    std::vector<double> pred, plus, tg, tf;
    for (int r = 0; r < cfg.repeats; ++r) {
      GaConfig ga = cfg.ga;
      ga.seed = derive_seed(cfg.ga.seed, {k, static_cast<std::uint64_t>(r)});
      try {
        const auto res = solve_mdvrp(b.instance, est, ga);
        pred.push_back(res.final.predicted_cost);
        plus.push_back(res.final.solution.total_cost);
        tg.push_back(res.search.elapsed);
        tf.push_back(res.finalize_elapsed);
      } catch (const InfeasibleError&) {
      }
    }
    row.predicted_avg = mean(pred);
    row.plus_avg = mean(plus);
    if (!plus.empty()) row.plus_best = *std::min_element(plus.begin(), plus.end());
    row.gancp_time_avg = mean(tg);
    row.finalize_time_avg = mean(tf);
    row.gap_nda_avg = gap_or_none(row.plus_avg, row.nda);
    row.gap_nda_best = gap_or_none(row.plus_best, row.nda);
    row.gap_kmeans_avg = gap_or_none(row.plus_avg, row.kmeans);
    row.gap_kmeans_best = gap_or_none(row.plus_best, row.kmeans);
    row.gap_known_best = gap_or_none(row.plus_best, row.best_known);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"suite", "instance", "customers", "depots", "repeats"};
    for (const auto& [name, f] : numeric_fields()) c.push_back(name);
    return c;
  }();
  return cols;
}

std::string report_to_csv(const Report& r) {
  std::string out;
  const auto& cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const auto& row : r.rows) out += row_line(row) + "\n";
  if (!r.rows.empty()) out += row_line(r.aggregate()) + "\n";
  return out;
}

Report report_from_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  Report rep;
  const auto& cols = report_columns();
  std::size_t no = 0;
  if (!std::getline(in, line)) return rep;
  ++no;
  if (split_csv(line, source, no) != cols) throw ParseError(source, no, "unexpected header");
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    const auto f = split_csv(line, source, no);
    if (f.size() != cols.size())
      throw ParseError(source, no, "expected " + std::to_string(cols.size()) + " fields, got " + std::to_string(f.size()));
    ReportRow row;
    row.suite = f[0];
    row.instance = f[1];
    if (row.instance == "ALL") continue;
    try {
      row.customers = std::stoi(f[2]);
      row.depots = std::stoi(f[3]);
      row.repeats = std::stoi(f[4]);
      std::size_t i = 5;
      for (const auto& [name, field] : numeric_fields()) {
        const auto& s = f[i++];
        if (!s.empty()) row.*field = std::stod(s);
      }
    } catch (const std::exception&) {
      throw ParseError(source, no, "malformed number");
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace hvrp
