#include "hvrp/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hvrp/error.hpp"
#include "hvrp/io.hpp"

namespace hvrp {

namespace {

InstanceSpec cvrp_spec(const PhaseConfig& cfg) {
  InstanceSpec spec;
  spec.customers = cfg.sizes;
  return spec;
}

// MDVRP whose average subproblem size N/D falls inside cfg.sizes.
InstanceSpec mdvrp_spec(const PhaseConfig& cfg) {
  InstanceSpec spec;
  spec.depots = cfg.depots;
  spec.customers = {cfg.sizes.lo * cfg.depots.lo, cfg.sizes.hi * cfg.depots.hi};
  spec.subproblem_range = std::pair<double, double>(cfg.sizes.lo, cfg.sizes.hi);
  return spec;
}

Json base_manifest(int phase, const PhaseConfig& cfg) {
  Json m;
  m["format"] = "hvrp-dataset";
  m["version"] = 1;
  m["phase"] = phase;
  m["count"] = cfg.count;
  m["seed"] = cfg.seed;
  m["sizes"] = {cfg.sizes.lo, cfg.sizes.hi};
  m["depots"] = {cfg.depots.lo, cfg.depots.hi};
  m["positioning"] = to_string(Positioning::Random);
  m["demand"] = to_string(DemandModel::Uniform);
  Json label;
  label["iterations"] = cfg.label.iterations ? Json(*cfg.label.iterations) : Json(nullptr);
  label["time_limit"] = cfg.label.time_limit;
  m["label"] = label;
  return m;
}

Json source_counts(const std::vector<Record>& rs) {
  Json c = Json::object();
  std::size_t perturbed = 0;
  for (const auto& r : rs) {
    c[r.source] = c.value(r.source, 0) + 1;
    perturbed += r.perturbed;
  }
  c["perturbed"] = perturbed;
  return c;
}

std::string record_id(int phase, std::size_t k) {
  std::ostringstream os;
  os << "p" << phase << "-" << k;
  return os.str();
}

CvrpInstance unlimited(CvrpInstance inst) {
  inst.fleet_limit.reset();
  return inst;
}

void label_all(std::vector<Record>& rs, const LabelConfig& cfg) {
  for (auto& r : rs) r.label = label_instance(r.instance, cfg, r.seed);
}

}  // namespace

SolverConfig LabelConfig::solver(std::uint64_t seed) const {
  SolverConfig sc;
  sc.seed = derive_seed(seed, {0x1abe1});
  if (iterations)
    sc.iteration_limit = *iterations;
  else
    sc.time_limit = time_limit;
  return sc;
}

double label_instance(const CvrpInstance& inst, const LabelConfig& cfg, std::uint64_t seed) {
  return solve_heuristic(inst, cfg.solver(seed)).cost;
}

std::vector<CvrpInstance> Dataset::instances() const {
  std::vector<CvrpInstance> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.instance);
  return out;
}

std::vector<double> Dataset::labels() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

void PhaseConfig::validate() const {
  if (count < 1) throw ConfigError("datagen: count must be at least 1");
  if (sizes.lo < 1 || sizes.lo > sizes.hi) throw ConfigError("datagen: invalid size range");
  if (depots.lo < 2 || depots.lo > depots.hi) throw ConfigError("datagen: invalid depot range");
  if (label.iterations && *label.iterations < 0) throw ConfigError("datagen: label iterations must be non-negative");
  if (!(label.time_limit > 0)) throw ConfigError("datagen: label time limit must be positive");
}

int perturb_assignment(Genes& genes, int num_depots, Rng& rng) {
  const int n = static_cast<int>(genes.size());
  if (n == 0 || num_depots < 2) return 0;
  const int moves = uniform_int(rng, 1, std::max(1, n / 10));
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int t = 0; t < moves; ++t) {
    int d = uniform_int(rng, 0, num_depots - 2);
    if (d >= genes[idx[t]]) ++d;
    genes[idx[t]] = d;
  }
  return moves;
}

PhaseConfig phase_config_from_manifest(const Json& m) {
  PhaseConfig cfg;
  cfg.count = m.at("count").get<std::size_t>();
  cfg.seed = m.at("seed").get<std::uint64_t>();
  cfg.sizes = {m.at("sizes").at(0).get<int>(), m.at("sizes").at(1).get<int>()};
  cfg.depots = {m.at("depots").at(0).get<int>(), m.at("depots").at(1).get<int>()};
  const auto& l = m.at("label");
  cfg.label.iterations = l.at("iterations").is_null() ? std::nullopt : std::optional<long>(l["iterations"].get<long>());
  cfg.label.time_limit = l.at("time_limit").get<double>();
  return cfg;
}

Dataset phase1(const PhaseConfig& cfg) {
  cfg.validate();
  Dataset ds;
  const auto spec = cvrp_spec(cfg);
  for (std::size_t k = 0; k < cfg.count; ++k) {
    Record r;
    r.id = record_id(1, k);
    r.phase = 1;
    r.source = "random";
    r.seed = derive_seed(cfg.seed, {1, k});
    r.instance = generate_cvrp(spec, r.seed);
    ds.records.push_back(std::move(r));
  }
  label_all(ds.records, cfg.label);
  ds.manifest = base_manifest(1, cfg);
  ds.manifest["sources"] = source_counts(ds.records);
  return ds;
}

Dataset phase2(const PhaseConfig& cfg) {
  cfg.validate();
  const std::size_t targeted = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(cfg.count)));
  const std::size_t perturbed = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(targeted)));
  // role 0: random, 1: targeted, 2: targeted and perturbed
  std::vector<int> role(cfg.count, 0);
  std::fill(role.begin(), role.begin() + static_cast<long>(targeted), 1);
  std::fill(role.begin(), role.begin() + static_cast<long>(perturbed), 2);
  Rng order(derive_seed(cfg.seed, {2}));
  std::shuffle(role.begin(), role.end(), order);

  const auto cspec = cvrp_spec(cfg);
  const auto mspec = mdvrp_spec(cfg);
  Dataset ds;
  for (std::size_t k = 0; k < cfg.count; ++k) {
    Record r;
    r.id = record_id(2, k);
    r.phase = 2;
    r.seed = derive_seed(cfg.seed, {2, k});
    if (role[k] == 0) {
      r.source = "random";
      r.instance = generate_cvrp(cspec, r.seed);
    } else {
      const auto m = generate_mdvrp(mspec, r.seed);
      Rng rng(derive_seed(r.seed, {1}));
      const bool nda = bernoulli(rng, 0.5);
      r.source = nda ? "nda" : "neighbor";
      Genes g = nda ? nearest_depot_assignment(m) : neighbor_depot_assignment(m);
      if (role[k] == 2) {
        r.perturbed = true;
        perturb_assignment(g, static_cast<int>(m.num_depots()), rng);
      }
      auto subs = decompose(m, g);
      auto& sp = subs[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(subs.size()) - 1))];
      r.instance = unlimited(std::move(sp.instance));
    }
    ds.records.push_back(std::move(r));
  }
  label_all(ds.records, cfg.label);
  ds.manifest = base_manifest(2, cfg);
  ds.manifest["targeted"] = targeted;
  ds.manifest["sources"] = source_counts(ds.records);
  return ds;
}

Phase3Config Phase3Config::desk() {
  Phase3Config c;
  c.train.learning_rate = 1e-3;
  c.train.schedule = LrSchedule::Cosine;
  c.train.epochs = 30;
  c.train.augment_symmetries = true;
  c.ga.pop_low = 30;
  c.ga.pop_high = 50;
  c.ga.generations = 30;
  c.ga.stall_limit = 10;
  return c;
}

void Phase3Config::validate() const {
  base.validate();
  if (base.count < 4) throw ConfigError("datagen: phase 3 needs at least four records");
  if (candidates_per_instance < 1) throw ConfigError("datagen: candidates per instance must be positive");
  model.validate();
  train.validate();
  ga.validate();
}

Phase3Result phase3(const Phase3Config& cfg) {
  cfg.validate();
  Phase3Result res{Dataset{}, Predictor(cfg.model, derive_seed(cfg.base.seed, {3, 0})), {}};
  const auto mspec = mdvrp_spec(cfg.base);
  const std::size_t quota = cfg.base.count / 4;
  Json steps = Json::array();
  for (int step = 1; step <= 4; ++step) {
    const std::size_t want = quota + (step == 4 ? cfg.base.count % 4 : 0);
    const NeuralEstimator est(res.model);
    std::vector<Record> fresh;
    for (std::size_t i = 0; fresh.size() < want; ++i) {
      const std::uint64_t seed = derive_seed(cfg.base.seed, {3, static_cast<std::uint64_t>(step), i});
      const auto m = generate_mdvrp(mspec, seed);
      GaConfig ga = cfg.ga;
      ga.seed = seed;
      const auto run = evolve(make_problem(m), est, ga);
      const auto top = std::min<std::size_t>(run.candidates.size(), static_cast<std::size_t>(cfg.candidates_per_instance));
      for (std::size_t c = 0; c < top && fresh.size() < want; ++c) {
        for (auto& sp : decompose(m, run.candidates[c].genes)) {
          if (fresh.size() >= want) break;
          Record r;
          r.id = record_id(3, res.data.records.size() + fresh.size());
          r.phase = 3;
          r.step = step;
          r.source = "ga";
          r.seed = derive_seed(seed, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(sp.depot)});
          r.instance = unlimited(std::move(sp.instance));
          fresh.push_back(std::move(r));
        }
      }
    }
    label_all(fresh, cfg.base.label);
    res.data.records.insert(res.data.records.end(), fresh.begin(), fresh.end());

    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.train.seed, {static_cast<std::uint64_t>(step)});
    // later steps keep the readout bias learned so far
    tc.init_bias_from_data = cfg.train.init_bias_from_data && step == 1;
    const auto insts = res.data.instances();
    const auto labels = res.data.labels();
    const auto tr = train(res.model, insts, labels, tc);
    res.step_models.push_back(res.model);
    Json s;
    s["step"] = step;
    s["records"] = fresh.size();
    s["best_epoch"] = tr.best_epoch;
    for (const auto& e : tr.history)
      if (e.epoch == tr.best_epoch) s["validation_mape"] = e.validation_mape;
    steps.push_back(s);
  }
  res.data.manifest = base_manifest(3, cfg.base);
  res.data.manifest["steps"] = steps;
  res.data.manifest["sources"] = source_counts(res.data.records);
  return res;
}

Json record_to_json(const Record& r) {
  Json j;
  j["id"] = r.id;
  j["phase"] = r.phase;
  j["step"] = r.step;
  j["source"] = r.source;
  j["perturbed"] = r.perturbed;
  j["seed"] = r.seed;
  j["label"] = r.label;
  j["instance"] = to_json_value(r.instance);
  return j;
}

Record record_from_json(const Json& j) {
  Record r;
  r.id = j.at("id").get<std::string>();
  r.phase = j.at("phase").get<int>();
  r.step = j.value("step", 0);
  r.source = j.at("source").get<std::string>();
  r.perturbed = j.value("perturbed", false);
  r.seed = j.at("seed").get<std::uint64_t>();
  r.label = j.at("label").get<double>();
  r.instance = cvrp_from_json(j.at("instance"));
  return r;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "manifest.json", ds.manifest.dump(2) + "\n");
  std::ofstream out(dir / "records.jsonl", std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / "records.jsonl").string());
  for (const auto& r : ds.records) out << record_to_json(r).dump() << "\n";
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  const auto mpath = (dir / "manifest.json").string();
  try {
    ds.manifest = Json::parse(read_text_file(dir / "manifest.json"));
  } catch (const Json::exception& e) {
    throw ParseError(mpath, 1, e.what());
  }
  const auto rpath = (dir / "records.jsonl").string();
  std::ifstream in(dir / "records.jsonl", std::ios::binary);
  if (!in) throw Error("cannot read " + rpath);
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (line.empty()) continue;
    try {
      ds.records.push_back(record_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ParseError(rpath, no, e.what());
    }
  }
  return ds;
}

}  // namespace hvrp
