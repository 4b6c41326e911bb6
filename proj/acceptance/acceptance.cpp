// Acceptance run: one PASS/FAIL line per criterion.
//
//   hvrp_acceptance [--only 1,4,6] [--checkpoint model.json] [--save-model path]
//
// Criterion 4 trains the desk model; criteria 6, 8 and 10 use it (or the
// --checkpoint file). Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "hvrp/bench.hpp"
#include "hvrp/clrp.hpp"
#include "hvrp/config_io.hpp"
#include "hvrp/cvrp_solver.hpp"
#include "hvrp/datagen.hpp"
#include "hvrp/error.hpp"
#include "hvrp/estimators.hpp"
#include "hvrp/io.hpp"
#include "hvrp/predictor.hpp"
#include "support/oracles.hpp"

using namespace hvrp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Context {
  fs::path data_dir = HVRP_DATA_DIR;
  fs::path work_dir;
  std::string cli = HVRP_CLI_PATH;
  std::optional<fs::path> checkpoint;
  fs::path save_model;
  std::optional<Predictor> model;

  const Predictor& desk_model() {
    if (model) return *model;
    for (const auto& p : {checkpoint, std::optional<fs::path>(save_model)})
      if (p && fs::exists(*p)) return *(model = Predictor::load(*p));
    throw ConfigError("no desk model: run criterion 4 first or pass --checkpoint");
  }
};

// 1: reverse-mode gradient against central differences
Outcome gradients(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  Predictor m({4, 2, 1, 10, 4}, 5);
  Rng rng(17);
  for (auto& p : m.parameters()) p += uniform_real(rng, -0.5, 0.5);
  InstanceSpec spec;
  spec.customers = {3, 3};
  auto inst = generate_cvrp(spec, 3);
  inst.depot = {inst.depot.x / 1000, inst.depot.y / 1000};
  for (auto& c : inst.customers) c.pos = {c.pos.x / 1000, c.pos.y / 1000};
  const auto g = build_knn_graph(inst, 10);
  const double label = m.predict(g) + 1.0;
  std::vector<double> grad(m.num_parameters(), 0.0);
  m.loss(g, label, grad);
  auto params = m.parameters();
  const double eps = 1e-4;
  double worst = 0;
  std::string worst_name;
  for (const auto& t : m.tensors()) {
    for (std::size_t i = t.offset; i < t.offset + t.size(); ++i) {
      const double orig = params[i];
      params[i] = orig + eps;
      const double up = m.loss(g, label);
      params[i] = orig - eps;
      const double down = m.loss(g, label);
      params[i] = orig;
      const double fd = (up - down) / (2 * eps);
      const double rel = std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
      if (rel > worst) worst = rel, worst_name = t.name;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10,
          std::to_string(m.num_parameters()) + " parameters, worst relative error " + fmt(worst * 1e6, 3) + "e-6 (" +
              worst_name + "), " + fmt(secs) + " s"};
}

// 2: permutation and translation invariance
Outcome invariance(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  Predictor m({32, 4, 3, 10, 4}, 2);
  Rng rng(23);
  for (auto& p : m.parameters()) p += uniform_real(rng, -0.2, 0.2);
  InstanceSpec spec;
  spec.customers = {10, 60};
  double worst = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto inst = generate_cvrp(spec, 500 + k);
    const double base = m.predict(inst);
    for (int p = 0; p < 5; ++p) {
      auto perm = inst;
      std::shuffle(perm.customers.begin(), perm.customers.end(), rng);
      worst = std::max(worst, std::abs(m.predict(perm) - base) / std::abs(base));
    }
    for (int t = 0; t < 3; ++t) {
      auto moved = inst;
      const double dx = uniform_real(rng, -1000, 1000), dy = uniform_real(rng, -1000, 1000);
      moved.depot = {moved.depot.x + dx, moved.depot.y + dy};
      for (auto& c : moved.customers) c.pos = {c.pos.x + dx, c.pos.y + dy};
      worst = std::max(worst, std::abs(m.predict(moved) - base) / std::abs(base));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 30, "worst relative change " + fmt(worst * 1e12, 3) + "e-12, " + fmt(secs) + " s"};
}

// 3: heuristic against the exact solver
Outcome exact_oracle(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  int below = 0, close = 0;
  double worst = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    InstanceSpec spec;
    spec.customers = {1, 7};
    const auto inst = generate_cvrp(spec, 9000 + k);
    SolverConfig sc;
    sc.iteration_limit = 200;
    sc.seed = k + 1;
    const double h = solve_heuristic(inst, sc).cost;
    const double e = solve_exact(inst).cost;
    if (h < e - 1e-9 * e) ++below;
    const double gap = percent_gap(h, e);
    worst = std::max(worst, gap);
    if (gap <= 2.0) ++close;
  }
  const double secs = seconds_since(t0);
  return {below == 0 && close >= 190 && secs < 300,
          std::to_string(close) + "/200 within 2%, " + std::to_string(below) + " below the optimum, worst gap " +
              fmt(worst) + "%, " + fmt(secs) + " s"};
}

// 4: learned predictor against the analytical estimators
Outcome predictor_ordering(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  PhaseConfig pc;
  pc.count = 2000;
  pc.sizes = {10, 60};
  pc.seed = 4;
  const auto ds = phase1(pc);
  const auto xs = ds.instances();
  const auto ys = ds.labels();
  const std::size_t ntr = xs.size() * 8 / 10;
  const std::span<const CvrpInstance> tr(xs.data(), ntr), te(xs.data() + ntr, xs.size() - ntr);
  const std::span<const double> ytr(ys.data(), ntr), yte(ys.data() + ntr, ys.size() - ntr);

  const FigliozziEstimator fig(fit_figliozzi(tr, ytr));
  const DaganzoEstimator dag(1.0, fit_daganzo_c(tr, ytr, 1.0));

  Predictor m({32, 4, 4, 15, 4}, 1);
  TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.schedule = LrSchedule::Cosine;
  tc.epochs = 150;
  tc.batch_size = 32;
  tc.augment_symmetries = true;
  train(m, tr, ytr, tc);
  if (!ctx.save_model.empty()) m.save(ctx.save_model);

  const double e_nn = mape(NeuralEstimator(m).estimate_batch(te), yte);
  const double e_fig = mape(fig.estimate_batch(te), yte);
  const double e_dag = mape(dag.estimate_batch(te), yte);
  ctx.model = std::move(m);
  const double secs = seconds_since(t0);
  return {e_nn < e_fig && e_fig < e_dag && secs < 1800,
          "held-out MAPE nn " + fmt(e_nn) + "%, figliozzi " + fmt(e_fig) + "%, daganzo " + fmt(e_dag) + "%, " +
              fmt(secs) + " s"};
}

// 5: GA with exact subproblem costs against enumeration
Outcome enumerable_optimum(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  int hits = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    InstanceSpec spec;
    spec.customers = {12, 12};
    spec.depots = {2, 2};
    auto inst = generate_mdvrp(spec, 700 + k);
    inst.vehicles.assign(2, std::nullopt);
    const oracle::Tables t(inst);
    const auto opt = oracle::enumerate_assignments(t, [](int, long) { return 0.0; });
    const oracle::TableEstimator est(t);
    GaConfig cfg;
    cfg.seed = k + 1;
    const auto r = evolve(make_problem(inst), est, cfg);
    if (r.candidates.front().cost <= opt.cost * (1 + 1e-9)) ++hits;
  }
  const double secs = seconds_since(t0);
  return {hits >= 18 && secs < 600, std::to_string(hits) + "/20 optimal, " + fmt(secs) + " s"};
}

// 6: Cordeau p01 end to end
Outcome cordeau_p01(Context& ctx) {
  const auto inst = load_mdvrp(ctx.data_dir / "cordeau" / "p01");
  const NeuralEstimator est(ctx.desk_model());
  double best = 1e300, slowest = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    GaConfig cfg;
    cfg.seed = s;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = solve_mdvrp(inst, est, cfg);
    slowest = std::max(slowest, seconds_since(t0));
    check_solution(inst, r.final.solution);
    best = std::min(best, r.final.solution.total_cost);
  }
  const double gap = percent_gap(best, 576.87);
  return {gap <= 5.0 && slowest <= 60,
          "best of 10 seeds " + fmt(best) + " (gap " + fmt(gap) + "% to 576.87), slowest run " + fmt(slowest) + " s"};
}

// 7: CLRP with free, uncapacitated depots reduces to MDVRP
Outcome reduction_identity(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  int equal = 0;
  const int trials = 5;
  FigliozziParams fp{1.0, 0.5, 0.2};
  const FigliozziEstimator est(fp);
  for (int k = 0; k < trials; ++k) {
    InstanceSpec spec;
    spec.customers = {30, 60};
    spec.depots = {2, 5};
    ClrpInstance c;
    c.network = generate_mdvrp(spec, 300 + k);
    c.network.vehicles.assign(c.network.num_depots(), std::nullopt);
    c.depot_capacity.assign(c.network.num_depots(), std::numeric_limits<double>::infinity());
    c.opening_cost.assign(c.network.num_depots(), 0.0);
    GaConfig cfg;
    cfg.seed = 40 + k;
    cfg.generations = 40;
    const auto a = solve_clrp(c, est, cfg);
    const auto b = solve_mdvrp(c.network, est, cfg);
    if (a.final.solution.total_cost == b.final.solution.total_cost && a.final.assignment == b.final.assignment) ++equal;
  }
  return {equal == trials, std::to_string(equal) + "/" + std::to_string(trials) +
                               " instances with bit-identical cost and assignment, " + fmt(seconds_since(t0)) + " s"};
}

// 8: Gaskell67-22x5
Outcome gaskell(Context& ctx) {
  const auto dir = ctx.data_dir / "barreto";
  std::optional<fs::path> file;
  if (fs::exists(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().filename().string().rfind("Gaskell67-22x5", 0) == 0) file = e.path();
  if (!file) return {false, "instance file Gaskell67-22x5 not found under " + dir.string()};
  const auto inst = load_clrp(*file);
  const NeuralEstimator est(ctx.desk_model());
  const auto t0 = std::chrono::steady_clock::now();
  GaConfig cfg;
  const auto r = solve_clrp(inst, est, cfg);
  const double secs = seconds_since(t0);
  const double cost = check_clrp_solution(inst, r.final.solution);
  const auto open = open_depots(r.final.assignment, static_cast<int>(inst.num_depots()));
  const double gap = percent_gap(cost, 585.1);
  return {gap <= 3.0 && open.size() == 1 && secs <= 60,
          "cost " + fmt(cost) + " (gap " + fmt(gap) + "%), " + std::to_string(open.size()) + " open depots, " +
              fmt(secs) + " s"};
}

// 9: repair with p_repair = 1
Outcome repair_guarantee(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(99);
  int overloaded = 0, individuals = 0;
  for (int k = 0; k < 1000; ++k) {
    InstanceSpec spec;
    spec.customers = {20, 60};
    spec.depots = {2, 5};
    const auto inst = generate_mdvrp(spec, 20000 + k);
    const auto p = make_problem(inst);
    const int nd = static_cast<int>(inst.num_depots());
    Population pop;
    for (int i = 0; i < 10; ++i) {
      Genes g(inst.num_customers());
      if (i % 2 == 0) {
        std::fill(g.begin(), g.end(), uniform_int(rng, 0, nd - 1));
      } else {
        const int hot = uniform_int(rng, 0, nd - 1);
        for (auto& x : g) x = bernoulli(rng, 0.8) ? hot : uniform_int(rng, 0, nd - 1);
      }
      pop.push_back({g});
    }
    repair(pop, p, 1.0, rng);
    for (const auto& ind : pop) {
      ++individuals;
      overloaded += is_overloaded(p, ind.genes);
    }
  }
  const double secs = seconds_since(t0);
  return {overloaded == 0 && secs < 10, std::to_string(overloaded) + " of " + std::to_string(individuals) +
                                            " individuals overloaded after repair, " + fmt(secs) + " s"};
}

// 10: byte-identical solve output
Outcome determinism(Context& ctx) {
  fs::create_directories(ctx.work_dir);
  const auto ckpt = ctx.work_dir / "determinism_model.json";
  ctx.desk_model().save(ckpt);
  const auto config = ctx.work_dir / "determinism_config.json";
  write_text_file(config, R"({"generations": 60})");
  const auto inst = ctx.data_dir / "cordeau" / "p01";
  std::string out[2];
  for (int k = 0; k < 2; ++k) {
    const auto path = ctx.work_dir / ("determinism_" + std::to_string(k) + ".json");
    const std::string cmd = "\"" + ctx.cli + "\" solve --in \"" + inst.string() + "\" --nn \"" + ckpt.string() +
                            "\" --seed 7 --config \"" + config.string() + "\" --out \"" + path.string() + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "solve command failed: " + cmd};
    out[k] = read_text_file(path);
  }
  return {out[0] == out[1] && !out[0].empty(),
          std::string(out[0] == out[1] ? "identical" : "different") + " outputs (" + std::to_string(out[0].size()) +
              " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string checkpoint, save_model = "acceptance_model.json", work_dir = "acceptance_work";
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_option("--checkpoint", checkpoint, "desk model for criteria 6, 8 and 10");
  app.add_option("--save-model", save_model, "where criterion 4 writes its model");
  app.add_option("--work-dir", work_dir);
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  if (!checkpoint.empty()) ctx.checkpoint = checkpoint;
  ctx.save_model = save_model;
  ctx.work_dir = work_dir;

  const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria = {
      {"gradient check", gradients},
      {"permutation and translation invariance", invariance},
      {"heuristic vs exact CVRP", exact_oracle},
      {"predictor beats analytical estimators", predictor_ordering},
      {"GA optimum on enumerable instances", enumerable_optimum},
      {"Cordeau p01 within 5%", cordeau_p01},
      {"CLRP reduces to MDVRP", reduction_identity},
      {"Gaskell67-22x5 within 3%", gaskell},
      {"repair guarantee", repair_guarantee},
      {"deterministic solve output", determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
