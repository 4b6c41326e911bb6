// hvrp command line: instance generation, routing, estimation, training,
// dataset generation, solving and benchmarks.

#include <iostream>
#include <memory>
#include <optional>
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

using namespace hvrp;

namespace {

Json read_json_file(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_text_file(out, text);
}

FigliozziParams parse_figliozzi(const std::string& s) {
  FigliozziParams p;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> p.a1 >> c1 >> p.a2 >> c2 >> p.a3) || c1 != ',' || c2 != ',')
    throw ConfigError("figliozzi parameters must be a1,a2,a3");
  return p;
}

struct EstimatorOptions {
  std::string method = "nn";
  std::string nn;
  double daganzo_k = 1.0;
  double daganzo_c = kDaganzoDefaultC;
  std::string figliozzi;
  std::string fit;  // dataset directory to fit Figliozzi or Daganzo C on

  void add(CLI::App* app) {
    app->add_option("--method", method, "daganzo, figliozzi or nn")
        ->check(CLI::IsMember({"daganzo", "figliozzi", "nn"}));
    app->add_option("--nn", nn, "predictor checkpoint");
    app->add_option("--k", daganzo_k, "Daganzo k");
    app->add_option("--C", daganzo_c, "Daganzo C");
    app->add_option("--figliozzi", figliozzi, "Figliozzi parameters a1,a2,a3");
    app->add_option("--fit", fit, "dataset directory to fit the analytical estimator on");
  }

  std::unique_ptr<CostEstimator> make() const {
    if (!nn.empty() && method == "nn") return std::make_unique<NeuralEstimator>(Predictor::load(nn));
    if (method == "nn") throw ConfigError("--nn checkpoint required for the nn method");
    std::optional<Dataset> ds;
    if (!fit.empty()) ds = load_dataset(fit);
    if (method == "daganzo") {
      double c = daganzo_c;
      if (ds) c = fit_daganzo_c(ds->instances(), ds->labels(), daganzo_k);
      return std::make_unique<DaganzoEstimator>(daganzo_k, c);
    }
    if (ds) return std::make_unique<FigliozziEstimator>(fit_figliozzi(ds->instances(), ds->labels()));
    if (figliozzi.empty()) throw ConfigError("figliozzi needs --figliozzi a1,a2,a3 or --fit dataset");
    return std::make_unique<FigliozziEstimator>(parse_figliozzi(figliozzi));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical vehicle routing: GA over customer-to-depot assignments with learned route cost"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a random instance");
  int g_n = 100, g_depots = 4;
  std::string g_pos = "R", g_demand = "uniform", g_kind = "mdvrp", g_out;
  double g_grid = 1000.0;
  std::uint64_t g_seed = 1;
  gen->add_option("--n", g_n, "customers")->check(CLI::PositiveNumber);
  gen->add_option("--depots", g_depots, "depots")->check(CLI::PositiveNumber);
  gen->add_option("--positioning", g_pos, "R, C or RC");
  gen->add_option("--demand", g_demand, "uniform, unitary or quadrant");
  gen->add_option("--grid", g_grid, "grid side length");
  gen->add_option("--seed", g_seed);
  gen->add_option("--kind", g_kind)->check(CLI::IsMember({"cvrp", "mdvrp"}));
  gen->add_option("--out", g_out, "output file; the extension picks the format")->required();

  // cvrp-solve
  auto* cs = app.add_subcommand("cvrp-solve", "route a single-depot instance");
  std::string cs_in, cs_out;
  double cs_time = 1.0;
  std::optional<long> cs_iter;
  std::uint64_t cs_seed = 1;
  bool cs_exact = false;
  cs->add_option("--in", cs_in)->required();
  cs->add_option("--time-limit", cs_time, "seconds");
  cs->add_option("--iterations", cs_iter, "iteration limit (overrides the time limit)");
  cs->add_option("--seed", cs_seed);
  cs->add_flag("--exact", cs_exact, "exact solver, small instances only");
  cs->add_option("--out", cs_out, "solution JSON (stdout by default)");

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate the routing cost of a single-depot instance");
  EstimatorOptions e_opt;
  std::string e_in;
  e_opt.add(est);
  est->add_option("--in", e_in)->required();

  // train
  auto* tr = app.add_subcommand("train", "train the predictor on a dataset");
  int t_phase = 1;
  std::string t_data, t_out, t_model, t_train, t_init;
  tr->add_option("--phase", t_phase)->check(CLI::Range(1, 3));
  tr->add_option("--data", t_data, "dataset directory")->required();
  tr->add_option("--out", t_out, "checkpoint path")->required();
  tr->add_option("--model", t_model, "model config JSON");
  tr->add_option("--train-config", t_train, "training config JSON");
  tr->add_option("--init", t_init, "checkpoint to warm-start from");

  // datagen
  auto* dg = app.add_subcommand("datagen", "generate a labeled dataset");
  int d_phase = 1;
  std::string d_out, d_model, d_train, d_ga;
  std::size_t d_count = 2000;
  int d_min = 10, d_max = 60;
  std::uint64_t d_seed = 1;
  long d_iter = 200;
  bool d_desk = false;
  dg->add_option("--phase", d_phase)->check(CLI::Range(1, 3));
  dg->add_option("--out", d_out, "dataset directory")->required();
  dg->add_option("--count", d_count);
  dg->add_option("--min-size", d_min);
  dg->add_option("--max-size", d_max);
  dg->add_option("--seed", d_seed);
  dg->add_option("--label-iterations", d_iter, "heuristic iterations per label");
  dg->add_flag("--desk", d_desk, "phase 3: small model and short training");
  dg->add_option("--model", d_model, "phase 3 model config JSON");
  dg->add_option("--train-config", d_train, "phase 3 training config JSON");
  dg->add_option("--ga-config", d_ga, "phase 3 GA config JSON");

  // solve
  auto* so = app.add_subcommand("solve", "solve an MDVRP or CLRP instance");
  EstimatorOptions s_opt;
  std::string s_in, s_out, s_config, s_mode = "mdvrp";
  std::optional<std::uint64_t> s_seed;
  s_opt.add(so);
  so->add_option("--in", s_in)->required();
  so->add_option("--seed", s_seed);
  so->add_option("--config", s_config, "GA config JSON");
  so->add_option("--mode", s_mode)->check(CLI::IsMember({"mdvrp", "clrp"}));
  so->add_option("--out", s_out, "solution JSON (stdout by default)");

  // bench
  auto* be = app.add_subcommand("bench", "run a benchmark suite");
  EstimatorOptions b_opt;
  SuiteConfig b_suite;
  int b_repeats = 10;
  std::string b_out, b_config;
  bool b_no_baselines = false;
  b_opt.add(be);
  be->add_option("--suite", b_suite.suite, "T, O, D1..D8 or cordeau");
  be->add_option("--count", b_suite.count, "instances of a generated suite");
  be->add_option("--seed", b_suite.seed);
  be->add_option("--data-dir", b_suite.data_dir);
  be->add_option("--repeats", b_repeats)->check(CLI::PositiveNumber);
  be->add_option("--config", b_config, "GA config JSON");
  be->add_flag("--no-baselines", b_no_baselines);
  be->add_option("--out", b_out, "report CSV (stdout by default)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      InstanceSpec spec;
      spec.customers = {g_n, g_n};
      spec.depots = {g_depots, g_depots};
      spec.positioning = parse_positioning(g_pos);
      spec.demand = parse_demand_model(g_demand);
      spec.grid_size = g_grid;
      if (g_kind == "cvrp")
        write_instance(generate_cvrp(spec, g_seed), g_out);
      else
        write_instance(generate_mdvrp(spec, g_seed), g_out);
    } else if (*cs) {
      const auto inst = load_cvrp(cs_in);
      CvrpResult r;
      if (cs_exact) {
        r = solve_exact(inst);
      } else {
        SolverConfig sc;
        sc.time_limit = cs_time;
        sc.iteration_limit = cs_iter;
        sc.seed = cs_seed;
        r = solve_heuristic(inst, sc);
      }
      Json j;
      j["cost"] = r.cost;
      Json routes = Json::array();
      for (const auto& rt : r.routes) routes.push_back({{"customers", rt.customers}, {"load", rt.load}, {"cost", rt.cost}});
      j["routes"] = routes;
      emit(j.dump(2) + "\n", cs_out);
    } else if (*est) {
      const auto e = e_opt.make();
      std::cout << format_number(e->estimate(load_cvrp(e_in))) << "\n";
    } else if (*tr) {
      const auto ds = load_dataset(t_data);
      if (ds.manifest.contains("phase") && ds.manifest["phase"].get<int>() != t_phase)
        throw ConfigError("dataset phase " + ds.manifest["phase"].dump() + " does not match --phase");
      TrainConfig tc;
      tc.verbose = true;
      if (!t_train.empty()) tc = train_config_from_json(read_json_file(t_train), tc);
      Predictor model = t_init.empty() ? Predictor(t_model.empty() ? ModelConfig{} : model_config_from_json(read_json_file(t_model)),
                                                   tc.seed)
                                       : Predictor::load(t_init);
      if (!t_init.empty()) tc.init_bias_from_data = false;
      const auto res = train(model, ds.instances(), ds.labels(), tc);
      model.save(t_out);
      for (const auto& e : res.history)
        if (e.epoch == res.best_epoch)
          std::cerr << "best epoch " << e.epoch << " validation mape " << format_number(e.validation_mape) << "\n";
    } else if (*dg) {
      PhaseConfig pc;
      pc.count = d_count;
      pc.sizes = {d_min, d_max};
      pc.seed = d_seed;
      pc.label.iterations = d_iter;
      if (d_phase == 1) {
        save_dataset(d_out, phase1(pc));
      } else if (d_phase == 2) {
        save_dataset(d_out, phase2(pc));
      } else {
        Phase3Config c = d_desk ? Phase3Config::desk() : Phase3Config{};
        c.base = pc;
        if (!d_model.empty()) c.model = model_config_from_json(read_json_file(d_model), c.model);
        if (!d_train.empty()) c.train = train_config_from_json(read_json_file(d_train), c.train);
        if (!d_ga.empty()) c.ga = ga_config_from_json(read_json_file(d_ga), c.ga);
        const auto res = phase3(c);
        save_dataset(d_out, res.data);
        res.model.save(std::filesystem::path(d_out) / "model.json");
      }
    } else if (*so) {
      GaConfig ga;
      if (!s_config.empty()) ga = ga_config_from_json(read_json_file(s_config));
      if (s_seed) ga.seed = *s_seed;
      const auto e = s_opt.make();
      const auto res = s_mode == "clrp" ? solve_clrp(load_clrp(s_in), *e, ga) : solve_mdvrp(load_mdvrp(s_in), *e, ga);
      auto j = to_json_value(res.final);
      j["estimator"] = e->name();
      j["generations"] = res.search.history.size();
      emit(j.dump(2) + "\n", s_out);
    } else if (*be) {
      ExperimentConfig ec;
      if (!b_config.empty()) ec.ga = ga_config_from_json(read_json_file(b_config));
      ec.repeats = b_repeats;
      ec.baselines = !b_no_baselines;
      const auto e = b_opt.make();
      const auto instances = suite_instances(b_suite);
      emit(report_to_csv(run_experiment(instances, b_suite.suite, *e, ec)), b_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
