#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "hvrp/datagen.hpp"
#include "hvrp/error.hpp"

using namespace hvrp;

namespace {

PhaseConfig small(std::size_t count, std::uint64_t seed = 3) {
  PhaseConfig cfg;
  cfg.count = count;
  cfg.seed = seed;
  cfg.label.iterations = 50;
  return cfg;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hvrp-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  return p;
}

double mape_of(const Predictor& model, const std::vector<CvrpInstance>& xs, const std::vector<double>& ys) {
  std::vector<double> pred;
  for (const auto& x : xs) pred.push_back(model.predict(x));
  return mape(pred, ys);
}

}  // namespace

TEST(Phase1, DeterministicAndReproducibleFromManifest) {
  const auto a = phase1(small(20));
  const auto b = phase1(small(20));
  ASSERT_EQ(a.records.size(), 20u);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.manifest, b.manifest);
  const auto again = phase1(phase_config_from_manifest(a.manifest));
  EXPECT_EQ(again.records, a.records);
}

TEST(Phase1, InstancesInRangeAndLabelsAboveRadialBound) {
  const auto ds = phase1(small(30));
  for (const auto& r : ds.records) {
    EXPECT_TRUE(IntRange({10, 60}).contains(static_cast<int>(r.instance.size())));
    double far = 0;
    for (const auto& c : r.instance.customers) far = std::max(far, distance(r.instance.depot, c.pos));
    EXPECT_GE(r.label, 2 * far - 1e-9);
    EXPECT_EQ(r.source, "random");
    EXPECT_FALSE(r.instance.fleet_limit.has_value());
  }
}

TEST(Phase2, ExactQuotas) {
  const auto ds = phase2(small(300));
  int targeted = 0, perturbed = 0;
  for (const auto& r : ds.records) {
    targeted += r.source == "nda" || r.source == "neighbor";
    perturbed += r.perturbed;
    if (r.perturbed) EXPECT_NE(r.source, "random");
  }
  EXPECT_EQ(targeted, 240);
  EXPECT_EQ(perturbed, 168);
  EXPECT_EQ(ds.manifest["sources"]["perturbed"].get<int>(), 168);
  EXPECT_EQ(ds.manifest["sources"]["random"].get<int>(), 60);
  EXPECT_EQ(phase2(phase_config_from_manifest(ds.manifest)).records, ds.records);
}

TEST(Phase2, PerturbationMovesAtMostTenPercent) {
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    const int n = uniform_int(rng, 1, 120);
    Genes g(n);
    for (auto& x : g) x = uniform_int(rng, 0, 3);
    const Genes before = g;
    const int moved = perturb_assignment(g, 4, rng);
    int changed = 0;
    for (int i = 0; i < n; ++i) changed += g[i] != before[i];
    EXPECT_EQ(changed, moved);
    EXPECT_GE(moved, 1);
    EXPECT_LE(moved, std::max(1, n / 10));
  }
}

TEST(Dataset, SaveLoadRoundTrip) {
  const auto ds = phase2(small(12));
  const auto dir = temp_dir("ds");
  save_dataset(dir, ds);
  const auto back = load_dataset(dir);
  EXPECT_EQ(back.records, ds.records);
  EXPECT_EQ(back.manifest, ds.manifest);
  std::filesystem::remove_all(dir);
}

TEST(Dataset, CorruptRecordNamesLine) {
  const auto dir = temp_dir("bad");
  save_dataset(dir, phase1(small(2)));
  {
    std::ofstream out(dir / "records.jsonl", std::ios::app);
    out << "{not json\n";
  }
  try {
    load_dataset(dir);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::filesystem::remove_all(dir);
}

TEST(Phase3, FourEqualStepsAndImproves) {
  Phase3Config cfg = Phase3Config::desk();
  cfg.base = small(240, 5);
  cfg.base.sizes = {10, 25};
  cfg.base.label.iterations = 100;
  cfg.model = {16, 2, 2, 8, 2};
  cfg.train.epochs = 15;
  cfg.ga.generations = 8;
  const auto res = phase3(cfg);
  ASSERT_EQ(res.data.records.size(), 240u);
  ASSERT_EQ(res.step_models.size(), 4u);
  std::vector<int> per(5, 0);
  for (const auto& r : res.data.records) {
    ++per[r.step];
    EXPECT_EQ(r.source, "ga");
  }
  EXPECT_EQ(per[1], 60);
  EXPECT_EQ(per[4], 60);
  EXPECT_EQ(res.data.manifest["steps"].size(), 4u);

  // held-out subproblems of GA runs driven by the final model
  std::vector<CvrpInstance> xs;
  std::vector<double> ys;
  InstanceSpec spec;
  spec.depots = {2, 3};
  spec.customers = {20, 60};
  spec.subproblem_range = std::pair<double, double>(10, 25);
  const NeuralEstimator est(res.model);
  for (std::uint64_t s = 0; xs.size() < 60; ++s) {
    const auto m = generate_mdvrp(spec, 9000 + s);
    GaConfig ga = cfg.ga;
    ga.seed = s;
    const auto run = evolve(make_problem(m), est, ga);
    for (std::size_t c = 0; c < 2 && c < run.candidates.size(); ++c)
      for (auto& sp : decompose(m, run.candidates[c].genes)) {
        sp.instance.fleet_limit.reset();
        ys.push_back(label_instance(sp.instance, cfg.base.label, s * 31 + c));
        xs.push_back(std::move(sp.instance));
      }
  }
  EXPECT_LE(mape_of(res.step_models[3], xs, ys), mape_of(res.step_models[0], xs, ys));
}
