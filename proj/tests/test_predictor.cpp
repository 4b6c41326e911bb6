#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "hvrp/error.hpp"
#include "hvrp/io.hpp"
#include "hvrp/predictor.hpp"

using namespace hvrp;

namespace {

CvrpInstance random_instance(int n, std::uint64_t seed) {
  InstanceSpec spec;
  spec.customers = {n, n};
  return generate_cvrp(spec, seed);
}

ModelConfig tiny() { return {4, 2, 1, 10, 4}; }

// Straight-line re-derivation of the forward pass with plain loops, reading
// parameters by tensor name.
double reference_forward(const Predictor& model, const KnnGraph& g) {
  std::map<std::string, std::vector<double>> t;
  std::map<std::string, std::pair<int, int>> shape;
  for (const auto& ti : model.tensors()) {
    const auto p = model.parameters().subspan(ti.offset, ti.size());
    t[ti.name].assign(p.begin(), p.end());
    shape[ti.name] = {ti.rows, ti.cols};
  }
  // column-major element (r, c)
  auto at = [&](const std::string& name, int r, int c) { return t[name][c * shape[name].first + r]; };
  const auto& cfg = model.config();
  const int n = g.num_nodes(), h = cfg.hidden, f = h * cfg.ff_multiplier, dh = h / cfg.heads;
  using M = std::vector<std::vector<double>>;
  auto matmul = [&](const M& a, const std::string& w, int in, int out) {
    M r(a.size(), std::vector<double>(out, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (int o = 0; o < out; ++o)
        for (int k = 0; k < in; ++k) r[i][o] += a[i][k] * at(w, k, o);
    return r;
  };
  auto norm = [&](M x, const std::string& gain, const std::string& bias) {
    for (auto& row : x) {
      double mu = 0, var = 0;
      for (double v : row) mu += v;
      mu /= h;
      for (double v : row) var += (v - mu) * (v - mu);
      var /= h;
      for (int c = 0; c < h; ++c) row[c] = (row[c] - mu) / std::sqrt(var + 1e-5) * at(gain, 0, c) + at(bias, 0, c);
    }
    return x;
  };
  M x(n, std::vector<double>(3));
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) x[i][c] = g.features(i, c);
  M u = matmul(x, "embed.W", 3, h);
  for (auto& row : u)
    for (int c = 0; c < h; ++c) row[c] += at("embed.b", 0, c);
  for (int l = 0; l < cfg.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    const M q = matmul(u, p + "Wq", h, h), k = matmul(u, p + "Wk", h, h), v = matmul(u, p + "Wv", h, h);
    M cat(n, std::vector<double>(h, 0.0));
    for (int hd = 0; hd < cfg.heads; ++hd)
      for (int i = 0; i < n; ++i) {
        const auto nb = g.neighbors(i);
        std::vector<double> s;
        for (int j : nb) {
          double d = 0;
          for (int c = hd * dh; c < (hd + 1) * dh; ++c) d += q[i][c] * k[j][c];
          s.push_back(std::exp(d / std::sqrt(double(h))));
        }
        double z = 0;
        for (double e : s) z += e;
        for (std::size_t e = 0; e < nb.size(); ++e)
          for (int c = hd * dh; c < (hd + 1) * dh; ++c) cat[i][c] += s[e] / z * v[nb[e]][c];
      }
    M o = matmul(cat, p + "Wo", h, h);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < h; ++c) o[i][c] += u[i][c];
    const M u1 = norm(o, p + "ln1.gain", p + "ln1.bias");
    M a = matmul(u1, p + "ff.W1", h, f);
    for (auto& row : a)
      for (int c = 0; c < f; ++c) row[c] = std::max(0.0, row[c] + at(p + "ff.b1", 0, c));
    M b = matmul(a, p + "ff.W2", f, h);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < h; ++c) b[i][c] += at(p + "ff.b2", 0, c) + u1[i][c];
    u = norm(b, p + "ln2.gain", p + "ln2.bias");
  }
  double sum = 0;
  for (const auto& row : u)
    for (int c = 0; c < h; ++c) sum += row[c] * at("readout.W", c, 0);
  return (sum / n + at("readout.b", 0, 0)) * g.scale_factor;
}

void randomize(Predictor& m, std::uint64_t seed, double spread = 0.5) {
  Rng rng(seed);
  for (auto& p : m.parameters()) p += uniform_real(rng, -spread, spread);
}

}  // namespace

TEST(KnnGraph, NormalizationAndFeatures) {
  CvrpInstance inst{"n", {0, 0}, {{{1000, 500}, 5}, {{250, 1000}, 10}}, 20, std::nullopt};
  const auto g = build_knn_graph(inst, 10);
  EXPECT_EQ(g.scale_factor, 1000.0);
  EXPECT_DOUBLE_EQ(g.features(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(g.features(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(g.features(1, 2), 0.25);
  EXPECT_DOUBLE_EQ(g.features(2, 0), 0.25);
  EXPECT_DOUBLE_EQ(g.features(2, 2), 0.5);
  EXPECT_EQ(g.features(0, 2), 0.0);
  for (int i = 0; i < g.num_nodes(); ++i) EXPECT_EQ(g.neighbors(i).size(), 2u);
}

TEST(KnnGraph, NegativeCoordinatesShifted) {
  CvrpInstance inst{"n", {-10, -20}, {{{-10, 20}, 1}, {{10, -20}, 1}}, 5, std::nullopt};
  const auto g = build_knn_graph(inst, 2);
  EXPECT_EQ(g.scale_factor, 40.0);
  EXPECT_DOUBLE_EQ(g.features(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(g.features(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.features(2, 0), 0.5);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 2; ++c) {
      EXPECT_GE(g.features(i, c), 0.0);
      EXPECT_LE(g.features(i, c), 1.0);
    }
}

TEST(KnnGraph, CollinearNearestNeighbor) {
  // nodes: depot at 0, customers at 1, 3, 7 on a line
  CvrpInstance inst{"l", {0, 0}, {{{1, 0}, 1}, {{3, 0}, 1}, {{7, 0}, 1}}, 5, std::nullopt};
  const auto g = build_knn_graph(inst, 1);
  EXPECT_EQ(g.neighbors(0)[0], 1);
  EXPECT_EQ(g.neighbors(1)[0], 0);
  EXPECT_EQ(g.neighbors(2)[0], 1);
  EXPECT_EQ(g.neighbors(3)[0], 2);
}

TEST(KnnGraph, CompleteWhenKExceedsN) {
  const auto g = build_knn_graph(random_instance(6, 1), 50);
  for (int i = 0; i < g.num_nodes(); ++i) {
    auto nb = std::vector<int>(g.neighbors(i).begin(), g.neighbors(i).end());
    std::sort(nb.begin(), nb.end());
    std::vector<int> expect;
    for (int j = 0; j < g.num_nodes(); ++j)
      if (j != i) expect.push_back(j);
    EXPECT_EQ(nb, expect);
  }
  EXPECT_THROW(build_knn_graph(random_instance(3, 1), 0), ConfigError);
}

TEST(Predictor, MatchesReferenceForward) {
  for (std::uint64_t s = 1; s <= 3; ++s) {
    Predictor m({8, 2, 2, 3, 2}, s);
    randomize(m, s + 10);
    const auto g = build_knn_graph(random_instance(7, s), 3);
    const double ref = reference_forward(m, g);
    EXPECT_NEAR(m.predict(g), ref, 1e-10 * std::abs(ref));
  }
  Predictor m(tiny(), 4);
  randomize(m, 5);
  const auto g = build_knn_graph(random_instance(3, 9), 10);
  EXPECT_NEAR(m.predict(g), reference_forward(m, g), 1e-9);
}

TEST(Predictor, ConstantReadout) {
  Predictor m(tiny(), 1);
  const auto& out = m.tensors()[m.tensors().size() - 2];
  for (std::size_t i = 0; i < out.size(); ++i) m.parameters()[out.offset + i] = 0.0;
  m.readout_bias() = 2.5;
  const auto g = build_knn_graph(random_instance(9, 3), 4);
  EXPECT_NEAR(m.predict(g), 2.5 * g.scale_factor, 1e-9);
}

TEST(Predictor, LossValues) {
  Predictor m(tiny(), 1);
  const auto g = build_knn_graph(random_instance(3, 1), 10);
  const double v = m.predict(g);
  EXPECT_NEAR(m.loss(g, v), 0.0, 1e-18);
  EXPECT_NEAR(m.loss(g, v - 2.0), 4.0, 1e-9);
}

TEST(Predictor, SoftmaxRowsSumToOne) {
  Predictor m({8, 4, 2, 3, 4}, 2);
  randomize(m, 3);
  const auto g = build_knn_graph(random_instance(12, 4), 3);
  for (int l = 0; l < 2; ++l)
    for (int hd = 0; hd < 4; ++hd)
      for (int i = 0; i < g.num_nodes(); ++i) {
        const auto a = m.attention(g, l, hd, i);
        double s = 0;
        for (double x : a) {
          EXPECT_GE(x, 0.0);
          s += x;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
      }
}

TEST(Predictor, GradientMatchesFiniteDifferencesPerTensor) {
  Predictor m({6, 3, 2, 3, 2}, 3);
  randomize(m, 8, 0.3);
  // Unit-scale coordinates keep the prediction O(1), so the differences are
  // not swamped by rounding in a large rescaled output.
  auto inst = random_instance(5, 2);
  inst.depot = {inst.depot.x / 1000, inst.depot.y / 1000};
  for (auto& c : inst.customers) c.pos = {c.pos.x / 1000, c.pos.y / 1000};
  auto g = build_knn_graph(inst, 3);
  const double label = m.predict(g) + 1.0;  // keeps the loss O(1) so differences are not lost to rounding
  std::vector<double> grad(m.num_parameters(), 0.0);
  m.loss(g, label, grad);
  auto params = m.parameters();
  const double eps = 1e-4;
  for (const auto& t : m.tensors()) {
    double worst = 0.0;
    for (std::size_t i = t.offset; i < t.offset + t.size(); ++i) {
      const double orig = params[i];
      params[i] = orig + eps;
      const double up = m.loss(g, label);
      params[i] = orig - eps;
      const double down = m.loss(g, label);
      params[i] = orig;
      const double fd = (up - down) / (2 * eps);
      worst = std::max(worst, std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6}));
    }
    EXPECT_LT(worst, 1e-4) << t.name;
  }
}

TEST(Predictor, GradientAccumulates) {
  Predictor m(tiny(), 1);
  const auto g = build_knn_graph(random_instance(3, 1), 10);
  std::vector<double> once(m.num_parameters(), 0.0), twice(m.num_parameters(), 0.0);
  m.loss(g, 1.0, once);
  m.loss(g, 1.0, twice);
  m.loss(g, 1.0, twice);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(twice[i], 2 * once[i], 1e-12 * (1 + std::abs(once[i])));
  std::vector<double> wrong(3);
  EXPECT_THROW(m.loss(g, 1.0, wrong), ConfigError);
}

TEST(Predictor, InvariantToPermutationTranslationAndScalesLinearly) {
  Predictor m({16, 4, 2, 5, 2}, 7);
  randomize(m, 1, 0.2);
  Rng rng(11);
  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto inst = random_instance(25, s);
    const double base = m.predict(inst);
    auto perm = inst;
    std::shuffle(perm.customers.begin(), perm.customers.end(), rng);
    EXPECT_NEAR(m.predict(perm), base, 1e-9 * std::abs(base));
    auto moved = inst;
    const double dx = uniform_real(rng, -500, 500), dy = uniform_real(rng, -500, 500);
    moved.depot = {moved.depot.x + dx, moved.depot.y + dy};
    for (auto& c : moved.customers) c.pos = {c.pos.x + dx, c.pos.y + dy};
    EXPECT_NEAR(m.predict(moved), base, 1e-9 * std::abs(base));
    auto scaled = inst;
    scaled.depot = {scaled.depot.x * 4, scaled.depot.y * 4};
    for (auto& c : scaled.customers) c.pos = {c.pos.x * 4, c.pos.y * 4};
    EXPECT_NEAR(m.predict(scaled), 4 * base, 1e-9 * std::abs(base));
  }
}

TEST(Predictor, RejectsBadConfigAndFeatures) {
  EXPECT_THROW(Predictor({6, 4, 1, 3, 4}), ConfigError);
  EXPECT_THROW(Predictor({0, 1, 1, 3, 4}), ConfigError);
  Predictor m(tiny());
  auto g = build_knn_graph(random_instance(3, 1), 10);
  g.features.conservativeResize(Eigen::NoChange, 2);
  EXPECT_THROW(m.predict(g), ConfigError);
}

TEST(Predictor, CheckpointRoundTripIsExact) {
  Predictor m({8, 2, 2, 4, 4}, 5);
  randomize(m, 6);
  const auto path = std::filesystem::temp_directory_path() / "hvrp_ckpt_test.json";
  m.save(path);
  const auto back = Predictor::load(path);
  EXPECT_EQ(back.config(), m.config());
  ASSERT_EQ(back.num_parameters(), m.num_parameters());
  for (std::size_t i = 0; i < m.num_parameters(); ++i) EXPECT_EQ(back.parameters()[i], m.parameters()[i]);
  std::filesystem::remove(path);

  auto text = m.to_json();
  EXPECT_THROW(Predictor::from_json(text.substr(0, text.size() / 2)), ParseError);
  auto bad = text;
  bad.replace(bad.find("\"version\":1"), 11, "\"version\":9");
  EXPECT_THROW(Predictor::from_json(bad), ParseError);
  bad = text;
  bad.replace(bad.find("\"hidden\":8"), 10, "\"hidden\":4");
  EXPECT_THROW(Predictor::from_json(bad), ParseError);
}

TEST(Predictor, TrainingMemorizesSingleInstance) {
  Predictor m({8, 2, 1, 5, 2}, 1);
  const auto inst = random_instance(8, 3);
  std::vector<CvrpInstance> data(50, inst);
  std::vector<double> labels(50, 1234.5);
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 30;
  cfg.batch_size = 10;
  const auto res = train(m, data, labels, cfg);
  EXPECT_EQ(res.history.size(), 30u);
  EXPECT_LT(m.loss(build_knn_graph(inst, 5), 1234.5), 1e-4 * 1234.5 * 1234.5);
}

TEST(Predictor, TrainingIsDeterministicAndDescends) {
  std::vector<CvrpInstance> data;
  std::vector<double> labels;
  for (std::uint64_t s = 1; s <= 30; ++s) {
    data.push_back(random_instance(10 + static_cast<int>(s % 7), s));
    labels.push_back(800.0 + 40.0 * data.back().size());
  }
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 8;
  cfg.batch_size = 8;
  Predictor a({8, 2, 1, 5, 2}, 3), b({8, 2, 1, 5, 2}, 3);
  const auto ra = train(a, data, labels, cfg);
  const auto rb = train(b, data, labels, cfg);
  for (std::size_t i = 0; i < a.num_parameters(); ++i) ASSERT_EQ(a.parameters()[i], b.parameters()[i]);
  ASSERT_EQ(ra.history.size(), 8u);
  EXPECT_LE(ra.best_validation_loss, ra.history.front().validation_loss);
  for (const auto& e : ra.history) EXPECT_TRUE(std::isfinite(e.train_loss));
  EXPECT_THROW(train(a, std::span<const CvrpInstance>{}, std::span<const double>{}, cfg), ConfigError);
}

TEST(Predictor, FullBatchLossDescendsWithSmallStep) {
  std::vector<CvrpInstance> data;
  std::vector<double> labels;
  for (std::uint64_t s = 1; s <= 6; ++s) {
    data.push_back(random_instance(8, s + 40));
    labels.push_back(3000.0 + 100.0 * s);
  }
  Predictor m({8, 2, 1, 4, 2}, 2);
  TrainConfig cfg;
  cfg.learning_rate = 1e-4;
  cfg.epochs = 15;
  cfg.batch_size = data.size();
  cfg.validation_fraction = 0.0;
  const auto r = train(m, data, labels, cfg);
  for (std::size_t e = 1; e < r.history.size(); ++e)
    EXPECT_LE(r.history[e].train_loss, r.history[e - 1].train_loss * (1 + 1e-9));
}

TEST(Predictor, EstimatorBatchesAreElementwise) {
  Predictor m({8, 2, 1, 5, 2}, 9);
  randomize(m, 2, 0.2);
  const NeuralEstimator est(m);
  std::vector<CvrpInstance> xs;
  for (std::uint64_t s = 1; s <= 9; ++s) xs.push_back(random_instance(5 + static_cast<int>(s), s));
  const auto all = est.estimate_batch(xs);
  const auto a = est.estimate_batch(std::span(xs).first(4));
  const auto b = est.estimate_batch(std::span(xs).subspan(4));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a[i], all[i], 1e-9 * std::abs(all[i]));
  for (std::size_t i = 4; i < xs.size(); ++i) EXPECT_NEAR(b[i - 4], all[i], 1e-9 * std::abs(all[i]));
  EXPECT_EQ(est.estimate(xs[0]), m.predict(xs[0]));
  EXPECT_TRUE(est.estimate_batch({}).empty());
}
