#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hvrp/error.hpp"
#include "hvrp/estimators.hpp"

using namespace hvrp;

namespace {

// N customers spread so the bounding box is exactly [0,1000]^2.
CvrpInstance square_instance(int n, int demand = 1, int capacity = 10) {
  CvrpInstance inst;
  inst.depot = {0, 0};
  inst.capacity = capacity;
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 1.0 : static_cast<double>(i) / (n - 1);
    inst.customers.push_back({{1000.0 * t, 1000.0 * (1.0 - t) * (i % 2) + 1000.0 * (i == n - 1)}, demand});
  }
  return inst;
}

std::vector<CvrpInstance> varied_instances(int count, std::uint64_t seed) {
  InstanceSpec spec;
  spec.customers = {10, 60};
  std::vector<CvrpInstance> out;
  for (int i = 0; i < count; ++i) out.push_back(generate_cvrp(spec, seed + i));
  return out;
}

// Normal equations (X^T X) b = X^T y by Cramer's rule.
std::array<double, 3> normal_equations(const std::vector<std::array<double, 3>>& x, const std::vector<double>& y) {
  double m[3][3] = {}, r[3] = {};
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int a = 0; a < 3; ++a) {
      r[a] += x[i][a] * y[i];
      for (int b = 0; b < 3; ++b) m[a][b] += x[i][a] * x[i][b];
    }
  auto det = [](double q[3][3]) {
    return q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
           q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
  };
  const double d = det(m);
  std::array<double, 3> out{};
  for (int c = 0; c < 3; ++c) {
    double q[3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) q[a][b] = b == c ? r[a] : m[a][b];
    out[c] = det(q) / d;
  }
  return out;
}

}  // namespace

TEST(Estimators, BoundingAreaIncludesDepot) {
  CvrpInstance inst{"a", {-1, -2}, {{{3, 4}, 1}, {{1, 1}, 1}}, 5, std::nullopt};
  EXPECT_DOUBLE_EQ(bounding_area(inst), 4.0 * 6.0);
}

TEST(Estimators, DaganzoValues) {
  const auto inst100 = square_instance(100);
  ASSERT_DOUBLE_EQ(bounding_area(inst100), 1e6);
  EXPECT_NEAR(daganzo_estimate(inst100, 0.0, 6.52), 9000.0, 1e-9);
  const auto inst50 = square_instance(50);
  EXPECT_NEAR(daganzo_estimate(inst50, 1.0, kDaganzoDefaultC), 14680.829152203867, 1e-8);
  EXPECT_EQ(kDaganzoDefaultC, 6.52);
  EXPECT_THROW(daganzo_estimate(inst50, 1.0, 0.0), ConfigError);
}

TEST(Estimators, DegenerateAreaGivesZero) {
  CvrpInstance inst{"z", {5, 5}, {{{5, 5}, 1}, {{5, 5}, 1}}, 5, std::nullopt};
  EXPECT_EQ(daganzo_estimate(inst, 1.0, 6.52), 0.0);
}

TEST(Estimators, FigliozziStructure) {
  const auto inst = square_instance(20, 3, 10);  // M = ceil(60 / 10) = 6
  EXPECT_EQ(min_vehicles(inst), 6);
  EXPECT_EQ(figliozzi_estimate(inst, {0, 0, 0}), 0.0);
  EXPECT_NEAR(figliozzi_estimate(inst, {7, 2, 3}, 20), 2.0 * 1e6 / 20 + 3.0 * 20, 1e-9);
  const double expected = 7.0 * (14.0 / 20.0) * std::sqrt(1e6 * 20) + 2.0 * 1e6 / 20 + 3.0 * 6;
  EXPECT_NEAR(figliozzi_estimate(inst, {7, 2, 3}), expected, 1e-8);
  EXPECT_THROW(figliozzi_estimate(inst, {1, 1, 1}, 21), ConfigError);
}

TEST(Estimators, FitRecoversExactParameters) {
  const auto insts = varied_instances(60, 10);
  const FigliozziParams truth{0.71, 0.013, 37.5};
  std::vector<double> y;
  for (const auto& i : insts) y.push_back(figliozzi_estimate(i, truth));
  const auto p = fit_figliozzi(insts, y);
  EXPECT_NEAR(p.a1, truth.a1, 1e-6);
  EXPECT_NEAR(p.a2, truth.a2, 1e-6);
  EXPECT_NEAR(p.a3, truth.a3, 1e-6);
}

TEST(Estimators, FitMatchesNormalEquationsAndIgnoresOrder) {
  auto insts = varied_instances(40, 77);
  std::vector<double> y;
  Rng rng(5);
  for (const auto& i : insts) y.push_back(daganzo_estimate(i, 1.0, 6.52) * uniform_real(rng, 0.8, 1.2));
  std::vector<std::array<double, 3>> x;
  for (const auto& i : insts) x.push_back(figliozzi_features(i));
  const auto ref = normal_equations(x, y);
  const auto p = fit_figliozzi(insts, y);
  EXPECT_NEAR(p.a1, ref[0], 1e-6 * std::abs(ref[0]));
  EXPECT_NEAR(p.a2, ref[1], 1e-6 * std::abs(ref[1]) + 1e-9);
  EXPECT_NEAR(p.a3, ref[2], 1e-6 * std::abs(ref[2]) + 1e-9);
  std::reverse(insts.begin(), insts.end());
  std::reverse(y.begin(), y.end());
  const auto q = fit_figliozzi(insts, y);
  EXPECT_NEAR(q.a1, p.a1, 1e-9 * std::abs(p.a1));
  EXPECT_NEAR(q.a3, p.a3, 1e-9 * std::abs(p.a3));
}

TEST(Estimators, FitRejectsDegenerateData) {
  const auto one = varied_instances(1, 3).front();
  std::vector<CvrpInstance> same(5, one);
  std::vector<double> y(5, 100.0);
  EXPECT_THROW(fit_figliozzi(same, y), FitError);
  EXPECT_THROW(fit_figliozzi(std::span(same).first(2), std::span(y).first(2)), FitError);
}

TEST(Estimators, DaganzoCFitRecoversConstant) {
  const auto insts = varied_instances(30, 200);
  std::vector<double> y;
  for (const auto& i : insts) y.push_back(daganzo_estimate(i, 1.0, 4.0));
  EXPECT_NEAR(fit_daganzo_c(insts, y, 1.0), 4.0, 1e-9);
}

TEST(Estimators, ScaleLinearityAndBatchPurity) {
  const auto insts = varied_instances(10, 400);
  std::vector<CvrpInstance> scaled = insts;
  for (auto& s : scaled) {
    s.depot = {s.depot.x * 3, s.depot.y * 3};
    for (auto& c : s.customers) c.pos = {c.pos.x * 3, c.pos.y * 3};
  }
  DaganzoEstimator dag;
  FigliozziEstimator fig({0.5, 0.0, 0.0});
  const auto a = dag.estimate_batch(insts), b = dag.estimate_batch(scaled);
  const auto fa = fig.estimate_batch(insts), fb = fig.estimate_batch(scaled);
  for (std::size_t i = 0; i < insts.size(); ++i) {
    EXPECT_NEAR(b[i], 3 * a[i], 1e-9 * b[i]);
    EXPECT_NEAR(fb[i], 3 * fa[i], 1e-9 * fb[i]);
  }
  const auto head = dag.estimate_batch(std::span(insts).first(4));
  const auto tail = dag.estimate_batch(std::span(insts).subspan(4));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(head[i], a[i]);
  for (std::size_t i = 4; i < insts.size(); ++i) EXPECT_EQ(tail[i - 4], a[i]);
}

TEST(Estimators, GapAndMape) {
  EXPECT_EQ(percent_gap(100, 100), 0.0);
  EXPECT_NEAR(percent_gap(101, 100), 1.0, 1e-12);
  EXPECT_NEAR(percent_gap(586.39, 576.87), 1.65, 0.005);
  EXPECT_NEAR(percent_gap(429.6, 424.9), 1.11, 0.005);
  EXPECT_THROW(percent_gap(1, 0), ConfigError);
  const std::vector<double> p{110, 90}, r{100, 100};
  EXPECT_NEAR(mape(p, r), 10.0, 1e-12);
}
