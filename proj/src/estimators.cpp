#include "hvrp/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "hvrp/error.hpp"

namespace hvrp {

double bounding_area(const CvrpInstance& inst) {
  double x0 = inst.depot.x, x1 = inst.depot.x, y0 = inst.depot.y, y1 = inst.depot.y;
  for (const auto& c : inst.customers) {
    x0 = std::min(x0, c.pos.x);
    x1 = std::max(x1, c.pos.x);
    y0 = std::min(y0, c.pos.y);
    y1 = std::max(y1, c.pos.y);
  }
  return (x1 - x0) * (y1 - y0);
}

int min_vehicles(const CvrpInstance& inst) {
  return static_cast<int>((inst.total_demand() + inst.capacity - 1) / inst.capacity);
}

double daganzo_estimate(const CvrpInstance& inst, double k, double C) {
  if (!(C > 0)) throw ConfigError("daganzo: C must be positive");
  const double n = static_cast<double>(inst.size());
  return (0.9 + k * n / (C * C)) * std::sqrt(bounding_area(inst) * n);
}

std::array<double, 3> figliozzi_features(const CvrpInstance& inst, std::optional<int> vehicles) {
  const double n = static_cast<double>(inst.size());
  const int m = vehicles ? *vehicles : min_vehicles(inst);
  if (m < 1 || m > static_cast<int>(inst.size()))
    throw ConfigError("figliozzi: vehicle count " + std::to_string(m) + " outside [1, N]");
  const double a = bounding_area(inst);
  return {(n - m) / n * std::sqrt(a * n), a / n, static_cast<double>(m)};
}

double figliozzi_estimate(const CvrpInstance& inst, const FigliozziParams& p, std::optional<int> vehicles) {
  const auto f = figliozzi_features(inst, vehicles);
  return p.a1 * f[0] + p.a2 * f[1] + p.a3 * f[2];
}

FigliozziParams fit_figliozzi(std::span<const CvrpInstance> instances, std::span<const double> costs) {
  if (instances.size() != costs.size()) throw ConfigError("fit: instance and label counts differ");
  if (instances.size() < 3) throw FitError("fit: at least three samples are required");
  const auto n = static_cast<Eigen::Index>(instances.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto f = figliozzi_features(instances[i]);
    x.row(i) << f[0], f[1], f[2];
    y(i) = costs[i];
  }
  // Column scaling keeps the rank decision independent of feature units.
  Eigen::Vector3d scale = x.colwise().norm().transpose();
  for (int j = 0; j < 3; ++j) {
    if (scale(j) == 0.0) throw FitError("fit: feature " + std::to_string(j) + " is identically zero");
    x.col(j) /= scale(j);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw FitError("fit: features are collinear (rank " + std::to_string(qr.rank()) + ")");
  const Eigen::Vector3d beta = qr.solve(y).cwiseQuotient(scale);
  return {beta(0), beta(1), beta(2)};
}

double fit_daganzo_c(std::span<const CvrpInstance> instances, std::span<const double> costs, double k) {
  if (instances.size() != costs.size()) throw ConfigError("fit: instance and label counts differ");
  if (instances.empty()) throw FitError("fit: no samples");
  if (!(k > 0)) throw ConfigError("daganzo: k must be positive to fit C");
  // estimate = 0.9 s + t N s with s = sqrt(AN), t = k / C^2
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!(costs[i] > 0)) throw ConfigError("fit: labels must be positive");
    const double n = static_cast<double>(instances[i].size());
    const double s = std::sqrt(bounding_area(instances[i]) * n);
    const double a = n * s / costs[i];
    const double b = 1.0 - 0.9 * s / costs[i];
    num += a * b;
    den += a * a;
  }
  if (den == 0.0) throw FitError("fit: degenerate instances (zero area)");
  const double t = num / den;
  if (!(t > 0)) throw FitError("fit: best fit needs a non-positive k / C^2");
  return std::sqrt(k / t);
}

DaganzoEstimator::DaganzoEstimator(double k, double C) : k_(k), c_(C) {
  if (!(C > 0)) throw ConfigError("daganzo: C must be positive");
}

std::vector<double> DaganzoEstimator::estimate_batch(std::span<const CvrpInstance> instances) const {
  std::vector<double> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(daganzo_estimate(inst, k_, c_));
  return out;
}

std::vector<double> FigliozziEstimator::estimate_batch(std::span<const CvrpInstance> instances) const {
  std::vector<double> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(figliozzi_estimate(inst, p_));
  return out;
}

double percent_gap(double value, double reference) {
  if (!(reference > 0)) throw ConfigError("gap: reference must be positive");
  return (value - reference) / reference * 100.0;
}

double mape(std::span<const double> predicted, std::span<const double> reference) {
  if (predicted.size() != reference.size()) throw ConfigError("mape: length mismatch");
  if (predicted.empty()) throw ConfigError("mape: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) s += std::abs(percent_gap(predicted[i], reference[i]));
  return s / static_cast<double>(predicted.size());
}

}  // namespace hvrp
