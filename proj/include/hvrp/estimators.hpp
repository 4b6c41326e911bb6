#pragma once

// Closed-form CVRP cost estimates and the estimator interface used by the GA.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hvrp/instances.hpp"

namespace hvrp {

class CostEstimator {
 public:
  virtual ~CostEstimator() = default;
  /// One estimate per instance, in order. Must be pure: the result for an
  /// instance does not depend on the rest of the batch.
  virtual std::vector<double> estimate_batch(std::span<const CvrpInstance> instances) const = 0;
  virtual std::string name() const = 0;

  double estimate(const CvrpInstance& inst) const { return estimate_batch(std::span(&inst, 1)).front(); }
};

/// Area of the axis-aligned bounding box of the depot and all customers.
double bounding_area(const CvrpInstance& inst);

/// ceil(sum q / Q), the minimum possible number of routes.
int min_vehicles(const CvrpInstance& inst);

inline constexpr double kDaganzoDefaultC = 6.52;

/// (0.9 + k N / C^2) sqrt(A N).
double daganzo_estimate(const CvrpInstance& inst, double k, double C);

struct FigliozziParams {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
};

/// Regression features [((N-M)/N) sqrt(AN), A/N, M].
std::array<double, 3> figliozzi_features(const CvrpInstance& inst, std::optional<int> vehicles = std::nullopt);

/// a1 ((N-M)/N) sqrt(AN) + a2 A/N + a3 M, with M = min_vehicles when absent.
double figliozzi_estimate(const CvrpInstance& inst, const FigliozziParams& p, std::optional<int> vehicles = std::nullopt);

/// Ordinary least squares over the Figliozzi features. Throws FitError on
/// fewer than three samples or rank-deficient features.
FigliozziParams fit_figliozzi(std::span<const CvrpInstance> instances, std::span<const double> costs);

/// C for a fixed k minimizing the squared relative error of daganzo_estimate.
/// Closed form, since the estimate is affine in k / C^2.
double fit_daganzo_c(std::span<const CvrpInstance> instances, std::span<const double> costs, double k = 1.0);

class DaganzoEstimator final : public CostEstimator {
 public:
  explicit DaganzoEstimator(double k = 1.0, double C = kDaganzoDefaultC);
  std::vector<double> estimate_batch(std::span<const CvrpInstance> instances) const override;
  std::string name() const override { return "daganzo"; }

 private:
  double k_, c_;
};

class FigliozziEstimator final : public CostEstimator {
 public:
  explicit FigliozziEstimator(FigliozziParams p) : p_(p) {}
  std::vector<double> estimate_batch(std::span<const CvrpInstance> instances) const override;
  std::string name() const override { return "figliozzi"; }
  const FigliozziParams& params() const { return p_; }

 private:
  FigliozziParams p_;
};

/// (value - reference) / reference * 100. Throws ConfigError if reference <= 0.
double percent_gap(double value, double reference);

/// Mean of |percent_gap| over pairs.
double mape(std::span<const double> predicted, std::span<const double> reference);

}  // namespace hvrp
