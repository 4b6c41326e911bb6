#pragma once

// Baselines and experiment drivers: nearest-depot assignment, K-Means-10,
// generated and file-based suites, and the CSV report.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hvrp/gancp.hpp"

namespace hvrp {

Genes nda_assign(const MdvrpInstance& inst);

/// Lloyd's iterations from k distinct random customers as centroids; an
/// emptied cluster is reseeded at a random customer. Returns cluster labels.
std::vector<int> kmeans(std::span<const Point> points, int k, Rng& rng, std::vector<Point>* centroids = nullptr);

/// match[c] = depot of cluster c: repeatedly the closest unmatched
/// (centroid, depot) pair.
std::vector<int> match_clusters(std::span<const Point> centroids, std::span<const Point> depots);

struct KmeansResult {
  std::optional<Genes> genes;  // absent when no restart was routable
  std::optional<RoutingSolution> solution;
  double elapsed = 0.0;  // all restarts including routing
  int routable = 0;
};

/// Best routed assignment over `restarts` clusterings.
KmeansResult kmeans10(const AssignmentProblem& p, const GaConfig& routing, std::uint64_t seed, int restarts = 10);

struct BenchInstance {
  std::string id;
  MdvrpInstance instance;
  std::optional<double> best_known;
};

struct SuiteConfig {
  std::string suite = "T";  // T, O, D1..D8, cordeau
  std::size_t count = 10;   // generated suites
  IntRange customers{40, 240};
  IntRange depots{2, 8};
  std::pair<double, double> subproblem_range{10, 60};
  std::uint64_t seed = 1;
  std::filesystem::path data_dir = "data";
};

/// Generated or loaded instances of a suite. T keeps N/D inside the
/// subproblem range, O outside it, D1..D8 use the positioning and demand
/// rules of their class. cordeau loads data_dir/cordeau with the best known
/// values of data_dir/best_known.csv.
std::vector<BenchInstance> suite_instances(const SuiteConfig& cfg);

struct ReportRow {
  std::string suite;
  std::string instance;
  int customers = 0;
  int depots = 0;
  int repeats = 0;
  std::optional<double> nda;
  std::optional<double> kmeans;
  std::optional<double> kmeans_time;
  std::optional<double> predicted_avg;
  std::optional<double> plus_avg;
  std::optional<double> plus_best;
  std::optional<double> gancp_time_avg;
  std::optional<double> finalize_time_avg;
  std::optional<double> gap_nda_avg;
  std::optional<double> gap_nda_best;
  std::optional<double> gap_kmeans_avg;
  std::optional<double> gap_kmeans_best;
  std::optional<double> best_known;
  std::optional<double> gap_known_best;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct Report {
  std::vector<ReportRow> rows;  // one per instance
  /// Column means over the rows (missing cells skipped); instance "ALL".
  ReportRow aggregate() const;
};

struct ExperimentConfig {
  int repeats = 10;
  GaConfig ga;
  bool baselines = true;
};

Report run_experiment(const std::vector<BenchInstance>& instances, const std::string& suite, const CostEstimator& est,
                      const ExperimentConfig& cfg);

const std::vector<std::string>& report_columns();
/// Header, one line per row, then the aggregate line. Missing cells are empty.
std::string report_to_csv(const Report& r);
/// Rows of a CSV written by report_to_csv; the aggregate line is dropped.
Report report_from_csv(const std::string& text, const std::string& source = "<csv>");

}  // namespace hvrp
