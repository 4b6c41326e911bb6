#pragma once

// Labeled CVRP datasets for predictor training. Phase 1 draws random
// instances; phase 2 cuts subproblems out of MDVRP assignments built by the
// seeding rules; phase 3 alternates GA runs with retraining.
//
// On disk a dataset is a directory holding manifest.json and records.jsonl
// (one record per line).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hvrp/gancp.hpp"
#include "hvrp/json_io.hpp"
#include "hvrp/predictor.hpp"

namespace hvrp {

struct LabelConfig {
  /// Iteration budget per label; absent means time_limit seconds per label.
  std::optional<long> iterations = 200;
  double time_limit = 5.0;

  SolverConfig solver(std::uint64_t seed) const;
};

struct Record {
  std::string id;
  int phase = 1;
  int step = 0;        // phase 3 step, 1..4
  std::string source;  // random, nda, neighbor, ga
  bool perturbed = false;
  std::uint64_t seed = 0;
  CvrpInstance instance;
  double label = 0.0;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Dataset {
  Json manifest;
  std::vector<Record> records;

  std::vector<CvrpInstance> instances() const;
  std::vector<double> labels() const;
};

struct PhaseConfig {
  std::size_t count = 2000;
  IntRange sizes{10, 60};
  IntRange depots{2, 4};  // MDVRP sources of phases 2 and 3
  std::uint64_t seed = 1;
  LabelConfig label;

  void validate() const;
};

/// Moves between 1 and max(1, N/10) distinct random customers to another
/// depot. Returns the number moved.
int perturb_assignment(Genes& genes, int num_depots, Rng& rng);

/// The generation settings recorded in a phase 1 or 2 manifest.
PhaseConfig phase_config_from_manifest(const Json& manifest);

double label_instance(const CvrpInstance& inst, const LabelConfig& cfg, std::uint64_t seed);

Dataset phase1(const PhaseConfig& cfg);

/// 80% of the records come from NDA or nearest-neighbor assignments (70% of
/// those with up to 10% of customers reassigned at random), the rest are
/// phase-1 style. Quotas are exact.
Dataset phase2(const PhaseConfig& cfg);

struct Phase3Config {
  PhaseConfig base;
  ModelConfig model{32, 4, 3, 10, 4};
  TrainConfig train;
  GaConfig ga;
  int candidates_per_instance = 2;

  static Phase3Config desk();
  void validate() const;
};

struct Phase3Result {
  Dataset data;
  Predictor model;
  std::vector<Predictor> step_models;  // after each of the four steps
};

/// Four steps of total/4 records each. Step s runs the GA with the model from
/// step s-1 (randomly initialized for s = 1), labels the subproblems of its
/// top candidates and retrains on everything collected, warm-started.
Phase3Result phase3(const Phase3Config& cfg);

Json record_to_json(const Record& r);
Record record_from_json(const Json& j);

void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace hvrp
