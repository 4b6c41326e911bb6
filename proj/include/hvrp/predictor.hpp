#pragma once

// Graph-attention regression model for CVRP cost: a linear node embedding,
// L encoder blocks (neighbor-masked multi-head attention and a feed-forward
// sublayer, each with a residual connection and layer normalization) and a
// mean readout rescaled by the graph's coordinate scale. Gradients are
// computed by a hand-written reverse pass.

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hvrp/estimators.hpp"
#include "hvrp/knn_graph.hpp"
#include "hvrp/random.hpp"

namespace hvrp {

struct ModelConfig {
  int hidden = 128;
  int heads = 8;
  int layers = 6;
  int knn = 10;
  int ff_multiplier = 4;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

class Predictor {
 public:
  explicit Predictor(const ModelConfig& cfg, std::uint64_t seed = 1);

  const ModelConfig& config() const { return cfg_; }
  const std::vector<TensorInfo>& tensors() const { return layout_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t num_parameters() const { return params_.size(); }

  double predict(const KnnGraph& g) const;
  double predict(const CvrpInstance& inst) const { return predict(build_knn_graph(inst, cfg_.knn)); }

  /// (predict(g) - label)^2. When `grad` is non-empty the gradient of the
  /// loss with respect to every parameter is added into it.
  double loss(const KnnGraph& g, double label, std::span<double> grad = {}) const;

  /// Attention weights of layer `layer`, head `head`, node `node`, in the
  /// order of g.neighbors(node).
  std::vector<double> attention(const KnnGraph& g, int layer, int head, int node) const;

  void save(const std::filesystem::path& path) const;
  static Predictor load(const std::filesystem::path& path);
  std::string to_json() const;
  static Predictor from_json(const std::string& text, const std::string& source = "<checkpoint>");

  /// Readout bias; trainers initialize it from data.
  double& readout_bias();

 private:
  struct Cache;
  double forward(const KnnGraph& g, Cache* cache) const;
  void backward(const KnnGraph& g, const Cache& cache, double dout, std::span<double> grad) const;
  std::size_t add_tensor(const std::string& name, int rows, int cols);

  ModelConfig cfg_;
  std::vector<TensorInfo> layout_;
  std::vector<double> params_;
};

enum class LrSchedule { Constant, Cosine };

struct TrainConfig {
  double learning_rate = 1e-4;
  /// Cosine decays the rate from learning_rate to 1% of it over the epochs.
  LrSchedule schedule = LrSchedule::Constant;
  int epochs = 50;
  /// Minibatch size; absent means the size-bucket default for the data.
  std::optional<std::size_t> batch_size;
  double validation_fraction = 0.2;
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Set the readout bias to the mean normalized label before training.
  bool init_bias_from_data = true;
  /// Stop when validation loss has not improved for this many epochs.
  std::optional<int> patience;
  /// Draw each training sample under one of the 8 rotations/reflections of
  /// the plane per epoch; routing costs are invariant under all of them.
  bool augment_symmetries = false;
  bool verbose = false;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean squared error over the training split
  double validation_loss = 0.0;
  double validation_mape = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_validation_loss = 0.0;
};

/// Image of `inst` under symmetry `s` in [0, 8) of the square (s = 0 is the identity).
CvrpInstance apply_symmetry(const CvrpInstance& inst, int s);

/// Adam on the squared error. The model is left at the parameters of the
/// epoch with the lowest validation loss.
TrainResult train(Predictor& model, std::span<const CvrpInstance> instances, std::span<const double> labels,
                  const TrainConfig& cfg);

/// Inference adapter. Batches are processed in chunks of the size-bucket
/// batch size; results do not depend on the chunking.
class NeuralEstimator final : public CostEstimator {
 public:
  explicit NeuralEstimator(Predictor model) : model_(std::move(model)) {}
  std::vector<double> estimate_batch(std::span<const CvrpInstance> instances) const override;
  std::string name() const override { return "nn"; }
  const Predictor& model() const { return model_; }

 private:
  Predictor model_;
};

}  // namespace hvrp
