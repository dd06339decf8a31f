#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpgnn/graph.hpp"

namespace qpgnn {

/// Message-passing network shape. Every learned map is a 2-layer MLP with
/// hidden width = embedding width and ReLU activation; the embedding maps are
/// single linear layers followed by ReLU; heads end linear.
struct GNNConfig {
  enum class Variant { LCQP, MILCQP };
  enum class Head { GRAPH, NODE };

  int layers = 2;  // L >= 1
  int width = 64;  // d >= 1
  Variant variant = Variant::LCQP;
  Head head = Head::GRAPH;
  static constexpr int mlp_depth = 2;

  /// Constraint node encoding: (b_i, one-hot sense).
  int input_width_v() const { return 4; }
  /// Variable node encoding: (c_j, l-value, l-finite, u-value, u-finite[, delta]).
  int input_width_w() const { return variant == Variant::MILCQP ? 6 : 5; }

  friend bool operator==(const GNNConfig&, const GNNConfig&) = default;
};

struct Linear {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

struct Mlp {
  Linear first;
  Linear second;
};

struct LayerParams {
  Mlp f_v, f_w, g_v, g_w, g_q;
};

struct GNNParams {
  GNNConfig config;
  Linear embed_v, embed_w;
  std::vector<LayerParams> layers;
  Mlp head;  // r1 on (sum_s, sum_t) or r2 on (sum_s, sum_t, t_j)

  long parameter_count() const;
};

/// Deterministic per seed; every weight matrix is (semi-)orthogonal with unit
/// gain, biases zero.
GNNParams init_params(const GNNConfig& config, std::uint64_t seed);

/// Numeric vectorization of node features. Infinite bounds clamp the value
/// channel to 0 and clear the companion finite-flag, keeping the encoding
/// injective on the feature domain.
Eigen::RowVectorXd encode_v_feature(const ConstraintFeature& f);
Eigen::RowVectorXd encode_w_feature(const VariableFeature& f, bool mixed_integer);

double forward_graph(const GNNParams& params, const QPGraph& graph);
std::vector<double> forward_node(const GNNParams& params, const QPGraph& graph);

/// One labeled sample; graph-head labels have one entry, node-head labels n.
struct LabeledGraph {
  QPGraph graph;
  std::vector<double> label;
};

/// Mean over the batch of ||pred - label||^2 / max(||label||, 1)^2.
double loss_msre(const std::vector<std::vector<double>>& preds,
                 const std::vector<std::vector<double>>& labels);

/// Relative error footnote metric: mean of ||pred - label|| / max(||label||, 1).
double relative_error(const std::vector<std::vector<double>>& preds,
                      const std::vector<std::vector<double>>& labels);

using GNNGradients = GNNParams;

/// Exact reverse-mode gradients of loss_msre over the batch.
/// Returns the loss at the current parameters.
double backward(const GNNParams& params, const std::vector<LabeledGraph>& batch,
                GNNGradients& gradients);

/// Per-graph forward outputs (batched over a merged block-diagonal graph).
std::vector<std::vector<double>> forward_batch(const GNNParams& params,
                                               const std::vector<LabeledGraph>& batch);

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainSchedule {
  int epochs = 2000;
  double learning_rate = 5e-4;
  int patience = 50;      // epochs without improvement before halving + restore
  int batch_size = 2500;  // effective batch = min(batch_size, dataset)
  std::uint64_t seed = 1;
  double stop_below = 0.0;  // early stop once best train error falls below
};

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_rel_err = 0.0;
  double best_rel_err = 0.0;  // running minimum
  std::optional<double> val_rel_err;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  double best_rel_err = 0.0;
  int best_epoch = 0;
};

/// Adam with the plateau rule: after `patience` epochs without train-error
/// improvement, halve the learning rate and restore the best parameters.
TrainResult train(GNNParams& params, const std::vector<LabeledGraph>& train_set,
                  const TrainSchedule& schedule,
                  const std::vector<LabeledGraph>* val_set = nullptr);

/// Checkpoints: {config, flat weight arrays, seed, epoch}.
std::string params_to_json(const GNNParams& params, std::uint64_t seed, int epoch);
GNNParams params_from_json(const std::string& text);

}  // namespace qpgnn
