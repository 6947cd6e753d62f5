#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "regclass/features.hpp"
#include "regclass/graph.hpp"
#include "regclass/matrix.hpp"
#include "regclass/util.hpp"

namespace regclass {

inline constexpr int kClassCount = 2;
inline constexpr int kClassState = 0;
inline constexpr int kClassData = 1;

enum class MessageDirection { InNeighbors, Undirected };

std::string_view to_string(MessageDirection d);
MessageDirection message_direction_from_string(std::string_view s);

// Distinct members of {v} union N(v) per node, in ascending order; the mean
// aggregation and its transpose both iterate this structure.
struct AggregationView {
    std::vector<int> offsets;  // node count + 1
    std::vector<int> members;

    int node_count() const { return static_cast<int>(offsets.size()) - 1; }
};

AggregationView make_aggregation_view(const CircuitGraph& g, MessageDirection dir);

struct SageLayer {
    Matrix w;  // in x out
    std::vector<double> b, gamma, beta;
};

struct ModelParams {
    int input_dim = 0;
    std::vector<SageLayer> sage;
    Matrix head_w1;
    std::vector<double> head_b1;
    Matrix head_w2;
    std::vector<double> head_b2;
    bool layer_norm = true;
};

struct TrainConfig {
    double learning_rate = 0.001;
    double dropout = 0.25;
    int epochs = 300;
    // (state, data); when absent, inverse-frequency weights are computed
    // over the training split's register labels.
    std::optional<std::pair<double, double>> class_weights;
    uint64_t seed = 0;
    double beta1 = 0.9, beta2 = 0.999, adam_epsilon = 1e-8;
    MessageDirection direction = MessageDirection::InNeighbors;
    bool layer_norm = true;
    std::vector<int> sage_dims = {100, 100, 100};
    int head_hidden = 50;
};

void validate_config(const TrainConfig& cfg);
ModelParams init_params(int input_dim, const TrainConfig& cfg, Rng& rng);

// Named views over every trainable tensor, in checkpoint declaration order.
struct TensorRef {
    std::string name;
    double* data;
    size_t size;
    int rows, cols;  // cols 0 for vectors
};
std::vector<TensorRef> tensor_refs(ModelParams& p);

struct SageTrace {
    Matrix aggregated, pre_act, post_act, xhat, out;
    std::vector<double> inv_sigma;
    Matrix dropout_scale;  // 0 or 1/(1-p) per unit; empty in eval mode
};

struct ForwardTrace {
    std::vector<SageTrace> sage;
    Matrix head_pre_act, head_post_act, log_probs;
};

struct ForwardOptions {
    bool training = false;
    double dropout = 0.0;
    Rng* rng = nullptr;  // required when training with dropout > 0
    // Layers below this index reuse trace->sage[i].out instead of being
    // recomputed; used by the finite-difference check.
    int start_layer = 0;
};

// Returns per-node class log-probabilities (n x kClassCount). When trace is
// given, all intermediates are stored there for backward().
Matrix forward(const Matrix& x, const AggregationView& view, const ModelParams& p,
               const ForwardOptions& opt, ForwardTrace* trace);

// Weighted negative log-likelihood over labeled register rows:
// sum of w_{y_v} * (-log p_v[y_v]). weight_sum receives sum of w_{y_v}.
// The normalized loss of one batch is weighted_nll / weight_sum.
double weighted_nll_sum(const Matrix& log_probs, const std::vector<int>& labels,
                        const std::vector<bool>& is_register, double w_state, double w_data,
                        double* weight_sum);
double loss(const Matrix& log_probs, const std::vector<int>& labels,
            const std::vector<bool>& is_register, double w_state, double w_data);

// Gradients of the normalized loss; d log_probs rows are supplied by the
// caller (dlogp[v][y_v] = -w_{y_v} / weight_total). Accumulates into grads,
// which must have the same shapes as p.
void backward(const Matrix& x, const AggregationView& view, const ModelParams& p,
              const ForwardTrace& trace, const Matrix& dlog_probs, ModelParams& grads);

ModelParams zeros_like(const ModelParams& p);

struct AdamState {
    ModelParams m, v;
    int step = 0;
};
void adam_step(ModelParams& p, const ModelParams& grads, AdamState& state,
               const TrainConfig& cfg);

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_balanced_accuracy = 0.0;
};

struct Checkpoint {
    ModelParams params;
    FeatureSchema schema;  // carries the standardization statistics
    TrainConfig config;
    int best_epoch = -1;  // 0-based index into trace
    std::vector<EpochStats> trace;
};

struct GraphSample {
    const CircuitGraph* graph = nullptr;
    const FeatureMatrix* features = nullptr;  // raw, not yet standardized
};

// Full-batch training: one Adam step per epoch over gradients summed across
// all training graphs. Fits the standardizer on the training split, keeps
// the parameters with the best validation balanced accuracy (ties keep the
// earlier epoch; without a validation set the final epoch wins). Throws a
// Numeric error naming the epoch when the loss stops being finite.
Checkpoint train(const std::vector<GraphSample>& train_set,
                 const std::vector<GraphSample>& val_set, const TrainConfig& cfg);

struct RegisterPrediction {
    std::string id;
    int node = -1;
    RegClass predicted = RegClass::Data;
    double p_state = 0.0, p_data = 0.0;
};

// Standardizes a copy of the raw features with the checkpoint statistics,
// runs an eval-mode forward and takes the argmax per register row; exact
// ties resolve to data.
std::vector<RegisterPrediction> predict(const CircuitGraph& g, const FeatureMatrix& raw,
                                        const Checkpoint& ckpt);

std::pair<double, double> class_weights_from_labels(const std::vector<GraphSample>& train_set);

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);
// The JSON header alone, pretty-printed for inspection.
std::string checkpoint_header_json(const std::string& bytes);

}  // namespace regclass
