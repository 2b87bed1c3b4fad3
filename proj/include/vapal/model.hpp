#ifndef VAPAL_MODEL_HPP
#define VAPAL_MODEL_HPP

// Feed-forward classifier head p(y | h, theta) over fixed feature vectors.
// Hidden layers use tanh; the output layer is affine followed by softmax.
// Gradients are analytic, both with respect to parameters (training) and
// with respect to an additive input perturbation (virtual adversarial
// directions).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vapal/core_math.hpp"

namespace vapal {

struct ModelConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims{64};
    std::size_t num_classes = 0;
    double l2_weight_decay = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DenseLayer {
    Matrix weights;  // out x in
    Vec bias;        // out

    bool operator==(const DenseLayer&) const = default;
};

/// Hidden layers in order, output layer last.
struct ModelParams {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.front().weights.cols; }
    std::size_t num_classes() const { return layers.back().weights.rows; }
    /// Width of the representation that feeds the output layer.
    std::size_t last_hidden_dim() const { return layers.back().weights.cols; }
    std::size_t parameter_count() const;

    bool operator==(const ModelParams&) const = default;
};

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.99;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LabeledExample {
    std::span<const double> features;
    std::size_t label = 0;
};

struct LossAndGrads {
    double loss = 0.0;
    ModelParams grads;  // same shapes as the parameters
};

ModelParams init_params(const ModelConfig& cfg);

/// Zero-filled parameters with the shapes cfg describes.
ModelParams zero_params(const ModelConfig& cfg);

Vec logits(const ModelParams& params, std::span<const double> h);
ProbDist predict_proba(const ModelParams& params, std::span<const double> h);

/// Activation of the last hidden layer, or h itself for a linear head.
Vec penultimate(const ModelParams& params, std::span<const double> h);

/// Mean cross-entropy over the batch plus 0.5 * weight_decay * ||W||^2
/// summed over weight matrices (biases are not decayed).
LossAndGrads loss_and_param_grads(const ModelParams& params, std::span<const LabeledExample> batch,
                                  double weight_decay = 0.0);

/// Gradient with respect to r of KL(p_ref || p(y | h + r)). p_ref is held
/// constant.
Vec kl_input_grad(const ModelParams& params, std::span<const double> h, std::span<const double> r,
                  const ProbDist& p_ref);

struct TrainTrace {
    ModelParams params;
    /// Full-data objective (cross-entropy + decay term) after each epoch.
    std::vector<double> epoch_loss;
};

/// Fresh initialization followed by mini-batch AdamW for tcfg.epochs.
/// Weight decay (cfg.l2_weight_decay) is decoupled from the Adam moments.
ModelParams train(const ModelConfig& cfg, const TrainConfig& tcfg, std::span<const LabeledExample> labeled);
TrainTrace train_traced(const ModelConfig& cfg, const TrainConfig& tcfg, std::span<const LabeledExample> labeled);

}  // namespace vapal

#endif  // VAPAL_MODEL_HPP
