#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gridloc/core.hpp"

namespace gridloc {

/// Layer sizes of the classifier:
///   input [Re psi; Im psi] viewed as 2 channels x n positions
///   conv1d(2 -> channels, kernel, same padding) + tanh
///   conv1d(channels -> channels, kernel, same padding) + tanh
///   flatten (channels * n)
///   dense(channels * n -> hidden) + tanh
///   dense(hidden -> m + 1), softmax
struct Architecture {
    int bus_count = 0;
    int line_count = 0;
    int channels = 8;
    int kernel = 5;
    int hidden = 128;

    int feature_count() const { return 2 * bus_count; }
    int class_count() const { return line_count + 1; }
    bool operator==(const Architecture&) const = default;
};

void validate(const Architecture& arch);

/// All trainable weights, stored contiguously. The named accessors are
/// views into the flat vector, so optimizers and checkpoints work on
/// `values()` directly.
class ModelParams {
  public:
    struct Block {
        std::string name;
        Eigen::Index offset;
        Eigen::Index rows;
        Eigen::Index cols;
    };

    ModelParams() = default;
    explicit ModelParams(const Architecture& arch);

    /// Uniform in +-sqrt(6 / (fan_in + fan_out)) for weights, zero biases.
    static ModelParams glorot(const Architecture& arch, std::mt19937_64& rng);

    const Architecture& arch() const { return arch_; }
    RealVector& values() { return values_; }
    const RealVector& values() const { return values_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    const Block& block(std::string_view name) const;

    Eigen::Map<RealMatrix> matrix(std::string_view name);
    Eigen::Map<const RealMatrix> matrix(std::string_view name) const;

    // Weight layouts: conv weights are (out x in*kernel) with column
    // index in_channel*kernel + tap; dense weights are (out x in).
    Eigen::Map<RealMatrix> conv1_weight() { return matrix("conv1.weight"); }
    Eigen::Map<RealMatrix> conv1_bias() { return matrix("conv1.bias"); }
    Eigen::Map<RealMatrix> conv2_weight() { return matrix("conv2.weight"); }
    Eigen::Map<RealMatrix> conv2_bias() { return matrix("conv2.bias"); }
    Eigen::Map<RealMatrix> dense1_weight() { return matrix("dense1.weight"); }
    Eigen::Map<RealMatrix> dense1_bias() { return matrix("dense1.bias"); }
    Eigen::Map<RealMatrix> dense2_weight() { return matrix("dense2.weight"); }
    Eigen::Map<RealMatrix> dense2_bias() { return matrix("dense2.bias"); }
    Eigen::Map<const RealMatrix> conv1_weight() const { return matrix("conv1.weight"); }
    Eigen::Map<const RealMatrix> conv1_bias() const { return matrix("conv1.bias"); }
    Eigen::Map<const RealMatrix> conv2_weight() const { return matrix("conv2.weight"); }
    Eigen::Map<const RealMatrix> conv2_bias() const { return matrix("conv2.bias"); }
    Eigen::Map<const RealMatrix> dense1_weight() const { return matrix("dense1.weight"); }
    Eigen::Map<const RealMatrix> dense1_bias() const { return matrix("dense1.bias"); }
    Eigen::Map<const RealMatrix> dense2_weight() const { return matrix("dense2.weight"); }
    Eigen::Map<const RealMatrix> dense2_bias() const { return matrix("dense2.bias"); }

  private:
    Architecture arch_;
    std::vector<Block> blocks_;
    RealVector values_;
};

/// Numerically stable column-wise softmax.
RealMatrix softmax(const RealMatrix& logits);
RealVector softmax(const RealVector& logits);

/// Logits for a batch; `inputs` holds one 2n-feature sample per column.
RealMatrix forward_logits(const ModelParams& params, const RealMatrix& inputs);

struct Prediction {
    RealVector logits;
    RealVector probabilities;
};

Prediction forward(const ModelParams& params, const RealVector& features);

/// Class probabilities for a batch (one column per sample).
RealMatrix predict_probabilities(const ModelParams& params, const RealMatrix& inputs);

/// Cross-entropy -sum_i t_i log p_i over entries with t_i > 0; zero for an
/// all-zero target. Probabilities below 1e-30 are floored, and each floored
/// entry bumps `*clamped` when provided.
double cross_entropy(const RealVector& target, const RealVector& probabilities, int* clamped = nullptr);

/// (1 - eps) * CE(y, p) + eps * CE(y_hat, p).
double blended_loss(const RealVector& y, const RealVector& y_hat, const RealVector& probabilities, double epsilon_mix,
                    int* clamped = nullptr);

struct LossGradient {
    double loss = 0.0;  // batch mean
    ModelParams gradient;
    int clamped = 0;
};

/// Mean blended loss over a batch and its exact gradient. Columns of
/// `inputs`, `y`, `y_hat` are samples.
LossGradient loss_and_gradient(const ModelParams& params, const RealMatrix& inputs, const RealMatrix& y,
                               const RealMatrix& y_hat, double epsilon_mix);

/// Single-sample gradient.
ModelParams backward(const ModelParams& params, const RealVector& features, const RealVector& y,
                     const RealVector& y_hat, double epsilon_mix);

/// Mean blended loss over a batch without gradients.
double batch_loss(const ModelParams& params, const RealMatrix& inputs, const RealMatrix& y, const RealMatrix& y_hat,
                  double epsilon_mix, int* clamped = nullptr);

struct RmsPropState {
    double learning_rate = 1e-3;
    double decay = 0.9;
    double epsilon = 1e-8;
    RealVector mean_square;  // same length as ModelParams::values()
};

/// mean_square <- decay * mean_square + (1 - decay) g^2
/// param      <- param - lr * g / sqrt(mean_square + epsilon)
/// Throws TrainingError naming the first layer with a non-finite gradient;
/// nothing is modified in that case.
void rmsprop_step(ModelParams& params, const ModelParams& gradients, RmsPropState& state);

}  // namespace gridloc
