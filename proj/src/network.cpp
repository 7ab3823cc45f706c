#include "gridloc/network.hpp"

#include <cmath>

namespace gridloc {

void validate(const Architecture& arch) {
    if (arch.bus_count < 1 || arch.line_count < 1) throw InputError("architecture needs n >= 1 and m >= 1");
    if (arch.channels < 1 || arch.hidden < 1) throw InputError("architecture layer sizes must be positive");
    if (arch.kernel < 1 || arch.kernel % 2 == 0) throw InputError("convolution kernel must be a positive odd size");
}

ModelParams::ModelParams(const Architecture& arch) : arch_(arch) {
    validate(arch);
    const Eigen::Index c = arch.channels;
    const Eigen::Index k = arch.kernel;
    const Eigen::Index n = arch.bus_count;
    const Eigen::Index h = arch.hidden;
    const Eigen::Index out = arch.class_count();
    Eigen::Index offset = 0;
    auto add = [&](std::string name, Eigen::Index rows, Eigen::Index cols) {
        blocks_.push_back({std::move(name), offset, rows, cols});
        offset += rows * cols;
    };
    add("conv1.weight", c, 2 * k);
    add("conv1.bias", c, 1);
    add("conv2.weight", c, c * k);
    add("conv2.bias", c, 1);
    add("dense1.weight", h, c * n);
    add("dense1.bias", h, 1);
    add("dense2.weight", out, h);
    add("dense2.bias", out, 1);
    values_ = RealVector::Zero(offset);
}

ModelParams ModelParams::glorot(const Architecture& arch, std::mt19937_64& rng) {
    ModelParams p(arch);
    const double k = arch.kernel;
    auto fill = [&](std::string_view name, double fan_in, double fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        auto w = p.matrix(name);
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
        }
    };
    fill("conv1.weight", 2 * k, arch.channels * k);
    fill("conv2.weight", arch.channels * k, arch.channels * k);
    fill("dense1.weight", static_cast<double>(arch.channels) * arch.bus_count, arch.hidden);
    fill("dense2.weight", arch.hidden, arch.class_count());
    return p;
}

const ModelParams::Block& ModelParams::block(std::string_view name) const {
    for (const auto& b : blocks_) {
        if (b.name == name) return b;
    }
    throw InputError("no parameter block named " + std::string(name));
}

Eigen::Map<RealMatrix> ModelParams::matrix(std::string_view name) {
    const auto& b = block(name);
    return {values_.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<const RealMatrix> ModelParams::matrix(std::string_view name) const {
    const auto& b = block(name);
    return {values_.data() + b.offset, b.rows, b.cols};
}

RealMatrix softmax(const RealMatrix& logits) {
    RealMatrix out(logits.rows(), logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        const double peak = logits.col(j).maxCoeff();
        out.col(j) = (logits.col(j).array() - peak).exp().matrix();
        out.col(j) /= out.col(j).sum();
    }
    return out;
}

RealVector softmax(const RealVector& logits) { return softmax(RealMatrix(logits)).col(0); }

namespace {

// Activations are (channels x positions*batch); column b*L + pos.
RealMatrix im2col(const RealMatrix& in, Eigen::Index length, Eigen::Index kernel) {
    const Eigen::Index channels = in.rows();
    const Eigen::Index batch = in.cols() / length;
    const Eigen::Index pad = kernel / 2;
    RealMatrix patches = RealMatrix::Zero(channels * kernel, in.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (Eigen::Index pos = 0; pos < length; ++pos) {
            const Eigen::Index col = b * length + pos;
            for (Eigen::Index c = 0; c < channels; ++c) {
                for (Eigen::Index t = 0; t < kernel; ++t) {
                    const Eigen::Index src = pos + t - pad;
                    if (src >= 0 && src < length) patches(c * kernel + t, col) = in(c, b * length + src);
                }
            }
        }
    }
    return patches;
}

RealMatrix col2im(const RealMatrix& patches, Eigen::Index channels, Eigen::Index length, Eigen::Index kernel) {
    const Eigen::Index batch = patches.cols() / length;
    const Eigen::Index pad = kernel / 2;
    RealMatrix out = RealMatrix::Zero(channels, patches.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (Eigen::Index pos = 0; pos < length; ++pos) {
            const Eigen::Index col = b * length + pos;
            for (Eigen::Index c = 0; c < channels; ++c) {
                for (Eigen::Index t = 0; t < kernel; ++t) {
                    const Eigen::Index src = pos + t - pad;
                    if (src >= 0 && src < length) out(c, b * length + src) += patches(c * kernel + t, col);
                }
            }
        }
    }
    return out;
}

RealMatrix to_channels(const RealMatrix& inputs, Eigen::Index length) {
    const Eigen::Index batch = inputs.cols();
    RealMatrix out(2, length * batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        out.row(0).segment(b * length, length) = inputs.col(b).head(length).transpose();
        out.row(1).segment(b * length, length) = inputs.col(b).tail(length).transpose();
    }
    return out;
}

RealMatrix flatten(const RealMatrix& act, Eigen::Index length) {
    const Eigen::Index channels = act.rows();
    const Eigen::Index batch = act.cols() / length;
    RealMatrix out(channels * length, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (Eigen::Index c = 0; c < channels; ++c) {
            out.col(b).segment(c * length, length) = act.row(c).segment(b * length, length).transpose();
        }
    }
    return out;
}

RealMatrix unflatten(const RealMatrix& flat, Eigen::Index channels, Eigen::Index length) {
    const Eigen::Index batch = flat.cols();
    RealMatrix out(channels, length * batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (Eigen::Index c = 0; c < channels; ++c) {
            out.row(c).segment(b * length, length) = flat.col(b).segment(c * length, length).transpose();
        }
    }
    return out;
}

struct Activations {
    RealMatrix patches1, h1, patches2, h2, flat, h3, logits;
};

Activations run_forward(const ModelParams& params, const RealMatrix& inputs) {
    const auto& arch = params.arch();
    if (inputs.rows() != arch.feature_count()) {
        throw InputError("feature length " + std::to_string(inputs.rows()) + " does not match the model's " +
                         std::to_string(arch.feature_count()));
    }
    const Eigen::Index n = arch.bus_count;
    Activations a;
    a.patches1 = im2col(to_channels(inputs, n), n, arch.kernel);
    a.h1 = ((params.conv1_weight() * a.patches1).colwise() + params.conv1_bias().col(0)).array().tanh().matrix();
    a.patches2 = im2col(a.h1, n, arch.kernel);
    a.h2 = ((params.conv2_weight() * a.patches2).colwise() + params.conv2_bias().col(0)).array().tanh().matrix();
    a.flat = flatten(a.h2, n);
    a.h3 = ((params.dense1_weight() * a.flat).colwise() + params.dense1_bias().col(0)).array().tanh().matrix();
    a.logits = (params.dense2_weight() * a.h3).colwise() + params.dense2_bias().col(0);
    return a;
}

void check_targets(const ModelParams& params, const RealMatrix& inputs, const RealMatrix& y, const RealMatrix& y_hat) {
    const auto classes = params.arch().class_count();
    if (y.rows() != classes || y_hat.rows() != classes || y.cols() != inputs.cols() || y_hat.cols() != inputs.cols()) {
        throw InputError("target shape does not match the model");
    }
}

}  // namespace

RealMatrix forward_logits(const ModelParams& params, const RealMatrix& inputs) {
    return run_forward(params, inputs).logits;
}

Prediction forward(const ModelParams& params, const RealVector& features) {
    RealVector logits = forward_logits(params, RealMatrix(features)).col(0);
    RealVector probs = softmax(logits);
    return {std::move(logits), std::move(probs)};
}

RealMatrix predict_probabilities(const ModelParams& params, const RealMatrix& inputs) {
    return softmax(forward_logits(params, inputs));
}

double cross_entropy(const RealVector& target, const RealVector& probabilities, int* clamped) {
    constexpr double kFloor = 1e-30;
    double ce = 0.0;
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        if (target(i) == 0.0) continue;
        double p = probabilities(i);
        if (p < kFloor) {
            p = kFloor;
            if (clamped) ++*clamped;
        }
        ce -= target(i) * std::log(p);
    }
    return ce;
}

double blended_loss(const RealVector& y, const RealVector& y_hat, const RealVector& probabilities, double epsilon_mix,
                    int* clamped) {
    if (epsilon_mix < 0.0 || epsilon_mix > 1.0) throw InputError("epsilon_mix must lie in [0, 1]");
    return (1.0 - epsilon_mix) * cross_entropy(y, probabilities, clamped) +
           epsilon_mix * cross_entropy(y_hat, probabilities, clamped);
}

double batch_loss(const ModelParams& params, const RealMatrix& inputs, const RealMatrix& y, const RealMatrix& y_hat,
                  double epsilon_mix, int* clamped) {
    check_targets(params, inputs, y, y_hat);
    const RealMatrix probs = predict_probabilities(params, inputs);
    double total = 0.0;
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
        total += blended_loss(y.col(j), y_hat.col(j), probs.col(j), epsilon_mix, clamped);
    }
    return inputs.cols() > 0 ? total / static_cast<double>(inputs.cols()) : 0.0;
}

LossGradient loss_and_gradient(const ModelParams& params, const RealMatrix& inputs, const RealMatrix& y,
                               const RealMatrix& y_hat, double epsilon_mix) {
    check_targets(params, inputs, y, y_hat);
    if (epsilon_mix < 0.0 || epsilon_mix > 1.0) throw InputError("epsilon_mix must lie in [0, 1]");
    const auto& arch = params.arch();
    const Eigen::Index n = arch.bus_count;
    const auto batch = static_cast<double>(inputs.cols());

    const Activations a = run_forward(params, inputs);
    const RealMatrix probs = softmax(a.logits);

    LossGradient out{0.0, ModelParams(arch), 0};
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
        out.loss += blended_loss(y.col(j), y_hat.col(j), probs.col(j), epsilon_mix, &out.clamped);
    }
    out.loss /= batch;

    // d/dz of -sum_i t_i log softmax(z)_i is p * sum(t) - t.
    const RealMatrix target = (1.0 - epsilon_mix) * y + epsilon_mix * y_hat;
    const RealMatrix d_logits = (probs * target.colwise().sum().asDiagonal() - target) / batch;

    auto& g = out.gradient;
    g.dense2_weight() = d_logits * a.h3.transpose();
    g.dense2_bias() = d_logits.rowwise().sum();
    const RealMatrix d_h3 = (params.dense2_weight().transpose() * d_logits).array() * (1.0 - a.h3.array().square());

    g.dense1_weight() = d_h3 * a.flat.transpose();
    g.dense1_bias() = d_h3.rowwise().sum();
    const RealMatrix d_flat = params.dense1_weight().transpose() * d_h3;
    const RealMatrix d_h2 = unflatten(d_flat, arch.channels, n).array() * (1.0 - a.h2.array().square());

    g.conv2_weight() = d_h2 * a.patches2.transpose();
    g.conv2_bias() = d_h2.rowwise().sum();
    const RealMatrix d_patches2 = params.conv2_weight().transpose() * d_h2;
    const RealMatrix d_h1 =
        col2im(d_patches2, arch.channels, n, arch.kernel).array() * (1.0 - a.h1.array().square());

    g.conv1_weight() = d_h1 * a.patches1.transpose();
    g.conv1_bias() = d_h1.rowwise().sum();
    return out;
}

ModelParams backward(const ModelParams& params, const RealVector& features, const RealVector& y,
                     const RealVector& y_hat, double epsilon_mix) {
    return loss_and_gradient(params, RealMatrix(features), RealMatrix(y), RealMatrix(y_hat), epsilon_mix).gradient;
}

void rmsprop_step(ModelParams& params, const ModelParams& gradients, RmsPropState& state) {
    const auto& g = gradients.values();
    if (g.size() != params.values().size()) {
        throw InputError("gradient shape does not match parameters");
    }
    for (const auto& b : gradients.blocks()) {
        if (!g.segment(b.offset, b.rows * b.cols).allFinite()) {
            throw TrainingError("non-finite gradient in layer " + b.name);
        }
    }
    if (state.mean_square.size() != g.size()) {
        state.mean_square = RealVector::Zero(g.size());
    }
    state.mean_square = state.decay * state.mean_square + (1.0 - state.decay) * g.cwiseAbs2();
    params.values().array() -=
        state.learning_rate * g.array() / (state.mean_square.array() + state.epsilon).sqrt();
}

}  // namespace gridloc
