#include "vapal/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace vapal {

void ModelConfig::validate() const {
    if (input_dim < 1) {
        throw std::invalid_argument("ModelConfig: input_dim must be >= 1");
    }
    if (num_classes < 2) {
        throw std::invalid_argument("ModelConfig: num_classes must be >= 2");
    }
    if (std::find(hidden_dims.begin(), hidden_dims.end(), std::size_t{0}) != hidden_dims.end()) {
        throw std::invalid_argument("ModelConfig: hidden layer of width 0");
    }
    if (!(l2_weight_decay >= 0.0) || !std::isfinite(l2_weight_decay)) {
        throw std::invalid_argument("ModelConfig: l2_weight_decay must be >= 0");
    }
}

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw std::invalid_argument("TrainConfig: betas must lie in [0,1)");
    }
    if (!(adam_epsilon > 0.0)) {
        throw std::invalid_argument("TrainConfig: adam_epsilon must be > 0");
    }
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) {
        n += layer.weights.data.size() + layer.bias.size();
    }
    return n;
}

namespace {

std::vector<std::size_t> layer_widths(const ModelConfig& cfg) {
    std::vector<std::size_t> widths{cfg.input_dim};
    widths.insert(widths.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    widths.push_back(cfg.num_classes);
    return widths;
}

// activations[0] = input, activations[l] = output of hidden layer l
struct Forward {
    std::vector<Vec> activations;
    Vec logits;
};

Forward forward(const ModelParams& params, std::span<const double> h) {
    if (h.size() != params.input_dim()) {
        throw std::invalid_argument("feature dimension " + std::to_string(h.size()) + " does not match model input " +
                                    std::to_string(params.input_dim()));
    }
    Forward fw;
    fw.activations.reserve(params.layers.size());
    fw.activations.emplace_back(h.begin(), h.end());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        Vec z = matvec(layer.weights, fw.activations.back());
        for (std::size_t i = 0; i < z.size(); ++i) {
            z[i] += layer.bias[i];
        }
        if (l + 1 == params.layers.size()) {
            fw.logits = std::move(z);
        } else {
            for (double& v : z) {
                v = std::tanh(v);
            }
            fw.activations.push_back(std::move(z));
        }
    }
    return fw;
}

// Propagates dL/dlogits back through the network. Accumulates parameter
// gradients (scaled by `scale`) when param_grads is non-null and returns
// dL/dinput.
Vec backward(const ModelParams& params, const Forward& fw, Vec upstream, ModelParams* param_grads, double scale) {
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const auto& layer = params.layers[l];
        const Vec& input = fw.activations[l];
        if (param_grads != nullptr) {
            auto& g = param_grads->layers[l];
            for (std::size_t r = 0; r < layer.weights.rows; ++r) {
                const double u = scale * upstream[r];
                auto grow = g.weights.row(r);
                for (std::size_t c = 0; c < layer.weights.cols; ++c) {
                    grow[c] += u * input[c];
                }
                g.bias[r] += u;
            }
        }
        Vec down = matvec_transposed(layer.weights, upstream);
        if (l > 0) {
            // input is tanh output of the previous layer
            for (std::size_t c = 0; c < down.size(); ++c) {
                down[c] *= 1.0 - input[c] * input[c];
            }
        }
        upstream = std::move(down);
    }
    return upstream;
}

template <typename Fn>
void for_each_block(ModelParams& p, Fn&& fn) {
    for (auto& layer : p.layers) {
        fn(std::span<double>(layer.weights.data), true);
        fn(std::span<double>(layer.bias), false);
    }
}

double weight_penalty(const ModelParams& params) {
    double s = 0.0;
    for (const auto& layer : params.layers) {
        for (double w : layer.weights.data) {
            s += w * w;
        }
    }
    return s;
}

}  // namespace

ModelParams zero_params(const ModelConfig& cfg) {
    cfg.validate();
    const auto widths = layer_widths(cfg);
    ModelParams p;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        p.layers.push_back(DenseLayer{Matrix(widths[l + 1], widths[l]), Vec(widths[l + 1], 0.0)});
    }
    return p;
}

ModelParams init_params(const ModelConfig& cfg) {
    ModelParams p = zero_params(cfg);
    Rng rng(mix_seed(cfg.seed, 0x1a1a));
    for (auto& layer : p.layers) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols));
        std::uniform_real_distribution<double> uniform(-bound, bound);
        for (double& w : layer.weights.data) {
            w = uniform(rng);
        }
    }
    return p;
}

Vec logits(const ModelParams& params, std::span<const double> h) { return forward(params, h).logits; }

ProbDist predict_proba(const ModelParams& params, std::span<const double> h) { return softmax(logits(params, h)); }

Vec penultimate(const ModelParams& params, std::span<const double> h) {
    return std::move(forward(params, h).activations.back());
}

LossAndGrads loss_and_param_grads(const ModelParams& params, std::span<const LabeledExample> batch,
                                  double weight_decay) {
    if (batch.empty()) {
        throw std::invalid_argument("loss_and_param_grads: empty batch");
    }
    const std::size_t num_classes = params.num_classes();
    LossAndGrads out;
    out.grads = params;
    for_each_block(out.grads, [](std::span<double> block, bool) { std::fill(block.begin(), block.end(), 0.0); });

    const double scale = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const auto& ex : batch) {
        if (ex.label >= num_classes) {
            throw std::invalid_argument("label " + std::to_string(ex.label) + " out of range for " +
                                        std::to_string(num_classes) + " classes");
        }
        const Forward fw = forward(params, ex.features);
        const ProbDist p = softmax(fw.logits);
        total -= std::log(std::max(p[ex.label], kProbFloor));
        Vec upstream = p.values();
        upstream[ex.label] -= 1.0;
        backward(params, fw, std::move(upstream), &out.grads, scale);
    }
    out.loss = total * scale;
    if (weight_decay > 0.0) {
        out.loss += 0.5 * weight_decay * weight_penalty(params);
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            auto& g = out.grads.layers[l].weights.data;
            const auto& w = params.layers[l].weights.data;
            for (std::size_t i = 0; i < w.size(); ++i) {
                g[i] += weight_decay * w[i];
            }
        }
    }
    return out;
}

Vec kl_input_grad(const ModelParams& params, std::span<const double> h, std::span<const double> r,
                  const ProbDist& p_ref) {
    if (r.size() != h.size()) {
        throw std::invalid_argument("kl_input_grad: perturbation dimension mismatch");
    }
    if (p_ref.size() != params.num_classes()) {
        throw std::invalid_argument("kl_input_grad: reference distribution has wrong class count");
    }
    Vec x(h.begin(), h.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += r[i];
    }
    const Forward fw = forward(params, x);
    const ProbDist q = softmax(fw.logits);
    // d/dz of -sum_c p_c log q_c with q = softmax(z) is q - p
    Vec upstream(q.size());
    for (std::size_t c = 0; c < q.size(); ++c) {
        upstream[c] = q[c] - p_ref[c];
    }
    return backward(params, fw, std::move(upstream), nullptr, 1.0);
}

namespace {

TrainTrace run_training(const ModelConfig& cfg, const TrainConfig& tcfg, std::span<const LabeledExample> labeled,
                        bool record_loss) {
    cfg.validate();
    tcfg.validate();
    if (labeled.empty()) {
        throw std::invalid_argument("train: empty labeled set");
    }
    TrainTrace trace{init_params(cfg), {}};
    ModelParams& params = trace.params;

    ModelParams m1 = zero_params(cfg);
    ModelParams m2 = zero_params(cfg);
    Rng rng(mix_seed(tcfg.seed, 0x7a7a));

    std::vector<std::size_t> order(labeled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<LabeledExample> batch;
    batch.reserve(tcfg.batch_size);

    std::uint64_t step = 0;
    for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(labeled[order[i]]);
            }
            LossAndGrads lg = loss_and_param_grads(params, batch, 0.0);
            ++step;
            const double bc1 = 1.0 - std::pow(tcfg.adam_beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(tcfg.adam_beta2, static_cast<double>(step));

            for (std::size_t l = 0; l < params.layers.size(); ++l) {
                auto update = [&](std::span<double> w, std::span<const double> g, std::span<double> mm,
                                  std::span<double> vv, bool decay) {
                    for (std::size_t i = 0; i < w.size(); ++i) {
                        mm[i] = tcfg.adam_beta1 * mm[i] + (1.0 - tcfg.adam_beta1) * g[i];
                        vv[i] = tcfg.adam_beta2 * vv[i] + (1.0 - tcfg.adam_beta2) * g[i] * g[i];
                        const double mhat = mm[i] / bc1;
                        const double vhat = vv[i] / bc2;
                        if (decay) {
                            w[i] -= tcfg.learning_rate * cfg.l2_weight_decay * w[i];
                        }
                        w[i] -= tcfg.learning_rate * mhat / (std::sqrt(vhat) + tcfg.adam_epsilon);
                    }
                };
                update(params.layers[l].weights.data, lg.grads.layers[l].weights.data, m1.layers[l].weights.data,
                       m2.layers[l].weights.data, true);
                update(params.layers[l].bias, lg.grads.layers[l].bias, m1.layers[l].bias, m2.layers[l].bias, false);
            }
        }
        if (record_loss) {
            trace.epoch_loss.push_back(loss_and_param_grads(params, labeled, cfg.l2_weight_decay).loss);
        }
    }
    return trace;
}

}  // namespace

TrainTrace train_traced(const ModelConfig& cfg, const TrainConfig& tcfg, std::span<const LabeledExample> labeled) {
    return run_training(cfg, tcfg, labeled, true);
}

ModelParams train(const ModelConfig& cfg, const TrainConfig& tcfg, std::span<const LabeledExample> labeled) {
    return run_training(cfg, tcfg, labeled, false).params;
}

}  // namespace vapal
