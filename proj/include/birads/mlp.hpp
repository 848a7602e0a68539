// From-scratch feedforward classifier with Monte-Carlo dropout: forward,
// backward, Adam training and T-pass predictive-distribution estimation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "birads/core.hpp"
#include "birads/uncertainty.hpp"

namespace birads {

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace rng {

// splitmix64. Used to derive independent seed streams, e.g. (seed, pass)
// for MC passes so results are independent of evaluation order.
inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(seed ^ mix(stream));
}

// Uniform in [0,1). Hand-rolled so results do not depend on the standard
// library's distribution implementation.
inline double uniform(std::mt19937_64& g) {
    return (g() >> 11) * 0x1.0p-53;
}

inline std::size_t below(std::mt19937_64& g, std::size_t n) {
    return static_cast<std::size_t>(uniform(g) * static_cast<double>(n));
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[below(g, i)]);
}

}  // namespace rng

struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> biases;   // out

    double& w(std::size_t r, std::size_t c) { return weights[r * in + c]; }
    double w(std::size_t r, std::size_t c) const { return weights[r * in + c]; }
};

struct NetworkParams {
    std::vector<Layer> layers;  // hidden layers ReLU, final layer linear logits

    std::size_t input_dim() const { return layers.front().in; }
    std::size_t output_dim() const { return layers.back().out; }
};

struct DropoutConfig {
    double rate = 0.5;  // in [0,1); applied after each hidden layer

    void validate() const {
        if (rate < 0.0 || rate >= 1.0)
            throw ArgumentError("dropout rate must be in [0,1)");
    }
};

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t epochs = 100;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (learning_rate <= 0.0) throw ArgumentError("learning_rate must be > 0");
        if (batch_size == 0) throw ArgumentError("batch_size must be positive");
        if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0 ||
            adam_beta2 <= 0.0 || adam_beta2 >= 1.0)
            throw ArgumentError("Adam betas must be in (0,1)");
        if (adam_epsilon <= 0.0) throw ArgumentError("adam_epsilon must be > 0");
    }
};

struct AdamState {
    std::vector<Layer> m;  // first moments, shaped like the network
    std::vector<Layer> v;  // second moments
    std::uint64_t t = 0;
};

// One 0/1 keep-mask per hidden layer. Forward applies inverted scaling
// (kept units multiplied by 1/(1-rate)) so the no-dropout expectation is
// preserved.
struct DropoutMasks {
    double rate = 0.0;
    std::vector<std::vector<double>> keep;  // per hidden layer, 0 or 1
};

struct PredictiveSamples {
    std::vector<PredictiveDistribution> per_pass;
    std::uint64_t seed = 0;

    std::size_t passes() const { return per_pass.size(); }
};

inline PredictiveDistribution softmax(double logit_benign, double logit_malignant) {
    if (!(std::isfinite(logit_benign) && std::isfinite(logit_malignant)))
        throw ArgumentError("non-finite logit");
    const double m = std::max(logit_benign, logit_malignant);
    const double eb = std::exp(logit_benign - m);
    const double em = std::exp(logit_malignant - m);
    const double z = eb + em;
    return PredictiveDistribution{eb / z, em / z};
}

namespace detail {

struct ForwardCache {
    // pre[i]: pre-activation of layer i; act[i]: post-ReLU (and post-dropout)
    // input to layer i+1. act[0] is the network input.
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> act;
};

inline void check_masks(const NetworkParams& params, const DropoutMasks& masks) {
    const std::size_t hidden = params.layers.size() - 1;
    if (masks.keep.size() != hidden)
        throw DimensionError("mask count " + std::to_string(masks.keep.size()) +
                             " does not match " + std::to_string(hidden) +
                             " hidden layers");
    for (std::size_t i = 0; i < hidden; ++i)
        if (masks.keep[i].size() != params.layers[i].out)
            throw DimensionError("mask width mismatch at hidden layer " +
                                 std::to_string(i));
}

inline ForwardCache forward_cache(const NetworkParams& params,
                                  const std::vector<double>& x,
                                  const DropoutMasks* masks) {
    if (params.layers.empty()) throw DimensionError("empty network");
    if (x.size() != params.input_dim())
        throw DimensionError("input length " + std::to_string(x.size()) +
                             " does not match layer 0 input width " +
                             std::to_string(params.input_dim()));
    if (masks) check_masks(params, *masks);

    ForwardCache cache;
    cache.act.push_back(x);
    const double keep_scale = masks && masks->rate > 0.0 ? 1.0 / (1.0 - masks->rate) : 1.0;
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        const Layer& layer = params.layers[li];
        const std::vector<double>& in = cache.act.back();
        if (in.size() != layer.in)
            throw DimensionError("activation width mismatch at layer " + std::to_string(li));
        std::vector<double> z(layer.out);
        for (std::size_t r = 0; r < layer.out; ++r) {
            double s = layer.biases[r];
            const double* wrow = layer.weights.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) s += wrow[c] * in[c];
            z[r] = s;
        }
        cache.pre.push_back(z);
        if (li + 1 == params.layers.size()) break;  // final layer emits logits
        std::vector<double> a(layer.out);
        for (std::size_t r = 0; r < layer.out; ++r) {
            double h = std::max(0.0, z[r]);
            if (masks) h *= masks->keep[li][r] * keep_scale;
            a[r] = h;
        }
        cache.act.push_back(std::move(a));
    }
    return cache;
}

}  // namespace detail

// Logits of the 2-class head. Deterministic given (params, x, masks).
inline std::pair<double, double> forward(const NetworkParams& params,
                                         const std::vector<double>& x,
                                         const DropoutMasks* masks = nullptr) {
    auto cache = detail::forward_cache(params, x, masks);
    const auto& logits = cache.pre.back();
    if (logits.size() != 2) throw DimensionError("output layer must have 2 units");
    return {logits[0], logits[1]};
}

inline double loss_cross_entropy(const PredictiveDistribution& dist, Pathology label) {
    dist.validate();
    const double p = label == Pathology::Benign ? dist.p_benign : dist.p_malignant;
    return -std::log(std::max(p, 1e-12));
}

// Exact gradient of loss_cross_entropy(softmax(forward(...))) with respect to
// every weight and bias, holding masks fixed.
inline std::vector<Layer> backward(const NetworkParams& params,
                                   const std::vector<double>& x,
                                   const DropoutMasks* masks, Pathology label) {
    auto cache = detail::forward_cache(params, x, masks);
    const auto& logits = cache.pre.back();
    if (logits.size() != 2) throw DimensionError("output layer must have 2 units");

    std::vector<Layer> grads;
    grads.reserve(params.layers.size());
    for (const Layer& l : params.layers) {
        Layer g;
        g.in = l.in;
        g.out = l.out;
        g.weights.assign(l.weights.size(), 0.0);
        g.biases.assign(l.biases.size(), 0.0);
        grads.push_back(std::move(g));
    }

    // dL/dlogits = softmax - onehot
    PredictiveDistribution sm = softmax(logits[0], logits[1]);
    std::vector<double> delta{sm.p_benign, sm.p_malignant};
    delta[label == Pathology::Benign ? 0 : 1] -= 1.0;

    const double keep_scale = masks && masks->rate > 0.0 ? 1.0 / (1.0 - masks->rate) : 1.0;
    for (std::size_t li = params.layers.size(); li-- > 0;) {
        const Layer& layer = params.layers[li];
        Layer& g = grads[li];
        const std::vector<double>& in = cache.act[li];
        for (std::size_t r = 0; r < layer.out; ++r) {
            g.biases[r] = delta[r];
            for (std::size_t c = 0; c < layer.in; ++c)
                g.w(r, c) = delta[r] * in[c];
        }
        if (li == 0) break;
        std::vector<double> prev(layer.in, 0.0);
        for (std::size_t c = 0; c < layer.in; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < layer.out; ++r) s += layer.w(r, c) * delta[r];
            // back through dropout and ReLU of the layer below
            if (masks) s *= masks->keep[li - 1][c] * keep_scale;
            if (cache.pre[li - 1][c] <= 0.0) s = 0.0;
            prev[c] = s;
        }
        delta = std::move(prev);
    }
    return grads;
}

inline AdamState make_adam_state(const NetworkParams& params) {
    AdamState state;
    for (const Layer& l : params.layers) {
        Layer zero;
        zero.in = l.in;
        zero.out = l.out;
        zero.weights.assign(l.weights.size(), 0.0);
        zero.biases.assign(l.biases.size(), 0.0);
        state.m.push_back(zero);
        state.v.push_back(zero);
    }
    return state;
}

// Standard Adam update with bias correction, applied in place.
inline void adam_step(AdamState& state, NetworkParams& params,
                      const std::vector<Layer>& grads, const TrainConfig& cfg) {
    cfg.validate();
    if (grads.size() != params.layers.size())
        throw DimensionError("gradient layer count mismatch");
    state.t += 1;
    const double b1t = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
    const double b2t = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
    auto update = [&](double& p, double& m, double& v, double g) {
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
        v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g * g;
        const double mhat = m / b1t;
        const double vhat = v / b2t;
        p -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
    };
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        Layer& l = params.layers[li];
        const Layer& g = grads[li];
        if (g.in != l.in || g.out != l.out)
            throw DimensionError("gradient shape mismatch at layer " + std::to_string(li));
        for (std::size_t i = 0; i < l.weights.size(); ++i)
            update(l.weights[i], state.m[li].weights[i], state.v[li].weights[i],
                   g.weights[i]);
        for (std::size_t i = 0; i < l.biases.size(); ++i)
            update(l.biases[i], state.m[li].biases[i], state.v[li].biases[i],
                   g.biases[i]);
    }
}

struct BayesianClassifier {
    NetworkParams params;
    DropoutConfig dropout;
    FeatureLayout layout;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
};

struct TrainingExample {
    FeatureVector x;
    Pathology label = Pathology::Benign;
};

// Kaiming-style uniform init scaled by fan-in; biases zero.
inline NetworkParams init_network(std::size_t input_dim,
                                  const std::vector<std::size_t>& hidden,
                                  std::mt19937_64& g) {
    NetworkParams params;
    std::vector<std::size_t> dims;
    dims.push_back(input_dim);
    for (std::size_t h : hidden) dims.push_back(h);
    dims.push_back(2);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        l.in = dims[i];
        l.out = dims[i + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(l.in));
        l.weights.resize(l.in * l.out);
        for (double& w : l.weights) w = (2.0 * rng::uniform(g) - 1.0) * bound;
        l.biases.assign(l.out, 0.0);
        params.layers.push_back(std::move(l));
    }
    return params;
}

inline DropoutMasks draw_masks(const NetworkParams& params, double rate,
                               std::mt19937_64& g) {
    DropoutMasks masks;
    masks.rate = rate;
    for (std::size_t li = 0; li + 1 < params.layers.size(); ++li) {
        std::vector<double> keep(params.layers[li].out);
        for (double& k : keep) k = rng::uniform(g) < rate ? 0.0 : 1.0;
        masks.keep.push_back(std::move(keep));
    }
    return masks;
}

// Minibatch Adam training. Shuffling, initialization and dropout masks are
// all drawn from seed-derived streams, so the result is a pure function of
// (inputs, config).
inline BayesianClassifier train(const std::vector<TrainingExample>& examples,
                                const std::vector<std::size_t>& hidden,
                                const DropoutConfig& dropout,
                                const TrainConfig& cfg,
                                const FeatureLayout& layout) {
    cfg.validate();
    dropout.validate();
    if (examples.empty()) throw TrainingError("empty training set");
    bool has_benign = false, has_malignant = false;
    for (const auto& e : examples) {
        (e.label == Pathology::Benign ? has_benign : has_malignant) = true;
        if (e.x.values.size() != layout.size())
            throw DimensionError("training vector length does not match layout");
    }
    if (!has_benign || !has_malignant) throw TrainingError("degenerate labels");

    std::mt19937_64 init_rng(rng::derive(cfg.seed, 0xC0DE'0001));
    std::mt19937_64 shuffle_rng(rng::derive(cfg.seed, 0xC0DE'0002));
    std::mt19937_64 mask_rng(rng::derive(cfg.seed, 0xC0DE'0003));

    BayesianClassifier model;
    model.params = init_network(layout.size(), hidden, init_rng);
    model.dropout = dropout;
    model.layout = layout;
    model.seed = cfg.seed;

    AdamState state = make_adam_state(model.params);
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    double epoch_loss = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng::shuffle(order, shuffle_rng);
        epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<Layer> batch_grads;
            for (std::size_t bi = start; bi < stop; ++bi) {
                const TrainingExample& ex = examples[order[bi]];
                DropoutMasks masks = draw_masks(model.params, dropout.rate, mask_rng);
                const DropoutMasks* mp = dropout.rate > 0.0 ? &masks : nullptr;
                auto grads = backward(model.params, ex.x.values, mp, ex.label);
                auto [lb, lm] = forward(model.params, ex.x.values, mp);
                epoch_loss += loss_cross_entropy(softmax(lb, lm), ex.label);
                if (batch_grads.empty()) {
                    batch_grads = std::move(grads);
                } else {
                    for (std::size_t li = 0; li < grads.size(); ++li) {
                        for (std::size_t i = 0; i < grads[li].weights.size(); ++i)
                            batch_grads[li].weights[i] += grads[li].weights[i];
                        for (std::size_t i = 0; i < grads[li].biases.size(); ++i)
                            batch_grads[li].biases[i] += grads[li].biases[i];
                    }
                }
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (Layer& g : batch_grads) {
                for (double& w : g.weights) w *= inv;
                for (double& b : g.biases) b *= inv;
            }
            adam_step(state, model.params, batch_grads, cfg);
        }
    }
    model.final_loss = examples.empty() ? 0.0
                                        : epoch_loss / static_cast<double>(examples.size());
    return model;
}

// T stochastic forward passes with test-time dropout; the reported
// distribution is the componentwise mean of the T softmax outputs with no
// re-normalization. Pass t draws its masks from a stream derived from
// (seed, t), so the result is independent of evaluation order.
inline std::pair<PredictiveSamples, PredictiveDistribution> mc_predict(
    const BayesianClassifier& model, const FeatureVector& x, std::size_t passes,
    std::uint64_t seed) {
    if (passes == 0) throw ArgumentError("mc_predict requires T >= 1");
    PredictiveSamples samples;
    samples.seed = seed;
    samples.per_pass.reserve(passes);
    double sum_b = 0.0, sum_m = 0.0;
    for (std::size_t t = 0; t < passes; ++t) {
        std::mt19937_64 g(rng::derive(seed, t));
        DropoutMasks masks = draw_masks(model.params, model.dropout.rate, g);
        const DropoutMasks* mp = model.dropout.rate > 0.0 ? &masks : nullptr;
        auto [lb, lm] = forward(model.params, x.values, mp);
        PredictiveDistribution d = softmax(lb, lm);
        sum_b += d.p_benign;
        sum_m += d.p_malignant;
        samples.per_pass.push_back(d);
    }
    const double inv = 1.0 / static_cast<double>(passes);
    return {std::move(samples), PredictiveDistribution{sum_b * inv, sum_m * inv}};
}

// Mean of already-collected per-pass samples; shares Eq.-style semantics
// with mc_predict so externally supplied samples go through the same math.
inline PredictiveDistribution mc_average(const PredictiveSamples& samples) {
    if (samples.per_pass.empty()) throw ArgumentError("no samples to average");
    double sum_b = 0.0, sum_m = 0.0;
    for (const auto& d : samples.per_pass) {
        sum_b += d.p_benign;
        sum_m += d.p_malignant;
    }
    const double inv = 1.0 / static_cast<double>(samples.per_pass.size());
    return PredictiveDistribution{sum_b * inv, sum_m * inv};
}

}  // namespace birads
