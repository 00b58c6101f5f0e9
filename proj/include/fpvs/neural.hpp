/*
 * Copyright (C) 2026 The fpvs Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpvs/froxel_grid.hpp"
#include "fpvs/interleave.hpp"

namespace fpvs {

// ---------------------------------------------------------------------------
// Model configuration
// ---------------------------------------------------------------------------

enum class Activation : std::uint8_t { none, relu, sigmoid };

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::none: return "none";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
    }
    return "none";
}

inline Activation parse_activation(const std::string& s) {
    if (s == "none") return Activation::none;
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    throw std::invalid_argument("unknown activation: " + s);
}

struct LayerSpec {
    int kernel = 3;
    int in_channels = 1;
    int out_channels = 1;
    Activation activation = Activation::relu;
    bool operator==(const LayerSpec&) const = default;
};

struct ModelConfig {
    int d = 4;
    std::vector<LayerSpec> layers;
    // Multiply the output probabilities by the input occupancy, so froxels
    // without geometry are never predicted visible.
    bool mask_with_input = true;

    bool operator==(const ModelConfig&) const = default;

    int channels() const { return d * d * d; }

    // d^3 -> hidden -> hidden -> d^3 with 3^3 kernels, relu/relu/sigmoid.
    static ModelConfig desk_default(int d, int hidden = 32) {
        ModelConfig c;
        c.d = d;
        const int ch = d * d * d;
        c.layers = {{3, ch, hidden, Activation::relu},
                    {3, hidden, hidden, Activation::relu},
                    {3, hidden, ch, Activation::sigmoid}};
        return c;
    }

    void validate() const {
        if (d < 1) throw std::invalid_argument("ModelConfig: d must be positive");
        if (layers.empty()) throw std::invalid_argument("ModelConfig: at least one layer required");
        int ch = channels();
        for (const auto& l : layers) {
            if (l.kernel < 1 || l.kernel % 2 == 0) throw std::invalid_argument("ModelConfig: kernel must be odd");
            if (l.in_channels != ch) throw std::invalid_argument("ModelConfig: inconsistent channel chain");
            if (l.out_channels < 1) throw std::invalid_argument("ModelConfig: output channels must be positive");
            ch = l.out_channels;
        }
        if (ch != channels()) throw std::invalid_argument("ModelConfig: final layer must produce d^3 channels");
        if (layers.back().activation != Activation::sigmoid)
            throw std::invalid_argument("ModelConfig: final layer must use a sigmoid");
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "d=" << d << "\n";
        os << "mask_with_input=" << (mask_with_input ? 1 : 0) << "\n";
        for (const auto& l : layers)
            os << "layer=" << l.kernel << "," << l.in_channels << "," << l.out_channels << ","
               << to_string(l.activation) << "\n";
        return os.str();
    }

    static ModelConfig from_text(const std::string& text) {
        ModelConfig c;
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("ModelConfig: malformed line: " + line);
            const std::string key = line.substr(0, eq);
            const std::string val = line.substr(eq + 1);
            if (key == "d") {
                c.d = std::stoi(val);
            } else if (key == "mask_with_input") {
                c.mask_with_input = std::stoi(val) != 0;
            } else if (key == "layer") {
                LayerSpec l;
                std::istringstream ls(val);
                std::string tok;
                std::vector<std::string> parts;
                while (std::getline(ls, tok, ',')) parts.push_back(tok);
                if (parts.size() != 4) throw std::invalid_argument("ModelConfig: malformed layer: " + val);
                l.kernel = std::stoi(parts[0]);
                l.in_channels = std::stoi(parts[1]);
                l.out_channels = std::stoi(parts[2]);
                l.activation = parse_activation(parts[3]);
                c.layers.push_back(l);
            } else {
                throw std::invalid_argument("ModelConfig: unknown key: " + key);
            }
        }
        c.validate();
        return c;
    }
};

// ---------------------------------------------------------------------------
// 3D convolution
// ---------------------------------------------------------------------------

// Zero-padded "same" 3D cross-correlation. Weights are laid out
// [kz][ky][kx][in][out].
template <typename T>
struct Conv3d {
    LayerSpec spec;
    std::vector<T> weights;
    std::vector<T> bias;

    Conv3d() = default;
    explicit Conv3d(const LayerSpec& s)
        : spec(s), weights(std::size_t(s.kernel) * s.kernel * s.kernel * s.in_channels * s.out_channels, T(0)),
          bias(std::size_t(s.out_channels), T(0)) {}

    std::size_t parameter_count() const { return weights.size() + bias.size(); }
    T& w(int kz, int ky, int kx, int ci, int co) {
        const int k = spec.kernel;
        return weights[(((std::size_t(kz) * k + ky) * k + kx) * spec.in_channels + ci) * spec.out_channels + co];
    }
};

template <typename T>
struct ConvGrad {
    std::vector<T> weights;
    std::vector<T> bias;
};

namespace detail {

template <typename T>
T sigmoid(T x) {
    return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

template <typename T>
void apply_activation(std::vector<T>& v, Activation a) {
    switch (a) {
        case Activation::none: break;
        case Activation::relu:
            for (auto& x : v) x = x > T(0) ? x : T(0);
            break;
        case Activation::sigmoid:
            for (auto& x : v) x = sigmoid(x);
            break;
    }
}

}  // namespace detail

// Writes the pre-activation values of sigmoid layers into pre when it is
// non-null.
template <typename T>
ChannelTensor<T> conv3d_forward(const ChannelTensor<T>& in, const Conv3d<T>& layer, std::vector<T>* pre = nullptr) {
    const LayerSpec& s = layer.spec;
    if (in.channels != s.in_channels) throw std::invalid_argument("conv3d_forward: input channel mismatch");
    if (layer.weights.size() != std::size_t(s.kernel) * s.kernel * s.kernel * s.in_channels * s.out_channels ||
        layer.bias.size() != std::size_t(s.out_channels))
        throw std::invalid_argument("conv3d_forward: parameter shape mismatch");
    const int k = s.kernel, r = k / 2, ci_n = s.in_channels, co_n = s.out_channels;
    ChannelTensor<T> out(in.nx, in.ny, in.nz, co_n);
    for (int z = 0; z < in.nz; ++z)
        for (int y = 0; y < in.ny; ++y)
            for (int x = 0; x < in.nx; ++x) {
                T* o = &out.values[out.offset(x, y, z)];
                std::copy(layer.bias.begin(), layer.bias.end(), o);
                for (int kz = 0; kz < k; ++kz) {
                    const int sz = z + kz - r;
                    if (sz < 0 || sz >= in.nz) continue;
                    for (int ky = 0; ky < k; ++ky) {
                        const int sy = y + ky - r;
                        if (sy < 0 || sy >= in.ny) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            const int sx = x + kx - r;
                            if (sx < 0 || sx >= in.nx) continue;
                            const T* src = &in.values[in.offset(sx, sy, sz)];
                            const T* wk = &layer.weights[((std::size_t(kz) * k + ky) * k + kx) * ci_n * co_n];
                            for (int ci = 0; ci < ci_n; ++ci) {
                                const T a = src[ci];
                                if (a == T(0)) continue;
                                const T* wr = wk + std::size_t(ci) * co_n;
                                for (int co = 0; co < co_n; ++co) o[co] += a * wr[co];
                            }
                        }
                    }
                }
            }
    if (pre && s.activation == Activation::sigmoid) *pre = out.values;
    detail::apply_activation(out.values, s.activation);
    return out;
}

// Forward activations a layer needs for its backward pass.
template <typename T>
struct LayerCache {
    ChannelTensor<T> input;
    ChannelTensor<T> output;  // after the nonlinearity
    bool valid = false;
    // Pre-activation of sigmoid layers. A saturated output rounds to exactly
    // 1, where p(1 - p) would give a zero derivative; exp(-|x|) / (1 +
    // exp(-|x|))^2 stays positive.
    std::vector<T> pre;
};

// Given dL/d(output), returns parameter gradients and writes dL/d(input)
// into grad_input when it is non-null.
template <typename T>
ConvGrad<T> conv3d_backward(const LayerCache<T>& cache, const Conv3d<T>& layer, const ChannelTensor<T>& grad_output,
                            ChannelTensor<T>* grad_input) {
    if (!cache.valid) throw std::logic_error("conv3d_backward: missing forward cache");
    const LayerSpec& s = layer.spec;
    const ChannelTensor<T>& in = cache.input;
    const ChannelTensor<T>& out = cache.output;
    if (!grad_output.same_shape(out)) throw std::invalid_argument("conv3d_backward: gradient shape mismatch");
    const int k = s.kernel, r = k / 2, ci_n = s.in_channels, co_n = s.out_channels;

    // dL/d(pre-activation)
    std::vector<T> gpre(grad_output.values);
    switch (s.activation) {
        case Activation::none: break;
        case Activation::relu:
            for (std::size_t i = 0; i < gpre.size(); ++i)
                if (!(out.values[i] > T(0))) gpre[i] = T(0);
            break;
        case Activation::sigmoid:
            if (cache.pre.size() == gpre.size()) {
                for (std::size_t i = 0; i < gpre.size(); ++i) {
                    const T e = std::exp(-std::abs(cache.pre[i]));
                    gpre[i] *= e / ((T(1) + e) * (T(1) + e));
                }
            } else {
                for (std::size_t i = 0; i < gpre.size(); ++i) gpre[i] *= out.values[i] * (T(1) - out.values[i]);
            }
            break;
    }

    ConvGrad<T> g{std::vector<T>(layer.weights.size(), T(0)), std::vector<T>(layer.bias.size(), T(0))};
    std::vector<T> wt;  // [k][out][in] for the input-gradient pass
    if (grad_input) {
        *grad_input = ChannelTensor<T>(in.nx, in.ny, in.nz, ci_n);
        wt.resize(layer.weights.size());
        const std::size_t kk = std::size_t(k) * k * k;
        for (std::size_t o = 0; o < kk; ++o)
            for (int ci = 0; ci < ci_n; ++ci)
                for (int co = 0; co < co_n; ++co)
                    wt[(o * co_n + co) * ci_n + ci] = layer.weights[(o * ci_n + ci) * co_n + co];
    }

    for (int z = 0; z < in.nz; ++z)
        for (int y = 0; y < in.ny; ++y)
            for (int x = 0; x < in.nx; ++x) {
                const T* go = &gpre[out.offset(x, y, z)];
                bool any = false;
                for (int co = 0; co < co_n; ++co) {
                    g.bias[co] += go[co];
                    any = any || go[co] != T(0);
                }
                if (!any) continue;
                for (int kz = 0; kz < k; ++kz) {
                    const int sz = z + kz - r;
                    if (sz < 0 || sz >= in.nz) continue;
                    for (int ky = 0; ky < k; ++ky) {
                        const int sy = y + ky - r;
                        if (sy < 0 || sy >= in.ny) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            const int sx = x + kx - r;
                            if (sx < 0 || sx >= in.nx) continue;
                            const std::size_t o = (std::size_t(kz) * k + ky) * k + kx;
                            const T* src = &in.values[in.offset(sx, sy, sz)];
                            T* gw = &g.weights[o * ci_n * co_n];
                            for (int ci = 0; ci < ci_n; ++ci) {
                                const T a = src[ci];
                                if (a == T(0)) continue;
                                T* gr = gw + std::size_t(ci) * co_n;
                                for (int co = 0; co < co_n; ++co) gr[co] += a * go[co];
                            }
                            if (grad_input) {
                                T* gi = &grad_input->values[grad_input->offset(sx, sy, sz)];
                                const T* wk = &wt[o * co_n * ci_n];
                                for (int co = 0; co < co_n; ++co) {
                                    const T b = go[co];
                                    if (b == T(0)) continue;
                                    const T* wr = wk + std::size_t(co) * ci_n;
                                    for (int ci = 0; ci < ci_n; ++ci) gi[ci] += b * wr[ci];
                                }
                            }
                        }
                    }
                }
            }
    return g;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

enum class InitMode : std::uint8_t { he, zero };

template <typename T>
class Model {
public:
    Model() = default;
    explicit Model(ModelConfig cfg, InitMode init = InitMode::he, std::uint64_t seed = 1) : config_(std::move(cfg)) {
        config_.validate();
        std::mt19937_64 rng(seed);
        for (const auto& spec : config_.layers) {
            Conv3d<T> layer(spec);
            if (init == InitMode::he) {
                const double fan_in = double(spec.kernel) * spec.kernel * spec.kernel * spec.in_channels;
                const double stddev = spec.activation == Activation::relu ? std::sqrt(2.0 / fan_in)
                                                                          : std::sqrt(1.0 / fan_in);
                std::normal_distribution<double> dist(0.0, stddev);
                for (auto& w : layer.weights) w = static_cast<T>(dist(rng));
            }
            layers_.push_back(std::move(layer));
        }
    }

    const ModelConfig& config() const { return config_; }
    std::vector<Conv3d<T>>& layers() { return layers_; }
    const std::vector<Conv3d<T>>& layers() const { return layers_; }
    int d() const { return config_.d; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += l.parameter_count();
        return n;
    }

    // Raw network output (sigmoid probabilities), caching activations when
    // caches is non-null.
    ChannelTensor<T> forward(const ChannelTensor<T>& input, std::vector<LayerCache<T>>* caches = nullptr) const {
        if (input.channels != config_.channels()) throw std::invalid_argument("Model::forward: channel mismatch");
        if (caches) caches->assign(layers_.size(), {});
        ChannelTensor<T> act = input;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            ChannelTensor<T> next = conv3d_forward(act, layers_[i], caches ? &(*caches)[i].pre : nullptr);
            if (caches) {
                (*caches)[i].input = std::move(act);
                (*caches)[i].output = next;
                (*caches)[i].valid = true;
            }
            act = std::move(next);
        }
        return act;
    }

    // Output probabilities with the input mask applied when configured.
    ChannelTensor<T> predict(const ChannelTensor<T>& input) const {
        ChannelTensor<T> out = forward(input);
        if (config_.mask_with_input)
            for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= input.values[i];
        return out;
    }

    // Parameter gradients given dL/d(network output).
    std::vector<ConvGrad<T>> backward(const std::vector<LayerCache<T>>& caches, const ChannelTensor<T>& grad_out) const {
        if (caches.size() != layers_.size()) throw std::logic_error("Model::backward: missing forward cache");
        std::vector<ConvGrad<T>> grads(layers_.size());
        ChannelTensor<T> g = grad_out;
        for (std::size_t i = layers_.size(); i-- > 0;) {
            ChannelTensor<T> gin;
            grads[i] = conv3d_backward(caches[i], layers_[i], g, i > 0 ? &gin : nullptr);
            g = std::move(gin);
        }
        return grads;
    }

    // Flat parameter view in declaration order: per layer, weights then bias.
    std::vector<T> flat_parameters() const {
        std::vector<T> p;
        p.reserve(parameter_count());
        for (const auto& l : layers_) {
            p.insert(p.end(), l.weights.begin(), l.weights.end());
            p.insert(p.end(), l.bias.begin(), l.bias.end());
        }
        return p;
    }

    void set_flat_parameters(std::span<const T> p) {
        if (p.size() != parameter_count()) throw std::invalid_argument("Model: parameter count mismatch");
        std::size_t k = 0;
        for (auto& l : layers_) {
            for (auto& w : l.weights) w = p[k++];
            for (auto& b : l.bias) b = p[k++];
        }
    }

private:
    ModelConfig config_;
    std::vector<Conv3d<T>> layers_;
};

template <typename T>
std::vector<T> flatten(const std::vector<ConvGrad<T>>& grads) {
    std::vector<T> out;
    for (const auto& g : grads) {
        out.insert(out.end(), g.weights.begin(), g.weights.end());
        out.insert(out.end(), g.bias.begin(), g.bias.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Losses
//
// Soft counts over prediction p and ground truth g:
//   TP = sum p*g,  FP = sum p*(1-g),  FN = sum (1-p)*g,  GTP = sum g
// FP is predicted-positive/GT-negative and FN is GT-positive/predicted-negative.
// ---------------------------------------------------------------------------

struct ConfusionCounts {
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    double gtp = 0.0;
};

template <typename T>
ConfusionCounts soft_counts(std::span<const T> pred, std::span<const T> gt) {
    if (pred.size() != gt.size()) throw std::invalid_argument("soft_counts: shape mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = pred[i], g = gt[i];
        c.tp += p * g;
        c.fp += p * (1.0 - g);
        c.fn += (1.0 - p) * g;
        c.gtp += g;
    }
    return c;
}

template <typename T>
struct LossResult {
    double value = 0.0;
    std::vector<T> grad;  // dL/dpred
};

// 1 - 2TP / (2TP + alpha FP + (1 - alpha) FN). With an empty ground truth the
// loss is 0 for an all-zero prediction and 1 otherwise (zero gradient).
template <typename T>
LossResult<T> dice_loss(std::span<const T> pred, std::span<const T> gt, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("dice_loss: alpha must lie in [0,1]");
    const ConfusionCounts c = soft_counts(pred, gt);
    LossResult<T> r;
    r.grad.assign(pred.size(), T(0));
    const double den = 2.0 * c.tp + alpha * c.fp + (1.0 - alpha) * c.fn;
    if (c.gtp == 0.0) {
        r.value = c.fp > 0.0 ? 1.0 : 0.0;
        return r;
    }
    if (!(den > 0.0)) {
        r.value = 1.0;
        return r;
    }
    // (den - 2TP) / den, written so exact rationals stay exact
    r.value = (alpha * c.fp + (1.0 - alpha) * c.fn) / den;
    // d(den)/dp_i = 2 g + alpha (1 - g) - (1 - alpha) g
    const double inv2 = 1.0 / (den * den);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double g = gt[i];
        const double dden = 2.0 * g + alpha * (1.0 - g) - (1.0 - alpha) * g;
        r.grad[i] = static_cast<T>(-(2.0 * g * den - 2.0 * c.tp * dden) * inv2);
    }
    return r;
}

template <typename T>
struct RvlResult : LossResult<T> {
    double attraction = 0.0;
    double repulsion = 0.0;
};

// Attraction 1 - TP/GTP plus repulsion FP/GTP; 0 with zero gradient when the
// ground truth is empty.
template <typename T>
RvlResult<T> rvl_loss(std::span<const T> pred, std::span<const T> gt) {
    const ConfusionCounts c = soft_counts(pred, gt);
    RvlResult<T> r;
    r.grad.assign(pred.size(), T(0));
    if (c.gtp == 0.0) return r;
    r.attraction = 1.0 - c.tp / c.gtp;
    r.repulsion = c.fp / c.gtp;
    r.value = r.attraction + r.repulsion;
    const double inv = 1.0 / c.gtp;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double g = gt[i];
        r.grad[i] = static_cast<T>((-g + (1.0 - g)) * inv);
    }
    return r;
}

struct LossConfig {
    double alpha = 0.1;
    double lambda = 0.99;
};

// lambda * dice + (1 - lambda) * rvl
template <typename T>
LossResult<T> combined_loss(std::span<const T> pred, std::span<const T> gt, const LossConfig& cfg) {
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) throw std::invalid_argument("combined_loss: lambda must lie in [0,1]");
    const LossResult<T> dice = dice_loss(pred, gt, cfg.alpha);
    const RvlResult<T> rvl = rvl_loss(pred, gt);
    LossResult<T> r;
    r.value = cfg.lambda * dice.value + (1.0 - cfg.lambda) * rvl.value;
    r.grad.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        r.grad[i] = static_cast<T>(cfg.lambda * dice.grad[i] + (1.0 - cfg.lambda) * rvl.grad[i]);
    return r;
}

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

enum class OptimizerKind : std::uint8_t { sgd, adam };

// Learning rate at step t is lr / (1 + decay * t).
template <typename T>
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double lr, double decay, std::size_t n)
        : kind_(kind), lr_(lr), decay_(decay), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::vector<T>& params, std::span<const T> grad) {
        if (params.size() != grad.size() || params.size() != m_.size())
            throw std::invalid_argument("Optimizer::step: size mismatch");
        ++t_;
        const double lr = lr_ / (1.0 + decay_ * static_cast<double>(t_ - 1));
        if (kind_ == OptimizerKind::sgd) {
            for (std::size_t i = 0; i < params.size(); ++i) params[i] -= static_cast<T>(lr * grad[i]);
            return;
        }
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = grad[i];
            m_[i] = b1 * m_[i] + (1.0 - b1) * g;
            v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
            const double mh = m_[i] / c1;
            const double vh = v_[i] / c2;
            params[i] -= static_cast<T>(lr * mh / (std::sqrt(vh) + eps));
        }
    }

    std::uint64_t steps() const { return t_; }

private:
    OptimizerKind kind_;
    double lr_;
    double decay_;
    std::uint64_t t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Checkpoint: "FPVW" | u32 version | u32 text length | config text |
// parameters as little-endian f32 in declaration order.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void write_checkpoint(std::ostream& out, const Model<T>& model) {
    static_assert(sizeof(float) == 4);
    out.write("FPVW", 4);
    detail::put_u32(out, kCheckpointVersion);
    const std::string text = model.config().to_text();
    detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const T p : model.flat_parameters()) {
        const float f = static_cast<float>(p);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        detail::put_u32(out, bits);
    }
    if (!out) throw std::runtime_error("write_checkpoint: stream failure");
}

template <typename T>
Model<T> read_checkpoint(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FPVW", 4) != 0) throw std::runtime_error("read_checkpoint: bad magic");
    if (detail::get_u32(in) != kCheckpointVersion) throw std::runtime_error("read_checkpoint: unsupported version");
    const std::uint32_t len = detail::get_u32(in);
    std::string text(len, '\0');
    in.read(text.data(), len);
    if (!in) throw std::runtime_error("read_checkpoint: truncated config");
    Model<T> model(ModelConfig::from_text(text), InitMode::zero);
    std::vector<T> params(model.parameter_count());
    for (auto& p : params) {
        const std::uint32_t bits = detail::get_u32(in);
        float f;
        std::memcpy(&f, &bits, 4);
        p = static_cast<T>(f);
    }
    model.set_flat_parameters(params);
    return model;
}

template <typename T>
void save_checkpoint(const std::string& path, const Model<T>& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_checkpoint(out, model);
}

template <typename T = float>
Model<T> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_checkpoint<T>(in);
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

// interleave -> network -> deinterleave with the indicator [p >= tau].
template <typename T>
FroxelGrid predict_pvs(const FroxelGrid& grid, const Model<T>& model, double tau) {
    const int d = model.d();
    check_interleave_dims(grid.dims(), d);
    const ChannelTensor<T> in = interleave<T>(grid, d);
    const ChannelTensor<T> out = model.predict(in);
    FroxelGrid pred = deinterleave(out, d, static_cast<T>(tau), GridRole::predicted_pvs);
    pred.set_supersampling(grid.supersampling());
    return pred;
}

}  // namespace fpvs
