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
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpvs/dataset.hpp"
#include "fpvs/evalrt.hpp"
#include "fpvs/interleave.hpp"
#include "fpvs/neural.hpp"

namespace fpvs {

struct TrainConfig {
    double alpha = 0.1;
    double lambda = 0.99;
    double tau = 0.5;
    double learning_rate = 1e-3;
    double decay = 1e-10;
    int batch_size = 3;
    int epochs = 20;
    std::uint64_t seed = 1;
    OptimizerKind optimizer = OptimizerKind::adam;
    long max_steps = 0;  // 0 = no limit

    LossConfig loss() const { return {alpha, lambda}; }

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("TrainConfig: alpha must lie in [0,1]");
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("TrainConfig: lambda must lie in [0,1]");
        if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("TrainConfig: tau must lie in (0,1)");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
        if (!(decay >= 0.0)) throw std::invalid_argument("TrainConfig: decay must be non-negative");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
        if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    }
};

// One (geometry, ground truth) pair in interleaved form.
struct TrainSample {
    ChannelTensor<float> input;
    ChannelTensor<float> target;
};

inline TrainSample make_sample(const FroxelGrid& geometry, const FroxelGrid& gt, int d) {
    geometry.require_same_dims(gt);
    return {interleave<float>(geometry, d), interleave<float>(gt, d)};
}

inline std::vector<TrainSample> load_samples(const Manifest& m, int d, std::size_t first = 0,
                                             std::size_t count = static_cast<std::size_t>(-1)) {
    std::vector<TrainSample> out;
    const std::size_t end = std::min(m.entries.size(), first + std::min(count, m.entries.size()));
    for (std::size_t i = first; i < end; ++i)
        out.push_back(make_sample(load_grid(m.geometry(i).string()), load_grid(m.gt(i).string()), d));
    return out;
}

class TrainingError : public std::runtime_error {
public:
    TrainingError(long batch, const std::string& what)
        : std::runtime_error("batch " + std::to_string(batch) + ": " + what), batch_(batch) {}
    long batch() const { return batch_; }

private:
    long batch_;
};

struct HardCounts {
    std::size_t tp = 0, fp = 0, fn = 0, gtp = 0;
    void add(std::span<const float> prob, std::span<const float> gt, double tau) {
        for (std::size_t i = 0; i < prob.size(); ++i) {
            const bool p = prob[i] >= tau;
            const bool g = gt[i] >= 0.5f;
            tp += p && g;
            fp += p && !g;
            fn += !p && g;
            gtp += g;
        }
    }
    double fnr() const { return gtp ? double(fn) / double(gtp) : 0.0; }
    double fpr() const { return gtp ? double(fp) / double(gtp) : 0.0; }
};

struct StepResult {
    double loss = 0.0;  // mean over the batch
    HardCounts counts;
};

// Forward/backward over a batch in sample order, mean-gradient update.
class Trainer {
public:
    Trainer(Model<float> model, const TrainConfig& cfg)
        : model_(std::move(model)), cfg_(cfg),
          opt_(cfg.optimizer, cfg.learning_rate, cfg.decay, model_.parameter_count()) {
        cfg_.validate();
    }

    const Model<float>& model() const { return model_; }
    Model<float>& model() { return model_; }
    long steps() const { return static_cast<long>(opt_.steps()); }

    // Loss and gradient of one sample; grad is accumulated into `acc`.
    double accumulate(const TrainSample& s, std::vector<float>& acc, HardCounts& counts, long batch_index) const {
        std::vector<LayerCache<float>> caches;
        ChannelTensor<float> out = model_.forward(s.input, &caches);
        const bool mask = model_.config().mask_with_input;
        std::vector<float> prob = out.values;
        if (mask)
            for (std::size_t i = 0; i < prob.size(); ++i) prob[i] *= s.input.values[i];
        const LossResult<float> loss =
            combined_loss<float>(prob, s.target.values, cfg_.loss());
        if (!std::isfinite(loss.value)) throw TrainingError(batch_index, "non-finite loss");
        counts.add(prob, s.target.values, cfg_.tau);
        ChannelTensor<float> g(out.nx, out.ny, out.nz, out.channels);
        for (std::size_t i = 0; i < g.values.size(); ++i)
            g.values[i] = mask ? loss.grad[i] * s.input.values[i] : loss.grad[i];
        const auto grads = flatten(model_.backward(caches, g));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += grads[i];
        return loss.value;
    }

    StepResult step(std::span<const TrainSample* const> batch, long batch_index) {
        StepResult r;
        std::vector<float> acc(model_.parameter_count(), 0.0f);
        for (const TrainSample* s : batch) r.loss += accumulate(*s, acc, r.counts, batch_index);
        const float inv = 1.0f / static_cast<float>(batch.size());
        for (auto& a : acc) {
            a *= inv;
            if (!std::isfinite(a)) throw TrainingError(batch_index, "non-finite gradient");
        }
        r.loss /= static_cast<double>(batch.size());
        std::vector<float> params = model_.flat_parameters();
        opt_.step(params, acc);
        model_.set_flat_parameters(params);
        return r;
    }

private:
    Model<float> model_;
    TrainConfig cfg_;
    Optimizer<float> opt_;
};

struct EpochMetrics {
    int epoch = 0;
    long steps = 0;
    double loss = 0.0;
    double fnr = 0.0;
    double fpr = 0.0;
};

inline constexpr const char* kEpochLogHeader = "epoch,steps,loss,fnr,fpr";

inline void write_epoch_log(std::ostream& out, const std::vector<EpochMetrics>& log) {
    out << kEpochLogHeader << "\n";
    char buf[256];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%d,%ld,%.9g,%.9g,%.9g\n", e.epoch, e.steps, e.loss, e.fnr, e.fpr);
        out << buf;
    }
}

struct TrainResult {
    Model<float> model;
    std::vector<EpochMetrics> log;
};

// Mini-batch training with a seeded shuffle per epoch. Per-epoch metrics are
// accumulated from the training forward passes. on_epoch may return false
// to stop early.
inline TrainResult train(const std::vector<TrainSample>& samples, const ModelConfig& mcfg, const TrainConfig& tcfg,
                         const std::function<bool(const EpochMetrics&)>& on_epoch = {}) {
    tcfg.validate();
    if (samples.empty()) throw std::invalid_argument("train: empty dataset");
    Trainer trainer(Model<float>(mcfg, InitMode::he, tcfg.seed), tcfg);
    std::mt19937_64 rng(splitmix64(tcfg.seed));
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    TrainResult result;
    long batch_index = 0;
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        HardCounts counts;
        double loss_sum = 0.0;
        std::size_t batches = 0;
        bool stop = false;
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(tcfg.batch_size)) {
            std::vector<const TrainSample*> batch;
            for (std::size_t k = b; k < std::min(order.size(), b + static_cast<std::size_t>(tcfg.batch_size)); ++k)
                batch.push_back(&samples[order[k]]);
            const StepResult r = trainer.step(batch, batch_index++);
            loss_sum += r.loss;
            ++batches;
            counts.tp += r.counts.tp;
            counts.fp += r.counts.fp;
            counts.fn += r.counts.fn;
            counts.gtp += r.counts.gtp;
            if (tcfg.max_steps > 0 && trainer.steps() >= tcfg.max_steps) {
                stop = true;
                break;
            }
        }
        EpochMetrics em{epoch, trainer.steps(), loss_sum / static_cast<double>(batches), counts.fnr(), counts.fpr()};
        result.log.push_back(em);
        if (on_epoch && !on_epoch(em)) stop = true;
        if (stop) break;
    }
    result.model = trainer.model();
    return result;
}

// Mean per-frame FNR/FPR of thresholded predictions; frames with an empty
// ground truth are skipped.
struct EvalSummary {
    double mean_fnr = 0.0;
    double mean_fpr = 0.0;
    std::size_t frames = 0;
    std::vector<MetricsRecord> records;
};

inline EvalSummary evaluate(const Model<float>& model, const std::vector<TrainSample>& samples, double tau) {
    EvalSummary s;
    int frame = 0;
    for (const auto& smp : samples) {
        const ChannelTensor<float> prob = model.predict(smp.input);
        const int d = model.d();
        const FroxelGrid pred = deinterleave(prob, d, static_cast<float>(tau));
        const FroxelGrid gt = deinterleave(smp.target, d, 0.5f, GridRole::gt_pvs);
        MetricsRecord m = froxel_metrics(pred, gt);
        m.frame = frame++;
        if (!m.empty_gt) {
            s.mean_fnr += m.fnr;
            s.mean_fpr += m.fpr;
            ++s.frames;
        }
        s.records.push_back(m);
    }
    if (s.frames) {
        s.mean_fnr /= static_cast<double>(s.frames);
        s.mean_fpr /= static_cast<double>(s.frames);
    }
    return s;
}

}  // namespace fpvs
