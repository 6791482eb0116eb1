#include "otnn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace otnn {

double LrSchedule::at(std::size_t epoch) const {
    validate();
    double lr = stages.front().second;
    for (const auto& [start, rate] : stages) {
        if (epoch >= start) lr = rate;
    }
    return lr;
}

void LrSchedule::validate() const {
    if (stages.empty()) throw ConfigError("LrSchedule: empty schedule");
    std::size_t prev = 0;
    bool first = true;
    for (const auto& [start, rate] : stages) {
        if (rate <= 0.0) throw ConfigError("LrSchedule: learning rate must be > 0");
        if (!first && start <= prev) throw ConfigError("LrSchedule: stages must be strictly increasing");
        prev = start;
        first = false;
    }
    if (stages.front().first != 0) throw ConfigError("LrSchedule: first stage must start at epoch 0");
}

void AdamState::ensure_shapes(const std::vector<const Tensor*>& params) {
    if (m.size() == params.size()) return;
    m.clear();
    v.clear();
    for (const Tensor* p : params) {
        m.emplace_back(p->shape());
        v.emplace_back(p->shape());
    }
    t = 0;
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, double lr, const AdamConfig& cfg) {
    if (params.size() != grads.size()) throw DimensionError("adam_step: params/grads count mismatch");
    state.ensure_shapes({grads.begin(), grads.end()});
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& theta = *params[p];
        const Tensor& g = *grads[p];
        if (!theta.same_shape(g)) throw DimensionError("adam_step: grad shape mismatch");
        Tensor& m = state.m[p];
        Tensor& v = state.v[p];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m.at(i) = cfg.beta1 * m.at(i) + (1.0 - cfg.beta1) * g.at(i);
            v.at(i) = cfg.beta2 * v.at(i) + (1.0 - cfg.beta2) * g.at(i) * g.at(i);
            const double m_hat = m.at(i) / bc1;
            const double v_hat = v.at(i) / bc2;
            theta.at(i) -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
    }
}

namespace {

std::vector<int> to_pm(const std::vector<int>& labels01) {
    std::vector<int> pm(labels01.size());
    for (std::size_t i = 0; i < labels01.size(); ++i) {
        if (labels01[i] != 0 && labels01[i] != 1) {
            throw DimensionError("binary loss: dataset labels must be {0,1}");
        }
        pm[i] = labels01[i] == 1 ? 1 : -1;
    }
    return pm;
}

}  // namespace

LossGrad evaluate_loss(const LossSpec& spec, const Tensor& scores, const std::vector<int>& labels) {
    switch (spec.kind) {
        case LossKind::HkrBinary:
            return hkr_binary(scores, to_pm(labels), spec.hkr);
        case LossKind::HkrMulticlassOva:
            return hkr_multiclass_ova(scores, labels, spec.hkr);
        case LossKind::HkrMulticlassSoftmax:
            return hkr_multiclass_softmax(scores, labels, spec.hkr);
        case LossKind::CrossEntropy:
            return cross_entropy_softmax(scores, labels);
        case LossKind::Bce:
            return bce_logit(scores, to_pm(labels));
    }
    throw StateError("evaluate_loss: unreachable");
}

int predict_class(const LipNet&, const Tensor& scores_row, std::size_t q_classes) {
    if (scores_row.size() == 1) {
        return scores_row.at(0) >= 0.0 ? 1 : 0;
    }
    if (scores_row.size() != q_classes) {
        throw DimensionError("predict_class: score width != q");
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores_row.size(); ++k) {
        if (scores_row.at(k) > scores_row.at(best)) best = k;
    }
    return static_cast<int>(best);
}

double accuracy(const LipNet& net, const data::Dataset& ds) {
    const Tensor scores = forward(net, ds.inputs);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Tensor row = scores.row_slice(i).reshaped({scores.cols()});
        if (predict_class(net, row, ds.meta.q) == ds.labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ds.size());
}

namespace {

struct BatchPlan {
    std::vector<std::vector<std::size_t>> batches;
};

BatchPlan plan_batches(const data::Dataset& ds, std::size_t batch_size, bool stratified, Rng& rng) {
    const std::size_t n = ds.size();
    BatchPlan plan;
    if (!stratified) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t end = std::min(n, start + batch_size);
            plan.batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                                      order.begin() + static_cast<std::ptrdiff_t>(end));
        }
        return plan;
    }

    // Stratified: per-class shuffled pools consumed cyclically so every batch
    // holds every class (tail batches re-draw from exhausted pools).
    const std::size_t q = ds.meta.q;
    if (batch_size < q) throw ConfigError("train: stratified batches need batch_size >= #classes");
    std::vector<std::vector<std::size_t>> pools(q);
    for (std::size_t i = 0; i < n; ++i) pools[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    for (auto& pool : pools) {
        if (pool.empty()) {
            throw DegenerateBatchError("train: a class is absent from the training set");
        }
        for (std::size_t k = pool.size(); k > 1; --k) std::swap(pool[k - 1], pool[rng.below(k)]);
    }
    std::vector<std::size_t> cursor(q, 0);
    const std::size_t num_batches = (n + batch_size - 1) / batch_size;
    for (std::size_t bi = 0; bi < num_batches; ++bi) {
        std::vector<std::size_t> batch;
        batch.reserve(batch_size);
        for (std::size_t slot = 0; slot < batch_size; ++slot) {
            const std::size_t cls = slot % q;  // round-robin keeps counts balanced
            auto& pool = pools[cls];
            batch.push_back(pool[cursor[cls] % pool.size()]);
            ++cursor[cls];
        }
        plan.batches.push_back(std::move(batch));
    }
    return plan;
}

Tensor gather_rows(const Tensor& inputs, const std::vector<std::size_t>& rows) {
    Tensor out({rows.size(), inputs.cols()});
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < inputs.cols(); ++c) out.at(r, c) = inputs.at(rows[r], c);
    return out;
}

}  // namespace

TrainResult train(LipNet net, const data::Dataset& ds, const LossSpec& loss, const TrainConfig& cfg) {
    ds.validate();
    net.validate();
    if (ds.size() == 0) throw DimensionError("train: empty dataset");
    cfg.schedule.validate();

    const bool stratified = loss.kind == LossKind::HkrMulticlassOva;
    Rng rng(cfg.seed);

    project(net, cfg.projection);

    std::vector<Tensor*> params;
    std::vector<std::size_t> dense_layers;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        if (net.layers[li].is_dense()) {
            params.push_back(&net.layers[li].w);
            params.push_back(&net.layers[li].b);
            dense_layers.push_back(li);
        }
    }

    AdamState adam;
    TrainHistory history;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.schedule.at(epoch);
        const BatchPlan plan = plan_batches(ds, cfg.batch_size, stratified, rng);
        double loss_sum = 0.0;
        std::size_t hits = 0, seen = 0;
        for (std::size_t bi = 0; bi < plan.batches.size(); ++bi) {
            const auto& idx = plan.batches[bi];
            const Tensor xb = gather_rows(ds.inputs, idx);
            std::vector<int> yb(idx.size());
            for (std::size_t r = 0; r < idx.size(); ++r) yb[r] = ds.labels[idx[r]];

            const ForwardTrace trace = forward_trace(net, xb);
            LossGrad lg;
            try {
                lg = evaluate_loss(loss, trace.output, yb);
            } catch (const DegenerateBatchError& e) {
                throw DegenerateBatchError("epoch " + std::to_string(epoch) + " batch " +
                                           std::to_string(bi) + ": " + e.what());
            }
            loss_sum += lg.value;
            for (std::size_t r = 0; r < idx.size(); ++r) {
                const Tensor row = trace.output.row_slice(r).reshaped({trace.output.cols()});
                if (predict_class(net, row, ds.meta.q) == yb[r]) ++hits;
            }
            seen += idx.size();

            const Gradients g = backward(net, trace, lg.dscores);
            std::vector<const Tensor*> grads;
            grads.reserve(params.size());
            for (std::size_t li : dense_layers) {
                grads.push_back(&g.dw[li]);
                grads.push_back(&g.db[li]);
            }
            adam_step(params, grads, adam, lr, cfg.adam);
            project(net, cfg.projection);
        }
        history.loss.push_back(loss_sum / static_cast<double>(plan.batches.size()));
        history.accuracy.push_back(static_cast<double>(hits) / static_cast<double>(seen));
    }

    if (cfg.final_tight_projection && net.has_spectral_layers()) {
        ProjectionOptions tight = cfg.projection;
        tight.bjorck.tol = 1e-9;
        tight.bjorck.iters = 30;
        tight.max_rounds = 4;
        project(net, tight);
    }
    return {std::move(net), std::move(history)};
}

}  // namespace otnn
