#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "otnn/data.hpp"
#include "otnn/losses.hpp"
#include "otnn/net.hpp"

namespace otnn {

// Piecewise-constant learning rate: stages sorted by starting epoch.
struct LrSchedule {
    std::vector<std::pair<std::size_t, double>> stages = {{0, 5e-4}};
    double at(std::size_t epoch) const;
    void validate() const;
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<Tensor> m, v;
    long t = 0;

    void ensure_shapes(const std::vector<const Tensor*>& params);
};

// Bias-corrected update theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, double lr, const AdamConfig& cfg = {});

enum class LossKind { HkrBinary, HkrMulticlassOva, HkrMulticlassSoftmax, CrossEntropy, Bce };

struct LossSpec {
    LossKind kind = LossKind::HkrBinary;
    HkrConfig hkr;
};

// Evaluates one batch of scores under the spec. Binary kinds map dataset
// labels {0,1} to {-1,+1}.
LossGrad evaluate_loss(const LossSpec& spec, const Tensor& scores, const std::vector<int>& labels);

struct TrainConfig {
    std::size_t batch_size = 128;
    std::size_t epochs = 100;
    LrSchedule schedule;
    std::uint64_t seed = 0;
    AdamConfig adam;
    ProjectionOptions projection;
    // Per-step projections stop at the configured gram tol; one tight pass at
    // the end keeps the Lipschitz certificate comfortably inside tolerance.
    bool final_tight_projection = true;
};

struct TrainHistory {
    std::vector<double> loss;      // per-epoch mean batch loss
    std::vector<double> accuracy;  // per-epoch training accuracy from the same forward passes
};

struct TrainResult {
    LipNet net;
    TrainHistory history;
};

// Projected minibatch training. Batches are reshuffled each epoch from the
// seeded stream; the one-versus-all variant uses class-stratified batches so
// its every-class-present precondition holds. project() runs after every
// adam step. Fully reproducible from cfg.seed.
TrainResult train(LipNet net, const data::Dataset& ds, const LossSpec& loss, const TrainConfig& cfg);

int predict_class(const LipNet& net, const Tensor& scores_row, std::size_t q_classes);
double accuracy(const LipNet& net, const data::Dataset& ds);

}  // namespace otnn
