#pragma once

#include <vector>

#include "otnn/tensor.hpp"

namespace otnn {

struct HkrConfig {
    enum class Variant { Binary, MulticlassOva, MulticlassSoftmax };
    Variant variant = Variant::Binary;
    double lambda = 10.0;   // hinge weight, >= 0
    double margin = 0.5;    // m, > 0
    double alpha = 10.0;    // softmax temperature, >= 0 (softmax variant only)

    void validate() const;
};

// Loss value plus the exact (sub)derivative with respect to every score.
// Hinge subgradient at the kink is 0.
struct LossGrad {
    double value = 0.0;
    Tensor dscores;  // same shape as the scores argument
};

// Binary hKR: mean over y=-1 of f  -  mean over y=+1 of f
//             + lambda * mean over all of (m - y f)_+ .
// scores: batch x 1, labels_pm in {+1,-1}. Throws DegenerateBatchError when
// the batch is single-class (the class-conditional means need both).
LossGrad hkr_binary(const Tensor& scores, const std::vector<int>& labels_pm, const HkrConfig& cfg);

// sigma(f_k, y, alpha) = exp(alpha f_k) / sum_{j != y} exp(alpha f_j) over
// competitors k != y, max-shift stabilized. Returned vector has q entries
// with weight 0 at position y.
std::vector<double> softmax_weights(const Tensor& scores_row, int y, double alpha);

// One-versus-all multiclass hKR: per class k, mean_{y != k} f_k - mean_{y = k} f_k,
// plus lambda * mean over samples of H(f, y, m) with
// H = (m - f_y)_+ + sum_{k != y} (m + f_k)_+ .
// Every class must appear in the batch.
LossGrad hkr_multiclass_ova(const Tensor& scores, const std::vector<int>& labels, const HkrConfig& cfg);

// Sample-wise softmax-weighted variant:
// per sample, sum_{k != y} f_k sigma(f_k, y, alpha) - f_y
//           + lambda * [ (m - f_y)_+ + sum_{k != y} sigma(f_k, y, alpha) (m + f_k)_+ ],
// averaged over the batch. No cross-sample coupling; works with any batch
// composition. The gradient differentiates through the sigma weights.
LossGrad hkr_multiclass_softmax(const Tensor& scores, const std::vector<int>& labels,
                                const HkrConfig& cfg);

// Standard stabilized categorical cross-entropy over logits; gradient is
// (softmax - one_hot) / batch.
LossGrad cross_entropy_softmax(const Tensor& scores, const std::vector<int>& labels);

// Binary sigmoid cross-entropy on a single logit, labels in {+1,-1}.
LossGrad bce_logit(const Tensor& scores, const std::vector<int>& labels_pm);

}  // namespace otnn
