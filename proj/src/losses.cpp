#include "otnn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace otnn {

void HkrConfig::validate() const {
    if (margin <= 0.0) throw DimensionError("HkrConfig: margin must be > 0");
    if (lambda < 0.0) throw DimensionError("HkrConfig: lambda must be >= 0");
    if (alpha < 0.0) throw DimensionError("HkrConfig: alpha must be >= 0");
}

namespace {

void require_labels(const Tensor& scores, std::size_t labels) {
    if (scores.rank() != 2) throw DimensionError("loss: scores must be batch x q");
    if (scores.rows() != labels) throw DimensionError("loss: labels length != batch size");
}

inline double hinge(double z) { return z > 0.0 ? z : 0.0; }
inline double hinge_active(double z) { return z > 0.0 ? 1.0 : 0.0; }  // 0 at the kink

}  // namespace

LossGrad hkr_binary(const Tensor& scores, const std::vector<int>& labels_pm, const HkrConfig& cfg) {
    cfg.validate();
    require_labels(scores, labels_pm.size());
    if (scores.cols() != 1) throw DimensionError("hkr_binary: scores must be batch x 1");

    const std::size_t n = labels_pm.size();
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels_pm) {
        if (y == 1) ++n_pos;
        else if (y == -1) ++n_neg;
        else throw DimensionError("hkr_binary: labels must be +1 or -1");
    }
    if (n_pos == 0 || n_neg == 0) {
        throw DegenerateBatchError("hkr_binary: batch needs at least one sample of each class");
    }

    LossGrad out;
    out.dscores = Tensor({n, 1});
    double kr = 0.0, hg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = scores.at(i, 0);
        const double y = labels_pm[i];
        if (y > 0) {
            kr -= f / static_cast<double>(n_pos);
            out.dscores.at(i, 0) -= 1.0 / static_cast<double>(n_pos);
        } else {
            kr += f / static_cast<double>(n_neg);
            out.dscores.at(i, 0) += 1.0 / static_cast<double>(n_neg);
        }
        const double z = cfg.margin - y * f;
        hg += hinge(z);
        out.dscores.at(i, 0) += cfg.lambda * hinge_active(z) * (-y) / static_cast<double>(n);
    }
    out.value = kr + cfg.lambda * hg / static_cast<double>(n);
    return out;
}

std::vector<double> softmax_weights(const Tensor& scores_row, int y, double alpha) {
    const std::size_t q = scores_row.size();
    if (q < 2) throw ArityError("softmax_weights: need q >= 2 scores");
    if (y < 0 || static_cast<std::size_t>(y) >= q) {
        throw DimensionError("softmax_weights: label out of range");
    }
    double mx = -1e300;
    for (std::size_t k = 0; k < q; ++k) {
        if (static_cast<int>(k) == y) continue;
        mx = std::max(mx, alpha * scores_row.at(k));
    }
    std::vector<double> w(q, 0.0);
    double sum = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        if (static_cast<int>(k) == y) continue;
        w[k] = std::exp(alpha * scores_row.at(k) - mx);
        sum += w[k];
    }
    for (std::size_t k = 0; k < q; ++k) w[k] /= sum;
    return w;
}

LossGrad hkr_multiclass_ova(const Tensor& scores, const std::vector<int>& labels, const HkrConfig& cfg) {
    cfg.validate();
    require_labels(scores, labels.size());
    const std::size_t n = scores.rows(), q = scores.cols();
    if (q < 2) throw ArityError("hkr_multiclass_ova: need q >= 2");

    std::vector<std::size_t> count(q, 0);
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= q) {
            throw DimensionError("hkr_multiclass_ova: label out of range");
        }
        ++count[static_cast<std::size_t>(y)];
    }
    for (std::size_t k = 0; k < q; ++k) {
        if (count[k] == 0 || count[k] == n) {
            throw DegenerateBatchError("hkr_multiclass_ova: class " + std::to_string(k) +
                                       (count[k] == 0 ? " missing from batch" : " is the whole batch"));
        }
    }

    LossGrad out;
    out.dscores = Tensor({n, q});
    double kr = 0.0, hg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t yi = static_cast<std::size_t>(labels[i]);
        for (std::size_t k = 0; k < q; ++k) {
            const double f = scores.at(i, k);
            const double n_k = static_cast<double>(count[k]);
            const double n_not = static_cast<double>(n - count[k]);
            if (k == yi) {
                kr -= f / n_k;
                out.dscores.at(i, k) -= 1.0 / n_k;
                const double z = cfg.margin - f;
                hg += hinge(z);
                out.dscores.at(i, k) += cfg.lambda * hinge_active(z) * (-1.0) / static_cast<double>(n);
            } else {
                kr += f / n_not;
                out.dscores.at(i, k) += 1.0 / n_not;
                const double z = cfg.margin + f;
                hg += hinge(z);
                out.dscores.at(i, k) += cfg.lambda * hinge_active(z) / static_cast<double>(n);
            }
        }
    }
    out.value = kr + cfg.lambda * hg / static_cast<double>(n);
    return out;
}

LossGrad hkr_multiclass_softmax(const Tensor& scores, const std::vector<int>& labels,
                                const HkrConfig& cfg) {
    cfg.validate();
    require_labels(scores, labels.size());
    const std::size_t n = scores.rows(), q = scores.cols();
    if (q < 2) throw ArityError("hkr_multiclass_softmax: need q >= 2");

    LossGrad out;
    out.dscores = Tensor({n, q});
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= q) {
            throw DimensionError("hkr_multiclass_softmax: label out of range");
        }
        const Tensor row = scores.row_slice(i).reshaped({q});
        const std::vector<double> sig = softmax_weights(row, y, cfg.alpha);

        double kr_w = 0.0;       // sum_k f_k sigma_k
        double hinge_w = 0.0;    // sum_k sigma_k (m + f_k)_+
        for (std::size_t k = 0; k < q; ++k) {
            if (static_cast<int>(k) == y) continue;
            kr_w += row.at(k) * sig[k];
            hinge_w += sig[k] * hinge(cfg.margin + row.at(k));
        }
        const double fy = row.at(static_cast<std::size_t>(y));
        const double hy = hinge(cfg.margin - fy);
        total += (kr_w - fy) + cfg.lambda * (hy + hinge_w);

        // d/df_y: KR gives -1, hinge gives -1 on the active branch. sigma has
        // no f_y dependence (the sum excludes the true class).
        out.dscores.at(i, static_cast<std::size_t>(y)) +=
            inv_n * (-1.0 - cfg.lambda * hinge_active(cfg.margin - fy));
        // d/df_l, l != y: d sigma_k / d f_l = alpha sigma_k (delta_kl - sigma_l).
        for (std::size_t l = 0; l < q; ++l) {
            if (static_cast<int>(l) == y) continue;
            const double fl = row.at(l);
            const double d_kr = sig[l] * (1.0 + cfg.alpha * (fl - kr_w));
            const double d_h = sig[l] * (hinge_active(cfg.margin + fl) +
                                         cfg.alpha * (hinge(cfg.margin + fl) - hinge_w));
            out.dscores.at(i, l) += inv_n * (d_kr + cfg.lambda * d_h);
        }
    }
    out.value = total * inv_n;
    return out;
}

LossGrad cross_entropy_softmax(const Tensor& scores, const std::vector<int>& labels) {
    require_labels(scores, labels.size());
    const std::size_t n = scores.rows(), q = scores.cols();
    LossGrad out;
    out.dscores = Tensor({n, q});
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= q) {
            throw DimensionError("cross_entropy_softmax: label out of range");
        }
        double mx = scores.at(i, 0);
        for (std::size_t k = 1; k < q; ++k) mx = std::max(mx, scores.at(i, k));
        double lse = 0.0;
        for (std::size_t k = 0; k < q; ++k) lse += std::exp(scores.at(i, k) - mx);
        lse = std::log(lse) + mx;
        total += lse - scores.at(i, static_cast<std::size_t>(y));
        for (std::size_t k = 0; k < q; ++k) {
            const double p = std::exp(scores.at(i, k) - lse);
            out.dscores.at(i, k) = inv_n * (p - (static_cast<int>(k) == y ? 1.0 : 0.0));
        }
    }
    out.value = total * inv_n;
    return out;
}

LossGrad bce_logit(const Tensor& scores, const std::vector<int>& labels_pm) {
    require_labels(scores, labels_pm.size());
    if (scores.cols() != 1) throw DimensionError("bce_logit: scores must be batch x 1");
    const std::size_t n = scores.rows();
    LossGrad out;
    out.dscores = Tensor({n, 1});
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels_pm[i];
        if (y != 1 && y != -1) throw DimensionError("bce_logit: labels must be +1 or -1");
        const double z = static_cast<double>(y) * scores.at(i, 0);
        // log(1 + exp(-z)) without overflow
        total += z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
        const double sig_neg = 1.0 / (1.0 + std::exp(z));  // sigmoid(-z)
        out.dscores.at(i, 0) = inv_n * (-static_cast<double>(y)) * sig_neg;
    }
    out.value = total * inv_n;
    return out;
}

}  // namespace otnn
