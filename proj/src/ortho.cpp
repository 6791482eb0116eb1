#include "otnn/ortho.hpp"

#include <cmath>
#include <string>

namespace otnn {

namespace {

void require_matrix(const Tensor& w, const char* op) {
    if (w.rank() != 2 || w.size() == 0) {
        throw DimensionError(std::string(op) + ": need a non-empty 2-D tensor");
    }
}

// v <- W^T (W v), returning ||W v|| for the Rayleigh estimate.
double gram_apply(const Tensor& w, Tensor& v, Tensor& wv_scratch) {
    const std::size_t m = w.rows(), n = w.cols();
    double* wv = wv_scratch.data();
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += w.at(i, j) * v.at(j);
        wv[i] = s;
    }
    double norm_wv = 0.0;
    for (std::size_t i = 0; i < m; ++i) norm_wv += wv[i] * wv[i];
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += w.at(i, j) * wv[i];
        v.at(j) = s;
    }
    return std::sqrt(norm_wv);
}

}  // namespace

double power_iteration(const Tensor& w, int iters, Tensor& v) {
    require_matrix(w, "power_iteration");
    if (iters < 1) throw DimensionError("power_iteration: iters must be >= 1");
    const std::size_t n = w.cols();
    if (v.size() != n) {
        // Deterministic fallback start; callers that care seed via the Rng overload.
        v = Tensor({n});
        for (std::size_t j = 0; j < n; ++j) v.at(j) = 1.0 + 0.01 * static_cast<double>(j % 7);
    }
    Tensor wv({w.rows()});
    double sigma = 0.0;
    for (int k = 0; k < iters; ++k) {
        const double vnorm = l2_norm(v);
        if (vnorm == 0.0) return 0.0;
        for (std::size_t j = 0; j < n; ++j) v.at(j) /= vnorm;
        sigma = gram_apply(w, v, wv);  // = ||W v|| with ||v|| = 1
    }
    // Renormalize the persisted iterate so warm starts stay well scaled.
    const double vnorm = l2_norm(v);
    if (vnorm > 0.0) {
        for (std::size_t j = 0; j < n; ++j) v.at(j) /= vnorm;
    }
    return sigma;
}

double power_iteration(const Tensor& w, int iters, Rng& rng) {
    require_matrix(w, "power_iteration");
    Tensor v({w.cols()});
    for (std::size_t j = 0; j < w.cols(); ++j) v.at(j) = rng.normal();
    return power_iteration(w, iters, v);
}

double gram_deviation(const Tensor& w) {
    require_matrix(w, "gram_deviation");
    const bool tall = w.rows() >= w.cols();
    const Tensor g = tall ? matmul(transpose(w), w) : matmul(w, transpose(w));
    const std::size_t n = g.rows();
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            dev = std::max(dev, std::fabs(g.at(i, j) - (i == j ? 1.0 : 0.0)));
    return dev;
}

Tensor bjorck_orthonormalize(const Tensor& w, const BjorckOptions& opts) {
    require_matrix(w, "bjorck_orthonormalize");
    if (opts.iters < 1) throw DimensionError("bjorck_orthonormalize: iters must be >= 1");
    w.check_finite("bjorck_orthonormalize");

    const bool tall = w.rows() >= w.cols();
    const double start_norm = std::max(1.0, linf_norm(w));
    Tensor q = w;
    for (int k = 0; k < opts.iters; ++k) {
        const Tensor g = tall ? matmul(transpose(q), q) : matmul(q, transpose(q));
        double dev = 0.0;
        const std::size_t n = g.rows();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                dev = std::max(dev, std::fabs(g.at(i, j) - (i == j ? 1.0 : 0.0)));
        if (dev <= opts.tol) return q;
        if (!std::isfinite(dev) || linf_norm(q) > 100.0 * start_norm) {
            throw ConvergenceError("bjorck_orthonormalize: iteration diverged (spectral norm too large?)");
        }
        const Tensor corr = tall ? matmul(q, g) : matmul(g, q);
        for (std::size_t i = 0; i < q.size(); ++i) {
            q.at(i) = (1.0 + opts.beta) * q.at(i) - opts.beta * corr.at(i);
        }
    }
    q.check_finite("bjorck_orthonormalize");
    return q;
}

Tensor bjorck_orthonormalize(const Tensor& w, int iters, double beta, double tol) {
    BjorckOptions opts;
    opts.iters = iters;
    opts.beta = beta;
    opts.tol = tol;
    return bjorck_orthonormalize(w, opts);
}

Tensor orthonormal_project(const Tensor& w, Tensor& power_vec, const ProjectionOptions& opts) {
    require_matrix(w, "orthonormal_project");
    const double sigma = power_iteration(w, opts.power_iters, power_vec);
    Tensor q = sigma > 0.0 ? scale(w, 1.0 / (sigma * opts.guard)) : w;
    for (int round = 0; round < opts.max_rounds; ++round) {
        q = bjorck_orthonormalize(q, opts.bjorck);
        if (gram_deviation(q) <= opts.bjorck.tol) return q;
    }
    throw ConvergenceError("orthonormal_project: gram deviation " + std::to_string(gram_deviation(q)) +
                           " above tol after " + std::to_string(opts.bjorck.iters * opts.max_rounds) +
                           " iterations");
}

}  // namespace otnn
