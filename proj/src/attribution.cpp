#include "otnn/attribution.hpp"

#include <cmath>
#include <string>

namespace otnn::attr {

namespace {

void require_single(const Tensor& x) {
    if (x.rank() != 1) throw DimensionError("attribution: input must be a rank-1 sample");
}

int resolve_target(const LipNet& net, const Tensor& scores, int target) {
    const std::size_t q = net.out_dim();
    if (target == -1) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < q; ++k)
            if (scores.at(k) > scores.at(best)) best = k;
        return static_cast<int>(best);
    }
    if (target < 0 || static_cast<std::size_t>(target) >= q) {
        throw DimensionError("attribution: target class " + std::to_string(target) +
                             " out of range for q=" + std::to_string(q));
    }
    return target;
}

Tensor onehot_seed(std::size_t q, int target) {
    Tensor seed({q});
    seed.at(static_cast<std::size_t>(target)) = 1.0;
    return seed;
}

}  // namespace

Tensor input_gradient(const LipNet& net, const Tensor& x, int target) {
    require_single(x);
    const ForwardTrace trace = forward_trace(net, x);
    const Tensor scores = trace.output.reshaped({net.out_dim()});
    const int t = resolve_target(net, scores, target);
    const Gradients g = backward(net, trace, onehot_seed(net.out_dim(), t));
    return g.dx;
}

Attribution saliency(const LipNet& net, const Tensor& x, int target) {
    Tensor g = input_gradient(net, x, target);
    for (std::size_t i = 0; i < g.size(); ++i) g.at(i) = std::fabs(g.at(i));
    Attribution a;
    a.values = std::move(g);
    a.method = "saliency";
    a.target_class = target;
    return a;
}

Tensor smoothgrad_signed(const LipNet& net, const Tensor& x, int target, int n, double sigma,
                         Rng& rng) {
    require_single(x);
    if (n < 1) throw DimensionError("smoothgrad: n must be >= 1");
    if (sigma == 0.0) return input_gradient(net, x, target);
    Tensor acc({x.size()});
    for (int s = 0; s < n; ++s) {
        Tensor xp = x;
        for (std::size_t i = 0; i < xp.size(); ++i) xp.at(i) += rng.normal(0.0, sigma);
        axpy(1.0, input_gradient(net, xp, target), acc);
    }
    return scale(acc, 1.0 / static_cast<double>(n));
}

Attribution smoothgrad(const LipNet& net, const Tensor& x, int target, int n, double sigma,
                       Rng& rng) {
    Tensor mean = smoothgrad_signed(net, x, target, n, sigma, rng);
    for (std::size_t i = 0; i < mean.size(); ++i) mean.at(i) = std::fabs(mean.at(i));
    Attribution a;
    a.values = std::move(mean);
    a.method = "smoothgrad";
    a.target_class = target;
    a.params = {{"n", static_cast<double>(n)}, {"sigma", sigma}};
    return a;
}

Attribution integrated_gradients(const LipNet& net, const Tensor& x, int target,
                                 const Tensor& baseline, int n) {
    require_single(x);
    if (!baseline.same_shape(x)) throw DimensionError("integrated_gradients: baseline shape mismatch");
    if (n < 1) throw DimensionError("integrated_gradients: n must be >= 1");
    const Tensor delta = sub(x, baseline);
    Tensor acc({x.size()});
    for (int k = 0; k < n; ++k) {
        const double alpha = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        Tensor xk = baseline;
        axpy(alpha, delta, xk);
        axpy(1.0, input_gradient(net, xk, target), acc);
    }
    Attribution a;
    a.values = hadamard(delta, scale(acc, 1.0 / static_cast<double>(n)));
    a.method = "integrated_gradients";
    a.target_class = target;
    a.params = {{"n", static_cast<double>(n)}};
    return a;
}

Attribution gradient_input(const LipNet& net, const Tensor& x, int target) {
    Attribution a;
    a.values = hadamard(input_gradient(net, x, target), x);
    a.method = "gradient_input";
    a.target_class = target;
    return a;
}

namespace {

CounterfactualPath walk_gradient(const LipNet& net, const Tensor& x, double t, bool clamp01,
                                 const Tensor& seed, double f0) {
    const ForwardTrace trace = forward_trace(net, x);
    const Gradients g = backward(net, trace, seed);
    const double gnorm = l2_norm(g.dx);
    if (gnorm < 1e-6) throw DegenerateGradientError("counterfactual: gradient norm below 1e-6");

    CounterfactualPath path;
    path.origin = x;
    path.direction = g.dx;
    path.t = t;
    path.f_origin = f0;
    path.endpoint = x;
    axpy(-t * f0, g.dx, path.endpoint);
    if (clamp01) {
        for (std::size_t i = 0; i < path.endpoint.size(); ++i) {
            path.endpoint.at(i) = std::min(1.0, std::max(0.0, path.endpoint.at(i)));
        }
    }
    const Tensor end_scores = forward(net, path.endpoint);
    double residual = 0.0;
    for (std::size_t k = 0; k < end_scores.size(); ++k) residual += seed.at(k) * end_scores.at(k);
    path.residual = residual;
    path.sign_flipped = (f0 >= 0.0) != (residual >= 0.0);
    return path;
}

}  // namespace

CounterfactualPath boundary_point(const LipNet& net, const Tensor& x, int score_index) {
    return counterfactual(net, x, 1.0, false, score_index);
}

CounterfactualPath counterfactual(const LipNet& net, const Tensor& x, double t, bool clamp01,
                                  int score_index) {
    require_single(x);
    const std::size_t q = net.out_dim();
    if (score_index < 0 || static_cast<std::size_t>(score_index) >= q) {
        throw DimensionError("counterfactual: score index out of range");
    }
    const Tensor scores = forward(net, x);
    Tensor seed({q});
    seed.at(static_cast<std::size_t>(score_index)) = 1.0;
    return walk_gradient(net, x, t, clamp01, seed, scores.at(static_cast<std::size_t>(score_index)));
}

CounterfactualPath counterfactual_targeted(const LipNet& net, const Tensor& x, double t, int target,
                                           bool clamp01) {
    require_single(x);
    const std::size_t q = net.out_dim();
    if (q < 2) throw ArityError("counterfactual_targeted: needs a multiclass head");
    if (target < 0 || static_cast<std::size_t>(target) >= q) {
        throw DimensionError("counterfactual_targeted: target out of range");
    }
    const Tensor scores = forward(net, x);
    std::size_t cur = 0;
    for (std::size_t k = 1; k < q; ++k)
        if (scores.at(k) > scores.at(cur)) cur = k;
    Tensor seed({q});
    seed.at(static_cast<std::size_t>(target)) += 1.0;
    seed.at(cur) -= 1.0;  // driving score: f_target - f_current
    const double f0 = scores.at(static_cast<std::size_t>(target)) - scores.at(cur);
    return walk_gradient(net, x, t, clamp01, seed, f0);
}

}  // namespace otnn::attr
