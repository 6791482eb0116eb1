#pragma once

#include <map>
#include <string>

#include "otnn/net.hpp"
#include "otnn/rng.hpp"

namespace otnn::attr {

struct Attribution {
    Tensor values;  // shaped like the input
    std::string method;
    int target_class = 0;
    std::map<std::string, double> params;
};

// Signed gradient of the target score with respect to the input, d long.
// target must index a valid output; -1 selects the argmax class.
Tensor input_gradient(const LipNet& net, const Tensor& x, int target);

// |grad_x f_target(x)| elementwise.
Attribution saliency(const LipNet& net, const Tensor& x, int target);

// Mean signed gradient over n Gaussian perturbations of std sigma.
Tensor smoothgrad_signed(const LipNet& net, const Tensor& x, int target, int n, double sigma,
                         Rng& rng);

// Absolute value of the signed mean; sigma = 0 equals saliency exactly.
Attribution smoothgrad(const LipNet& net, const Tensor& x, int target, int n, double sigma, Rng& rng);

// (x - baseline) elementwise-times the mean path gradient (midpoint rule on n
// regular intervals). Satisfies completeness up to the quadrature gap.
Attribution integrated_gradients(const LipNet& net, const Tensor& x, int target,
                                 const Tensor& baseline, int n = 50);

// grad_x f_target(x) elementwise-times x.
Attribution gradient_input(const LipNet& net, const Tensor& x, int target);

struct CounterfactualPath {
    Tensor origin;
    Tensor direction;  // grad_x of the driving score at the origin
    Tensor endpoint;   // origin - t * f(origin) * direction (then optional clamp)
    double t = 1.0;
    double f_origin = 0.0;
    double residual = 0.0;  // driving score at the endpoint
    bool sign_flipped = false;
};

// x_delta = x - f(x) grad f(x); the driving score is scores[score_index]
// (binary head: index 0). Throws DegenerateGradientError when the gradient
// norm is below 1e-6.
CounterfactualPath boundary_point(const LipNet& net, const Tensor& x, int score_index = 0);

// x' = x - t f(x) grad f(x); clamp01 restricts the endpoint to [0,1] (image
// inputs). t = 1 reduces to boundary_point.
CounterfactualPath counterfactual(const LipNet& net, const Tensor& x, double t,
                                  bool clamp01 = false, int score_index = 0);

// Multiclass targeted step: the driving score is f_target - f_current with
// current = argmax at x.
CounterfactualPath counterfactual_targeted(const LipNet& net, const Tensor& x, double t, int target,
                                           bool clamp01 = false);

}  // namespace otnn::attr
