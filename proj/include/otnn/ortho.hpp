#pragma once

#include "otnn/rng.hpp"
#include "otnn/tensor.hpp"

namespace otnn {

// Largest singular value of a 2-D tensor, estimated by power iteration on
// W^T W. The estimate is the Rayleigh quotient of the iterate, so it is
// monotone non-decreasing in the iteration count for a fixed start vector.
double power_iteration(const Tensor& w, int iters, Rng& rng);

// Warm-started variant: v is the persisted start vector (length cols). An
// empty v is initialized from a fixed fallback inside; the updated iterate is
// written back so successive calls converge in very few steps.
double power_iteration(const Tensor& w, int iters, Tensor& v);

struct BjorckOptions {
    int iters = 15;
    double beta = 0.5;
    double tol = 1e-6;  // stop once ||QQ^T - I||_inf over the smaller dimension is below this
};

// One run of the first-order Bjorck scheme W <- (1+beta) W - beta W W^T W.
// The caller pre-scales so the spectral norm is below sqrt(3). The smaller
// dimension ends up orthonormal: columns for tall inputs, rows for wide ones.
// Stops early once the gram deviation reaches opts.tol.
Tensor bjorck_orthonormalize(const Tensor& w, const BjorckOptions& opts = {});
Tensor bjorck_orthonormalize(const Tensor& w, int iters, double beta = 0.5, double tol = 1e-6);

// ||G - I||_inf where G is the gram matrix over the smaller dimension.
double gram_deviation(const Tensor& w);

struct ProjectionOptions {
    int power_iters = 25;
    double guard = 1.001;  // pre-scale divisor margin, keeps the iteration inside its convergence region
    BjorckOptions bjorck;
    int max_rounds = 4;  // bjorck runs repeated until tol holds, up to iters*max_rounds total
};

// Full projection to the nearest semi-orthogonal matrix: power-iteration
// pre-scaling followed by Bjorck rounds until the gram deviation is within
// tol. Throws ConvergenceError if the budget is exhausted above tol.
Tensor orthonormal_project(const Tensor& w, Tensor& power_vec, const ProjectionOptions& opts = {});

}  // namespace otnn
