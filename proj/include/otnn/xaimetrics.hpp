#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otnn/attribution.hpp"
#include "otnn/net.hpp"

namespace otnn::xai {

enum class BaselineKind { Zero, Uniform };
enum class DistanceKind { L2, OneMinusSpearman };
enum class MethodKind { Saliency, Smoothgrad, IntegratedGradients, GradientInput };

const char* baseline_name(BaselineKind b);
const char* method_name(MethodKind m);
MethodKind method_from_name(const std::string& name);

// Image inputs are aggregated on a grid x grid cell mesh before ranking and
// removal (cell-level removal); toy inputs use native variables. Native is
// also used when the image has no more pixels than grid cells.
struct GridSpec {
    std::size_t img_h = 0;
    std::size_t img_w = 0;
    int grid = 20;
};

// Index groups (cells or single variables) for a d-wide input.
std::vector<std::vector<std::size_t>> variable_groups(std::size_t d, const GridSpec& grid);

struct PerturbOptions {
    BaselineKind baseline = BaselineKind::Zero;
    int steps = 20;
    std::uint64_t seed = 9001;  // uniform-baseline noise stream
    GridSpec grid;
};

// Trapezoidal AUC of f_target vs fraction of variables removed, most
// important first. Uniform baseline draws fresh seeded noise per chunk.
double deletion_auc(const LipNet& net, const Tensor& x, int target, const Tensor& attribution,
                    const PerturbOptions& opts);

// Mirror of deletion: start from the baseline state, restore the most
// important variables first; AUC higher is better.
double insertion_auc(const LipNet& net, const Tensor& x, int target, const Tensor& attribution,
                     const PerturbOptions& opts);

struct MuFidelityOptions {
    double k_fraction = 0.2;
    int n_subsets = 32;
    BaselineKind baseline = BaselineKind::Zero;
    std::uint64_t seed = 9002;
    GridSpec grid;
};

// Pearson correlation between the summed attribution of random variable
// subsets of size k and the score drop from baselining them. Throws
// UndefinedCorrelationError when either series has zero variance.
double mu_fidelity(const LipNet& net, const Tensor& x, int target, const Tensor& attribution,
                   const MuFidelityOptions& opts);

struct FlipSearch {
    double distance = 0.0;
    bool censored = false;  // no flip within max_radius
};

// Smallest radius r (up to bisection tolerance) with
// sign(f_idx(x + r dir)) != sign(f_idx(x)); dir must be unit length.
// Doubling bracket from 1e-6 then bisect_steps halvings.
FlipSearch min_flip_distance(const LipNet& net, const Tensor& x, int score_index,
                             const Tensor& direction, double max_radius, int bisect_steps);

struct RobustnessOptions {
    std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    int bisect_steps = 20;
    double max_radius = 1e4;
};

struct RobustnessResult {
    double auc = 0.0;
    std::vector<double> distances;  // per fraction
    std::vector<bool> censored;
};

// Minimal class-flipping perturbation restricted to the top-u attributed
// variables, per feature-budget fraction: restricted gradient direction plus
// bisection on the magnitude. AUC over fractions, lower is better.
RobustnessResult robustness_sr(const LipNet& net, const Tensor& x, int score_index,
                               const Tensor& attribution, const RobustnessOptions& opts);

struct StabilityOptions {
    double radius = 0.3;
    int n_neighbors = 8;
    DistanceKind distance = DistanceKind::OneMinusSpearman;
    int smoothgrad_n = 50;
    double smoothgrad_sigma = 0.2;
    int ig_n = 50;
    std::uint64_t seed = 9003;
};

// Mean distance between the explanation at x and explanations at uniform
// ball neighbors. Identical explanations give 0; when rank variance
// vanishes on one side only, the rank correlation is taken as 0.
double stability(const LipNet& net, const Tensor& x, int target, MethodKind method,
                 const StabilityOptions& opts);

// Pearson correlation; throws UndefinedCorrelationError on zero variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Average ranks (ties get the mean of their positions), 1-based.
std::vector<double> average_ranks(const std::vector<double>& v);

// Spearman rank correlation with average-rank ties; strict about zero rank
// variance (throws UndefinedCorrelationError).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Deflate-compressed size in bytes of the 8-bit quantized map; a lossless
// stand-in for the JPEG-size complexity proxy. Deterministic.
std::size_t complexity(const Tensor& attribution);

// Fraction of the top k-percent attributed pixels lying inside the null
// mask. Ties break by ascending pixel index. Throws ArityError when the
// percentage selects zero pixels.
double null_block_fraction(const Tensor& attribution, const Tensor& null_mask, double k_percent);

}  // namespace otnn::xai
