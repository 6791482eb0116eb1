#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "otnn/data.hpp"
#include "otnn/net.hpp"
#include "otnn/optim.hpp"

namespace otnn::verify {

struct Stats {
    double mean = 0.0;
    double p5 = 0.0;
    double p95 = 0.0;
};

struct GeometryReport {
    Stats grad_norm;  // ||grad f(x)|| over samples
    Stats residual;   // |f(x_delta)|
    double frac_residual_le_tau = 0.0;
    double tau = 0.0;
    double max_abs_f = 0.0;
    std::size_t samples = 0;
    std::size_t degenerate = 0;  // skipped: gradient norm below 1e-6
};

// For each sample x: x_delta = x - f(x) grad f(x); records |f(x_delta)| and
// ||grad f(x)||, and the fraction of samples with residual <= tau.
// tau <= 0 selects the default 0.1 * max |f| over the dataset.
GeometryReport check_boundary(const LipNet& net, const data::Dataset& ds, double tau = -1.0);

struct DiracOtReport {
    double final_loss = 0.0;
    double expected = 0.0;  // -2a
    double a = 0.0;
    double margin = 0.0;
    double lambda = 0.0;
    TrainHistory history;
};

// Trains a small dense OTNN on dirac_pair(a) with binary hKR and reports the
// final loss against the closed-form transport optimum -2a. Requires the
// separation precondition m < 2a (margin below twice the class distance). The final loss is evaluated after a tight
// projection so the 1-Lipschitz dual-feasibility bound is meaningful.
DiracOtReport check_dirac_ot(double a, double m, double lambda, const TrainConfig& tc);

struct CertificateReport {
    double pass_rate = 0.0;       // flip distance >= |f(x)| - 1e-5
    double tight_rate = 0.0;      // flip distance <= |f(x)| * 1.05 + 0.01 (gradient attack tightness)
    std::size_t samples = 0;
    std::size_t censored = 0;     // no flip found within the search budget
};

// Bisection attack along the gradient direction at every sample; verifies the
// certificate lower bound |f(x)| and reports how tight the bound is.
CertificateReport check_certificate(const LipNet& net, const data::Dataset& ds,
                                    int attack_steps = 20);

struct Segment {
    double x0, y0, x1, y1;
};

// Marching-squares contour of f (2-D inputs) at the given level on a
// resolution x resolution cell grid over bbox = {xmin, ymin, xmax, ymax}.
// Saddle cells are split by the sign of the cell-center value.
std::vector<Segment> level_set(const LipNet& net, const std::array<double, 4>& bbox, int resolution,
                               double level = 0.0);

}  // namespace otnn::verify
