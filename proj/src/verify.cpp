#include "otnn/verify.hpp"

#include <algorithm>
#include <cmath>

#include "otnn/attribution.hpp"
#include "otnn/xaimetrics.hpp"

namespace otnn::verify {

namespace {

Stats stats_of(std::vector<double> v) {
    Stats s;
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    const auto pick = [&](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(v.size() - 1, lo + 1);
        const double frac = pos - static_cast<double>(lo);
        return v[lo] * (1.0 - frac) + v[hi] * frac;
    };
    s.p5 = pick(0.05);
    s.p95 = pick(0.95);
    return s;
}

}  // namespace

GeometryReport check_boundary(const LipNet& net, const data::Dataset& ds, double tau) {
    ds.validate();
    if (net.out_dim() != 1) throw DimensionError("check_boundary: needs a binary (q=1) net");

    const Tensor scores = forward(net, ds.inputs);
    double max_abs_f = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) max_abs_f = std::max(max_abs_f, std::fabs(scores.at(i, 0)));
    if (tau <= 0.0) tau = 0.1 * max_abs_f;

    GeometryReport rep;
    rep.tau = tau;
    rep.max_abs_f = max_abs_f;
    std::vector<double> grad_norms, residuals;
    std::size_t within = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Tensor x = ds.inputs.row_slice(i).reshaped({ds.meta.d});
        attr::CounterfactualPath path;
        try {
            path = attr::boundary_point(net, x);
        } catch (const DegenerateGradientError&) {
            ++rep.degenerate;
            continue;
        }
        grad_norms.push_back(l2_norm(path.direction));
        const double r = std::fabs(path.residual);
        residuals.push_back(r);
        if (r <= tau) ++within;
    }
    rep.samples = residuals.size();
    rep.grad_norm = stats_of(grad_norms);
    rep.residual = stats_of(residuals);
    rep.frac_residual_le_tau =
        rep.samples == 0 ? 0.0 : static_cast<double>(within) / static_cast<double>(rep.samples);
    return rep;
}

DiracOtReport check_dirac_ot(double a, double m, double lambda, const TrainConfig& tc) {
    if (a <= 0.0) throw DimensionError("check_dirac_ot: need a > 0 (disjoint Diracs)");
    if (!(m < 2.0 * a)) {
        throw DimensionError("check_dirac_ot: margin must satisfy m < 2a (class min distance)");
    }
    const data::Dataset ds = data::dirac_pair(a, std::max<std::size_t>(tc.batch_size / 2, 1));

    Rng rng(tc.seed);
    LipNet net = make_otnn({1, 16, 16, 1}, rng, tc.projection);

    LossSpec spec;
    spec.kind = LossKind::HkrBinary;
    spec.hkr.variant = HkrConfig::Variant::Binary;
    spec.hkr.lambda = lambda;
    spec.hkr.margin = m;

    TrainConfig cfg = tc;
    cfg.final_tight_projection = true;
    TrainResult res = train(std::move(net), ds, spec, cfg);

    DiracOtReport rep;
    rep.a = a;
    rep.margin = m;
    rep.lambda = lambda;
    rep.expected = -2.0 * a;
    rep.history = std::move(res.history);

    std::vector<int> pm(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) pm[i] = ds.labels[i] == 1 ? 1 : -1;
    rep.final_loss = hkr_binary(forward(res.net, ds.inputs), pm, spec.hkr).value;
    return rep;
}

CertificateReport check_certificate(const LipNet& net, const data::Dataset& ds, int attack_steps) {
    ds.validate();
    if (net.out_dim() != 1) throw DimensionError("check_certificate: needs a binary (q=1) net");

    CertificateReport rep;
    std::size_t passed = 0, tight = 0, evaluated = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Tensor x = ds.inputs.row_slice(i).reshaped({ds.meta.d});
        const Tensor grad = attr::input_gradient(net, x, 0);
        const double gnorm = l2_norm(grad);
        const double f0 = forward(net, x).at(0);
        if (gnorm < 1e-6) continue;

        Tensor dir = scale(grad, (f0 >= 0.0 ? -1.0 : 1.0) / gnorm);
        const xai::FlipSearch fs = xai::min_flip_distance(net, x, 0, dir, 1e4, attack_steps);
        ++evaluated;
        if (fs.censored) {
            ++rep.censored;
            ++passed;  // no flip found at all; the lower bound trivially holds
            continue;
        }
        if (fs.distance >= std::fabs(f0) - 1e-5) ++passed;
        if (fs.distance <= std::fabs(f0) * 1.05 + 0.01) ++tight;
    }
    rep.samples = evaluated;
    rep.pass_rate = evaluated == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(evaluated);
    rep.tight_rate = evaluated == 0 ? 0.0 : static_cast<double>(tight) / static_cast<double>(evaluated);
    return rep;
}

namespace {

// Linear interpolation of the level crossing between two grid nodes.
double lerp_cross(double a, double b, double level) {
    const double denom = b - a;
    if (denom == 0.0) return 0.5;
    double t = (level - a) / denom;
    return std::min(1.0, std::max(0.0, t));
}

}  // namespace

std::vector<Segment> level_set(const LipNet& net, const std::array<double, 4>& bbox, int resolution,
                               double level) {
    if (net.in_dim() != 2) throw DimensionError("level_set: needs a 2-D input net");
    if (resolution < 2) throw DimensionError("level_set: resolution must be >= 2");
    const double xmin = bbox[0], ymin = bbox[1], xmax = bbox[2], ymax = bbox[3];
    if (!(xmax > xmin) || !(ymax > ymin)) throw DimensionError("level_set: empty bbox");

    const std::size_t n = static_cast<std::size_t>(resolution);
    const double dx = (xmax - xmin) / static_cast<double>(n);
    const double dy = (ymax - ymin) / static_cast<double>(n);

    // Evaluate all (n+1)^2 nodes in one batched forward.
    Tensor nodes({(n + 1) * (n + 1), 2});
    for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i <= n; ++i) {
            nodes.at(j * (n + 1) + i, 0) = xmin + dx * static_cast<double>(i);
            nodes.at(j * (n + 1) + i, 1) = ymin + dy * static_cast<double>(j);
        }
    }
    const Tensor vals = forward(net, nodes);
    const auto value = [&](std::size_t i, std::size_t j) { return vals.at(j * (n + 1) + i, 0) - level; };

    std::vector<Segment> segments;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x0 = xmin + dx * static_cast<double>(i);
            const double y0 = ymin + dy * static_cast<double>(j);
            const double v00 = value(i, j);          // bottom-left
            const double v10 = value(i + 1, j);      // bottom-right
            const double v01 = value(i, j + 1);      // top-left
            const double v11 = value(i + 1, j + 1);  // top-right

            int c = 0;
            if (v00 > 0.0) c |= 1;
            if (v10 > 0.0) c |= 2;
            if (v11 > 0.0) c |= 4;
            if (v01 > 0.0) c |= 8;
            if (c == 0 || c == 15) continue;

            // Edge crossing points: bottom, right, top, left.
            const double bx = x0 + dx * lerp_cross(v00, v10, 0.0), by = y0;
            const double rx = x0 + dx, ry = y0 + dy * lerp_cross(v10, v11, 0.0);
            const double tx = x0 + dx * lerp_cross(v01, v11, 0.0), ty = y0 + dy;
            const double lx = x0, ly = y0 + dy * lerp_cross(v00, v01, 0.0);

            const auto emit = [&](double ax, double ay, double bx2, double by2) {
                segments.push_back({ax, ay, bx2, by2});
            };
            switch (c) {
                case 1: case 14: emit(lx, ly, bx, by); break;
                case 2: case 13: emit(bx, by, rx, ry); break;
                case 3: case 12: emit(lx, ly, rx, ry); break;
                case 4: case 11: emit(rx, ry, tx, ty); break;
                case 6: case 9:  emit(bx, by, tx, ty); break;
                case 7: case 8:  emit(lx, ly, tx, ty); break;
                case 5: case 10: {
                    // Saddle: resolve with the cell-center value.
                    Tensor center({1, 2});
                    center.at(0, 0) = x0 + 0.5 * dx;
                    center.at(0, 1) = y0 + 0.5 * dy;
                    const double vc = forward(net, center).at(0, 0) - level;
                    const bool center_pos = vc > 0.0;
                    if ((c == 5) == center_pos) {
                        emit(lx, ly, tx, ty);
                        emit(bx, by, rx, ry);
                    } else {
                        emit(lx, ly, bx, by);
                        emit(rx, ry, tx, ty);
                    }
                    break;
                }
                default: break;
            }
        }
    }
    return segments;
}

}  // namespace otnn::verify
