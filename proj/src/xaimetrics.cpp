#include "otnn/xaimetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include <zlib.h>

namespace otnn::xai {

const char* baseline_name(BaselineKind b) { return b == BaselineKind::Zero ? "zero" : "uniform"; }

const char* method_name(MethodKind m) {
    switch (m) {
        case MethodKind::Saliency: return "saliency";
        case MethodKind::Smoothgrad: return "smoothgrad";
        case MethodKind::IntegratedGradients: return "ig";
        case MethodKind::GradientInput: return "gradinput";
    }
    return "?";
}

MethodKind method_from_name(const std::string& name) {
    if (name == "saliency") return MethodKind::Saliency;
    if (name == "smoothgrad") return MethodKind::Smoothgrad;
    if (name == "ig") return MethodKind::IntegratedGradients;
    if (name == "gradinput") return MethodKind::GradientInput;
    throw ConfigError("unknown attribution method '" + name + "'");
}

std::vector<std::vector<std::size_t>> variable_groups(std::size_t d, const GridSpec& grid) {
    const bool image = grid.img_h > 0 && grid.img_w > 0;
    const std::size_t cells = static_cast<std::size_t>(grid.grid) * static_cast<std::size_t>(grid.grid);
    if (!image || grid.grid <= 0 || d <= cells) {
        std::vector<std::vector<std::size_t>> groups(d);
        for (std::size_t i = 0; i < d; ++i) groups[i] = {i};
        return groups;
    }
    if (grid.img_h * grid.img_w != d) throw DimensionError("variable_groups: image shape != d");
    const std::size_t g = static_cast<std::size_t>(grid.grid);
    std::vector<std::vector<std::size_t>> groups(g * g);
    for (std::size_t r = 0; r < grid.img_h; ++r) {
        const std::size_t cr = r * g / grid.img_h;
        for (std::size_t c = 0; c < grid.img_w; ++c) {
            const std::size_t cc = c * g / grid.img_w;
            groups[cr * g + cc].push_back(r * grid.img_w + c);
        }
    }
    // Images narrower than the grid leave empty cells behind; drop them.
    std::vector<std::vector<std::size_t>> out;
    out.reserve(groups.size());
    for (auto& grp : groups)
        if (!grp.empty()) out.push_back(std::move(grp));
    return out;
}

namespace {

void require_attr(const Tensor& x, const Tensor& attribution) {
    if (x.rank() != 1) throw DimensionError("metric: input must be a rank-1 sample");
    if (!attribution.same_shape(x)) throw DimensionError("metric: attribution shape != input shape");
}

double target_score(const LipNet& net, const Tensor& x, int target) {
    const Tensor scores = forward(net, x);
    if (target < 0 || static_cast<std::size_t>(target) >= scores.size()) {
        throw DimensionError("metric: target out of range");
    }
    return scores.at(static_cast<std::size_t>(target));
}

// Group order: descending aggregated attribution, ties by ascending index.
std::vector<std::size_t> group_order(const Tensor& attribution,
                                     const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<double> mass(groups.size(), 0.0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t i : groups[g]) mass[g] += attribution.at(i);
    }
    std::vector<std::size_t> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return mass[a] > mass[b]; });
    return order;
}

void apply_baseline(Tensor& x, const std::vector<std::size_t>& vars, BaselineKind kind, Rng& rng) {
    for (std::size_t i : vars) {
        x.at(i) = kind == BaselineKind::Zero ? 0.0 : rng.uniform01();
    }
}

std::vector<std::vector<std::size_t>> chunk_groups(const std::vector<std::size_t>& order, int steps) {
    const std::size_t n = order.size();
    const std::size_t s = std::min<std::size_t>(static_cast<std::size_t>(std::max(steps, 1)), n);
    std::vector<std::vector<std::size_t>> chunks(s);
    const std::size_t base = n / s, extra = n % s;
    std::size_t pos = 0;
    for (std::size_t c = 0; c < s; ++c) {
        const std::size_t len = base + (c < extra ? 1 : 0);
        chunks[c].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                         order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return chunks;
}

double trapezoid_auc(const std::vector<double>& xs, const std::vector<double>& ys) {
    double auc = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        auc += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    }
    return auc;
}

}  // namespace

double deletion_auc(const LipNet& net, const Tensor& x, int target, const Tensor& attribution,
                    const PerturbOptions& opts) {
    require_attr(x, attribution);
    const auto groups = variable_groups(x.size(), opts.grid);
    const auto order = group_order(attribution, groups);
    const auto chunks = chunk_groups(order, opts.steps);
    Rng rng(opts.seed);

    std::vector<double> fracs = {0.0};
    std::vector<double> scores = {target_score(net, x, target)};
    Tensor cur = x;
    std::size_t removed_vars = 0;
    for (const auto& chunk : chunks) {
        for (std::size_t g : chunk) {
            apply_baseline(cur, groups[g], opts.baseline, rng);
            removed_vars += groups[g].size();
        }
        fracs.push_back(static_cast<double>(removed_vars) / static_cast<double>(x.size()));
        scores.push_back(target_score(net, cur, target));
    }
    return trapezoid_auc(fracs, scores);
}

double insertion_auc(const LipNet& net, const Tensor& x, int target, const Tensor& attribution,
                     const PerturbOptions& opts) {
    require_attr(x, attribution);
    const auto groups = variable_groups(x.size(), opts.grid);
    const auto order = group_order(attribution, groups);
    const auto chunks = chunk_groups(order, opts.steps);
    Rng rng(opts.seed);

    Tensor cur({x.size()});
    if (opts.baseline == BaselineKind::Uniform) {
        for (std::size_t i = 0; i < cur.size(); ++i) cur.at(i) = rng.uniform01();
    }
    std::vector<double> fracs = {0.0};
    std::vector<double> scores = {target_score(net, cur, target)};
    std::size_t restored_vars = 0;
    for (const auto& chunk : chunks) {
        for (std::size_t g : chunk) {
            for (std::size_t i : groups[g]) cur.at(i) = x.at(i);
            restored_vars += groups[g].size();
        }
        fracs.push_back(static_cast<double>(restored_vars) / static_cast<double>(x.size()));
        scores.push_back(target_score(net, cur, target));
    }
    return trapezoid_auc(fracs, scores);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw DimensionError("pearson: need two equal series");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        throw UndefinedCorrelationError("pearson: zero variance series");
    }
    return sab / std::sqrt(saa * sbb);
}

double mu_fidelity(const LipNet& net, const Tensor& x, int target, const Tensor& attribution,
                   const MuFidelityOptions& opts) {
    require_attr(x, attribution);
    if (opts.n_subsets < 8) throw DimensionError("mu_fidelity: n_subsets must be >= 8");
    const auto groups = variable_groups(x.size(), opts.grid);
    const std::size_t n_groups = groups.size();
    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(opts.k_fraction * static_cast<double>(n_groups))));

    std::vector<double> mass(n_groups, 0.0);
    for (std::size_t g = 0; g < n_groups; ++g)
        for (std::size_t i : groups[g]) mass[g] += attribution.at(i);

    Rng rng(opts.seed);
    const double f0 = target_score(net, x, target);
    std::vector<double> attr_sums, drops;
    std::vector<std::size_t> pool(n_groups);
    for (int s = 0; s < opts.n_subsets; ++s) {
        // Partial Fisher-Yates: the first k entries form the subset.
        std::iota(pool.begin(), pool.end(), 0);
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t pick = j + rng.below(n_groups - j);
            std::swap(pool[j], pool[pick]);
        }
        Tensor xs = x;
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            sum += mass[pool[j]];
            apply_baseline(xs, groups[pool[j]], opts.baseline, rng);
        }
        attr_sums.push_back(sum);
        drops.push_back(f0 - target_score(net, xs, target));
    }
    return pearson(attr_sums, drops);
}

FlipSearch min_flip_distance(const LipNet& net, const Tensor& x, int score_index,
                             const Tensor& direction, double max_radius, int bisect_steps) {
    require_attr(x, direction);
    const double f0 = target_score(net, x, score_index);
    const auto flipped = [&](double r) {
        Tensor xr = x;
        axpy(r, direction, xr);
        const double f = target_score(net, xr, score_index);
        return (f >= 0.0) != (f0 >= 0.0);
    };

    double hi = 1e-6, lo = 0.0;
    while (!flipped(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > max_radius) return {max_radius, true};
    }
    for (int s = 0; s < bisect_steps; ++s) {
        const double mid = 0.5 * (lo + hi);
        if (flipped(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Final bracket midpoint: error <= initial bracket / 2^(steps+1).
    return {0.5 * (lo + hi), false};
}

RobustnessResult robustness_sr(const LipNet& net, const Tensor& x, int score_index,
                               const Tensor& attribution, const RobustnessOptions& opts) {
    require_attr(x, attribution);
    if (opts.fractions.empty()) throw DimensionError("robustness_sr: no fractions");
    const std::size_t d = x.size();
    const Tensor grad = attr::input_gradient(net, x, score_index);
    const double f0 = target_score(net, x, score_index);
    const double step_sign = f0 >= 0.0 ? -1.0 : 1.0;

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return attribution.at(a) > attribution.at(b); });

    RobustnessResult res;
    for (double frac : opts.fractions) {
        const std::size_t u = std::min<std::size_t>(
            d, std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(frac * d))));
        Tensor dir({d});
        for (std::size_t j = 0; j < u; ++j) dir.at(order[j]) = grad.at(order[j]);
        const double norm = l2_norm(dir);
        if (norm == 0.0) {
            res.distances.push_back(opts.max_radius);
            res.censored.push_back(true);
            continue;
        }
        for (std::size_t i = 0; i < d; ++i) dir.at(i) *= step_sign / norm;
        const FlipSearch fs = min_flip_distance(net, x, score_index, dir, opts.max_radius,
                                                opts.bisect_steps);
        res.distances.push_back(fs.distance);
        res.censored.push_back(fs.censored);
    }
    std::vector<double> xs = opts.fractions;
    res.auc = trapezoid_auc(xs, res.distances);
    if (xs.size() == 1) res.auc = res.distances[0];
    return res;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson(average_ranks(a), average_ranks(b));
}

namespace {

std::vector<double> tensor_values(const Tensor& t) {
    return {t.values().begin(), t.values().end()};
}

double explanation_distance(const Tensor& a, const Tensor& b, DistanceKind kind) {
    if (kind == DistanceKind::L2) return l2_distance(a, b);
    const std::vector<double> va = tensor_values(a), vb = tensor_values(b);
    if (va == vb) return 0.0;
    try {
        return 1.0 - spearman(va, vb);
    } catch (const UndefinedCorrelationError&) {
        return 1.0;  // one side constant, the other not: treat rho as 0
    }
}

Tensor explanation_at(const LipNet& net, const Tensor& x, int target, MethodKind method,
                      const StabilityOptions& opts, Rng& rng) {
    switch (method) {
        case MethodKind::Saliency:
            return attr::saliency(net, x, target).values;
        case MethodKind::Smoothgrad: {
            Rng local = rng.split();
            return attr::smoothgrad(net, x, target, opts.smoothgrad_n, opts.smoothgrad_sigma, local)
                .values;
        }
        case MethodKind::IntegratedGradients:
            return attr::integrated_gradients(net, x, target, Tensor({x.size()}), opts.ig_n).values;
        case MethodKind::GradientInput:
            return attr::gradient_input(net, x, target).values;
    }
    throw StateError("explanation_at: unreachable");
}

}  // namespace

double stability(const LipNet& net, const Tensor& x, int target, MethodKind method,
                 const StabilityOptions& opts) {
    if (x.rank() != 1) throw DimensionError("stability: input must be a rank-1 sample");
    if (opts.n_neighbors < 2) throw DimensionError("stability: n_neighbors must be >= 2");
    Rng rng(opts.seed);
    const Tensor base = explanation_at(net, x, target, method, opts, rng);
    const std::size_t d = x.size();
    double total = 0.0;
    for (int s = 0; s < opts.n_neighbors; ++s) {
        // Uniform in the L2 ball: normalized normal direction, radius ~ R u^(1/d).
        Tensor dir({d});
        for (std::size_t i = 0; i < d; ++i) dir.at(i) = rng.normal();
        const double norm = l2_norm(dir);
        const double rad =
            opts.radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
        Tensor xn = x;
        if (norm > 0.0) axpy(rad / norm, dir, xn);
        const Tensor expl = explanation_at(net, xn, target, method, opts, rng);
        total += explanation_distance(base, expl, opts.distance);
    }
    return total / static_cast<double>(opts.n_neighbors);
}

std::size_t complexity(const Tensor& attribution) {
    if (attribution.size() == 0) throw DimensionError("complexity: empty attribution");
    double lo = attribution.at(0), hi = attribution.at(0);
    for (std::size_t i = 0; i < attribution.size(); ++i) {
        lo = std::min(lo, attribution.at(i));
        hi = std::max(hi, attribution.at(i));
    }
    std::vector<unsigned char> bytes(attribution.size(), 0);
    if (hi > lo) {
        for (std::size_t i = 0; i < attribution.size(); ++i) {
            bytes[i] = static_cast<unsigned char>(
                std::lround(255.0 * (attribution.at(i) - lo) / (hi - lo)));
        }
    }
    uLongf out_len = compressBound(static_cast<uLong>(bytes.size()));
    std::vector<unsigned char> out(out_len);
    if (compress2(out.data(), &out_len, bytes.data(), static_cast<uLong>(bytes.size()), 6) != Z_OK) {
        throw NumericError("complexity: deflate failed");
    }
    return static_cast<std::size_t>(out_len);
}

double null_block_fraction(const Tensor& attribution, const Tensor& null_mask, double k_percent) {
    if (!attribution.same_shape(null_mask)) {
        throw DimensionError("null_block_fraction: mask shape mismatch");
    }
    const std::size_t d = attribution.size();
    const std::size_t k = static_cast<std::size_t>(std::floor(d * k_percent / 100.0));
    if (k == 0) throw ArityError("null_block_fraction: k selects zero pixels");
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return attribution.at(a) > attribution.at(b); });
    std::size_t inside = 0;
    for (std::size_t j = 0; j < k; ++j) {
        if (null_mask.at(order[j]) != 0.0) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(k);
}

}  // namespace otnn::xai
