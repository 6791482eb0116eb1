#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracles {

using otnn::LipNet;
using otnn::Tensor;

JacobiEigen jacobi_eigen_sym(const Tensor& a, int max_sweeps, double tol) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("jacobi_eigen_sym: not square");
    Tensor m = a;
    Tensor v({n, n});
    for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += m.at(p, q) * m.at(p, q);
        if (std::sqrt(off) < tol) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double app = m.at(p, p), aqq = m.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m.at(k, p), mkq = m.at(k, q);
                    m.at(k, p) = c * mkp - s * mkq;
                    m.at(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m.at(p, k), mqk = m.at(q, k);
                    m.at(p, k) = c * mpk - s * mqk;
                    m.at(q, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v.at(k, p), vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    JacobiEigen out;
    out.values.resize(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = m.at(i, i);
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return m.at(x, x) < m.at(y, y); });
    JacobiEigen sorted;
    sorted.values.resize(n);
    sorted.vectors = Tensor({n, n});
    for (std::size_t j = 0; j < n; ++j) {
        sorted.values[j] = m.at(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) sorted.vectors.at(i, j) = v.at(i, order[j]);
    }
    return sorted;
}

std::vector<double> singular_values(const Tensor& w) {
    const bool tall = w.rows() >= w.cols();
    const Tensor g = tall ? otnn::matmul(otnn::transpose(w), w)
                          : otnn::matmul(w, otnn::transpose(w));
    JacobiEigen eig = jacobi_eigen_sym(g);
    std::vector<double> sv;
    for (auto it = eig.values.rbegin(); it != eig.values.rend(); ++it) {
        sv.push_back(std::sqrt(std::max(0.0, *it)));
    }
    return sv;
}

Tensor polar_factor(const Tensor& w) {
    const bool tall = w.rows() >= w.cols();
    const Tensor g = tall ? otnn::matmul(otnn::transpose(w), w)
                          : otnn::matmul(w, otnn::transpose(w));
    const JacobiEigen eig = jacobi_eigen_sym(g);
    const std::size_t n = g.rows();
    Tensor inv_sqrt({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        if (eig.values[i] <= 1e-14) throw std::invalid_argument("polar_factor: rank deficient");
    }
    // V diag(lambda^(-1/2)) V^T
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                s += eig.vectors.at(r, k) * eig.vectors.at(c, k) / std::sqrt(eig.values[k]);
            }
            inv_sqrt.at(r, c) = s;
        }
    }
    return tall ? otnn::matmul(w, inv_sqrt) : otnn::matmul(inv_sqrt, w);
}

double central_diff(const std::function<double(double)>& f, double x0, double h) {
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

namespace {

double seeded_output(const LipNet& net, const Tensor& x, const Tensor& seed) {
    const Tensor scores = otnn::forward(net, x);
    double s = 0.0;
    for (std::size_t k = 0; k < seed.size(); ++k) s += seed.at(k) * scores.at(k);
    return s;
}

}  // namespace

Tensor fd_input_gradient(const LipNet& net, const Tensor& x, const Tensor& seed, double h) {
    Tensor g({x.size()});
    Tensor xp = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = xp.at(i);
        xp.at(i) = keep + h;
        const double up = seeded_output(net, xp, seed);
        xp.at(i) = keep - h;
        const double dn = seeded_output(net, xp, seed);
        xp.at(i) = keep;
        g.at(i) = (up - dn) / (2.0 * h);
    }
    return g;
}

FdParamGrads fd_param_gradients(LipNet net, const Tensor& x, const Tensor& seed, double h) {
    FdParamGrads out;
    out.dw.resize(net.layers.size());
    out.db.resize(net.layers.size());
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        if (!net.layers[li].is_dense()) continue;
        Tensor dw(net.layers[li].w.shape());
        for (std::size_t i = 0; i < dw.size(); ++i) {
            const double keep = net.layers[li].w.at(i);
            net.layers[li].w.at(i) = keep + h;
            const double up = seeded_output(net, x, seed);
            net.layers[li].w.at(i) = keep - h;
            const double dn = seeded_output(net, x, seed);
            net.layers[li].w.at(i) = keep;
            dw.at(i) = (up - dn) / (2.0 * h);
        }
        out.dw[li] = std::move(dw);
        Tensor db(net.layers[li].b.shape());
        for (std::size_t i = 0; i < db.size(); ++i) {
            const double keep = net.layers[li].b.at(i);
            net.layers[li].b.at(i) = keep + h;
            const double up = seeded_output(net, x, seed);
            net.layers[li].b.at(i) = keep - h;
            const double dn = seeded_output(net, x, seed);
            net.layers[li].b.at(i) = keep;
            db.at(i) = (up - dn) / (2.0 * h);
        }
        out.db[li] = std::move(db);
    }
    return out;
}

double max_rel_err(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("max_rel_err: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({1.0, std::fabs(a.at(i)), std::fabs(b.at(i))});
        worst = std::max(worst, std::fabs(a.at(i) - b.at(i)) / denom);
    }
    return worst;
}

double spearman_bruteforce(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: bad sizes");
    const std::size_t n = a.size();
    const auto ranks = [n](const std::vector<double>& v) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t less = 0, equal = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (v[j] < v[i]) ++less;
                if (j != i && v[j] == v[i]) ++equal;
            }
            r[i] = 1.0 + static_cast<double>(less) + static_cast<double>(equal) / 2.0;
        }
        return r;
    };
    const std::vector<double> ra = ranks(a), rb = ranks(b);
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
        sab += (ra[i] - ma) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw std::invalid_argument("spearman: zero rank variance");
    return sab / std::sqrt(saa * sbb);
}

}  // namespace oracles
