#include "otnn/tensor.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

namespace otnn {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    return shape.empty() ? 0 : n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

std::atomic<int> g_matmul_threads{1};

}  // namespace

void Tensor::refresh_cache() { cols_cached_ = shape_.empty() ? 0 : shape_.back(); }

Tensor::Tensor(std::vector<std::size_t> shape, double fill) {
    for (std::size_t s : shape) {
        if (s == 0) throw DimensionError("Tensor: zero dimension in shape " + shape_str(shape));
    }
    shape_ = std::move(shape);
    data_.assign(shape_product(shape_), fill);
    refresh_cache();
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> data) {
    Tensor t;
    for (std::size_t s : shape) {
        if (s == 0) throw DimensionError("Tensor::from: zero dimension in shape " + shape_str(shape));
    }
    if (shape_product(shape) != data.size()) {
        throw DimensionError("Tensor::from: shape " + shape_str(shape) + " does not match " +
                             std::to_string(data.size()) + " values");
    }
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    t.refresh_cache();
    t.check_finite("Tensor::from");
    return t;
}

Tensor Tensor::row(std::vector<double> values) {
    const std::size_t n = values.size();
    return from({1, n}, std::move(values));
}

Tensor Tensor::vec(std::vector<double> values) {
    const std::size_t n = values.size();
    return from({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    return from({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw DimensionError("Tensor::rows: rank " + std::to_string(rank()) + " != 2");
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw DimensionError("Tensor::cols: rank " + std::to_string(rank()) + " != 2");
    return shape_[1];
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
    if (shape_product(shape) != size()) {
        throw DimensionError("Tensor::reshaped: new shape " + shape_str(shape) + " has wrong size");
    }
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    t.refresh_cache();
    return t;
}

Tensor Tensor::row_slice(std::size_t i) const {
    const std::size_t r = rows(), c = cols();
    if (i >= r) throw DimensionError("Tensor::row_slice: row index out of range");
    Tensor t({1, c});
    for (std::size_t j = 0; j < c; ++j) t.at(0, j) = at(i, j);
    return t;
}

void Tensor::check_finite(const char* where) const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(where) + ": non-finite entry");
        }
    }
}

void set_matmul_threads(int n) { g_matmul_threads.store(n < 1 ? 1 : n); }
int matmul_threads() { return g_matmul_threads.load(); }

namespace {

void matmul_rows(const Tensor& a, const Tensor& b, Tensor& out, std::size_t i0, std::size_t i1) {
    const std::size_t k = a.cols(), n = b.cols();
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = i0; i < i1; ++i) {
        double* orow = po + i * n;
        const double* arow = pa + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = pb + p * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) throw DimensionError("matmul: both operands must be 2-D");
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.rows()));
    }
    const std::size_t m = a.rows();
    Tensor out({m, b.cols()});
    const int nt = matmul_threads();
    if (nt <= 1 || m < 32) {
        matmul_rows(a, b, out, 0, m);
        return out;
    }
    const std::size_t threads = static_cast<std::size_t>(nt);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (m + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t i0 = t * chunk;
        const std::size_t i1 = std::min(m, i0 + chunk);
        if (i0 >= i1) break;
        pool.emplace_back([&, i0, i1] { matmul_rows(a, b, out, i0, i1); });
    }
    for (auto& th : pool) th.join();
    return out;
}

Tensor transpose(const Tensor& a) {
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) throw DimensionError(std::string(op) + ": shape mismatch");
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.at(i) += b.at(i);
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.at(i) -= b.at(i);
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.at(i) *= s;
    return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "hadamard");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.at(i) *= b.at(i);
    return out;
}

Tensor add_rowwise(const Tensor& a, const Tensor& row) {
    const std::size_t m = a.rows(), n = a.cols();
    if (row.size() != n) throw DimensionError("add_rowwise: row width mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) += row.at(j);
    return out;
}

double dot(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.at(i) * b.at(i);
    return s;
}

double l2_norm(const Tensor& a) { return std::sqrt(dot(a, a)); }

double linf_norm(const Tensor& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.at(i)));
    return m;
}

double l2_distance(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "l2_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.at(i) - b.at(i);
        s += d * d;
    }
    return std::sqrt(s);
}

void axpy(double alpha, const Tensor& x, Tensor& y) {
    require_same_shape(x, y, "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y.at(i) += alpha * x.at(i);
}

}  // namespace otnn
