#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "otnn/errors.hpp"

namespace otnn {

// Dense row-major tensor of doubles. Values are treated as immutable once a
// tensor leaves a public operation; mutation is reserved for owners (training
// loop, builders).
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);

    static Tensor from(std::vector<std::size_t> shape, std::vector<double> data);
    static Tensor row(std::vector<double> values);                    // 1 x n
    static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);
    static Tensor vec(std::vector<double> values);                    // rank-1

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    // 2-D accessors; throw DimensionError when rank != 2.
    std::size_t rows() const;
    std::size_t cols() const;

    double& at(std::size_t i) { return data_[i]; }
    double at(std::size_t i) const { return data_[i]; }
    double& at(std::size_t i, std::size_t j) { return data_[i * cols_cached_ + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * cols_cached_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    Tensor reshaped(std::vector<std::size_t> shape) const;
    Tensor row_slice(std::size_t i) const;  // i-th row of a 2-D tensor as 1 x cols

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    // Throws NumericError if any entry is NaN or infinite.
    void check_finite(const char* where) const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
    std::size_t cols_cached_ = 0;  // shape_.back() for fast 2-D indexing

    void refresh_cache();
};

// ---------------------------------------------------------------------------
// Dense kernels. Deterministic row-major accumulation order.
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);

// y = a + row broadcast over every row of a 2-D tensor.
Tensor add_rowwise(const Tensor& a, const Tensor& row);

double dot(const Tensor& a, const Tensor& b);
double l2_norm(const Tensor& a);
double linf_norm(const Tensor& a);
double l2_distance(const Tensor& a, const Tensor& b);

// In-place axpy on the owner's side: y += alpha * x.
void axpy(double alpha, const Tensor& x, Tensor& y);

// Number of worker threads used by matmul for large products. Each output row
// is computed by exactly one thread, so results are bitwise identical for any
// thread count. Defaults to 1.
void set_matmul_threads(int n);
int matmul_threads();

}  // namespace otnn
