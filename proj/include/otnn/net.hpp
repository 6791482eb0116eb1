#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otnn/ortho.hpp"
#include "otnn/rng.hpp"
#include "otnn/tensor.hpp"

namespace otnn {

enum class LayerKind { SpectralDense, PlainDense, GroupSort2, Relu };

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct Layer {
    LayerKind kind;
    Tensor w;     // dense kinds: in x out, applied as y = x W + b
    Tensor b;     // dense kinds: out
    std::size_t width = 0;  // activation kinds
    Tensor power_vec;       // spectral_dense: persisted power-iteration start vector

    bool is_dense() const { return kind == LayerKind::SpectralDense || kind == LayerKind::PlainDense; }
    std::size_t in_dim() const { return is_dense() ? w.rows() : width; }
    std::size_t out_dim() const { return is_dense() ? w.cols() : width; }

    static Layer spectral_dense(Tensor w, Tensor b);
    static Layer plain_dense(Tensor w, Tensor b);
    static Layer groupsort2(std::size_t width);
    static Layer relu(std::size_t width);
};

// Feed-forward net. When every layer is 1-Lipschitz (spectral_dense after
// project(), groupsort2, relu) the composition is 1-Lipschitz per output
// coordinate.
struct LipNet {
    std::vector<Layer> layers;

    std::size_t in_dim() const;
    std::size_t out_dim() const;
    bool has_spectral_layers() const;

    void validate() const;  // adjacent widths match, groupsort widths even
};

// widths = {in, h1, ..., hk, out}. OTNN: spectral_dense + groupsort2 hidden
// blocks and a raw spectral_dense output (no final activation). Weights are
// scaled-uniform initialized from the rng and projected once.
LipNet make_otnn(const std::vector<std::size_t>& widths, Rng& rng,
                 const ProjectionOptions& proj = {});

// Same widths with plain_dense + relu and a raw affine output.
LipNet make_unconstrained(const std::vector<std::size_t>& widths, Rng& rng);

// ---------------------------------------------------------------------------
// Forward / reverse mode
// ---------------------------------------------------------------------------

// Activations recorded by forward_trace; backward consumes it. A trace is
// bound to the (net, input) pair it was produced from.
struct ForwardTrace {
    std::vector<Tensor> layer_inputs;  // input to layer i, batch x width
    Tensor output;                     // batch x q
    bool valid = false;
    bool single_sample = false;  // input came in rank-1
};

// x: rank-1 (single sample, length d) or rank-2 (batch x d).
Tensor forward(const LipNet& net, const Tensor& x);
ForwardTrace forward_trace(const LipNet& net, const Tensor& x);

struct Gradients {
    std::vector<Tensor> dw, db;  // aligned with net.layers; empty for activation layers
    Tensor dx;                   // shaped like the traced input
};

// Exact reverse-mode derivative of sum over the batch of seed_grad . f(x).
// seed_grad: rank-1 q for a single-sample trace, else batch x q.
// GroupSort2 routes gradients through the sorting permutation (equal pairs
// keep original order); relu subgradient at 0 is 0.
Gradients backward(const LipNet& net, const ForwardTrace& trace, const Tensor& seed_grad);

// Projects every spectral_dense weight onto the semi-orthogonal manifold.
// Idempotent within 1e-7 drift.
void project(LipNet& net, const ProjectionOptions& opts = {});

// ---------------------------------------------------------------------------
// Model file: UTF-8 JSON {format_version:1, layers:[...], out_dim}.
// Round-trips weights bit-exactly.
// ---------------------------------------------------------------------------

void save(const LipNet& net, const std::string& path);
LipNet load(const std::string& path);
std::string to_model_json(const LipNet& net);
LipNet from_model_json(const std::string& text);

}  // namespace otnn
