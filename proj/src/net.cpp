#include "otnn/net.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace otnn {

using nlohmann::json;

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::SpectralDense: return "spectral_dense";
        case LayerKind::PlainDense: return "plain_dense";
        case LayerKind::GroupSort2: return "groupsort2";
        case LayerKind::Relu: return "relu";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "spectral_dense") return LayerKind::SpectralDense;
    if (name == "plain_dense") return LayerKind::PlainDense;
    if (name == "groupsort2") return LayerKind::GroupSort2;
    if (name == "relu") return LayerKind::Relu;
    throw ParseError("unknown layer kind '" + name + "'");
}

Layer Layer::spectral_dense(Tensor w, Tensor b) {
    Layer l;
    l.kind = LayerKind::SpectralDense;
    if (w.rank() != 2) throw DimensionError("spectral_dense: weight must be 2-D");
    if (b.size() != w.cols()) throw DimensionError("spectral_dense: bias width mismatch");
    l.w = std::move(w);
    l.b = std::move(b);
    return l;
}

Layer Layer::plain_dense(Tensor w, Tensor b) {
    Layer l;
    l.kind = LayerKind::PlainDense;
    if (w.rank() != 2) throw DimensionError("plain_dense: weight must be 2-D");
    if (b.size() != w.cols()) throw DimensionError("plain_dense: bias width mismatch");
    l.w = std::move(w);
    l.b = std::move(b);
    return l;
}

Layer Layer::groupsort2(std::size_t width) {
    if (width % 2 != 0) throw DimensionError("groupsort2: width must be even");
    Layer l;
    l.kind = LayerKind::GroupSort2;
    l.width = width;
    return l;
}

Layer Layer::relu(std::size_t width) {
    Layer l;
    l.kind = LayerKind::Relu;
    l.width = width;
    return l;
}

std::size_t LipNet::in_dim() const {
    if (layers.empty()) throw DimensionError("LipNet: empty net");
    return layers.front().in_dim();
}

std::size_t LipNet::out_dim() const {
    if (layers.empty()) throw DimensionError("LipNet: empty net");
    return layers.back().out_dim();
}

bool LipNet::has_spectral_layers() const {
    for (const auto& l : layers)
        if (l.kind == LayerKind::SpectralDense) return true;
    return false;
}

void LipNet::validate() const {
    if (layers.empty()) throw DimensionError("LipNet: empty net");
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
        if (layers[i].out_dim() != layers[i + 1].in_dim()) {
            throw DimensionError("LipNet: width mismatch between layers " + std::to_string(i) +
                                 " and " + std::to_string(i + 1));
        }
    }
    for (const auto& l : layers) {
        if (l.kind == LayerKind::GroupSort2 && l.width % 2 != 0) {
            throw DimensionError("LipNet: groupsort2 width must be even");
        }
    }
}

namespace {

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w({fan_in, fan_out});
    for (std::size_t i = 0; i < w.size(); ++i) w.at(i) = rng.uniform(-limit, limit);
    return w;
}

}  // namespace

LipNet make_otnn(const std::vector<std::size_t>& widths, Rng& rng, const ProjectionOptions& proj) {
    if (widths.size() < 2) throw DimensionError("make_otnn: need at least input and output widths");
    LipNet net;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        net.layers.push_back(
            Layer::spectral_dense(glorot_uniform(widths[i], widths[i + 1], rng), Tensor({widths[i + 1]})));
        const bool last = (i + 2 == widths.size());
        if (!last) net.layers.push_back(Layer::groupsort2(widths[i + 1]));
    }
    net.validate();
    project(net, proj);
    return net;
}

LipNet make_unconstrained(const std::vector<std::size_t>& widths, Rng& rng) {
    if (widths.size() < 2) throw DimensionError("make_unconstrained: need at least input and output widths");
    LipNet net;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        net.layers.push_back(
            Layer::plain_dense(glorot_uniform(widths[i], widths[i + 1], rng), Tensor({widths[i + 1]})));
        const bool last = (i + 2 == widths.size());
        if (!last) net.layers.push_back(Layer::relu(widths[i + 1]));
    }
    net.validate();
    return net;
}

// ---------------------------------------------------------------------------
// forward / backward
// ---------------------------------------------------------------------------

namespace {

Tensor as_batch(const Tensor& x, bool& was_single) {
    if (x.rank() == 1) {
        was_single = true;
        return x.reshaped({1, x.size()});
    }
    if (x.rank() == 2) {
        was_single = false;
        return x;
    }
    throw DimensionError("forward: input must be rank-1 or rank-2");
}

Tensor apply_layer(const Layer& l, const Tensor& x) {
    switch (l.kind) {
        case LayerKind::SpectralDense:
        case LayerKind::PlainDense:
            return add_rowwise(matmul(x, l.w), l.b);
        case LayerKind::GroupSort2: {
            Tensor y = x;
            const std::size_t n = y.rows(), w = y.cols();
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j + 1 < w; j += 2) {
                    double a = y.at(i, j), b = y.at(i, j + 1);
                    if (a > b) {
                        y.at(i, j) = b;
                        y.at(i, j + 1) = a;
                    }
                }
            }
            return y;
        }
        case LayerKind::Relu: {
            Tensor y = x;
            for (std::size_t i = 0; i < y.size(); ++i) y.at(i) = y.at(i) > 0.0 ? y.at(i) : 0.0;
            return y;
        }
    }
    throw StateError("apply_layer: unreachable");
}

}  // namespace

ForwardTrace forward_trace(const LipNet& net, const Tensor& x) {
    net.validate();
    ForwardTrace t;
    Tensor cur = as_batch(x, t.single_sample);
    if (cur.cols() != net.in_dim()) {
        throw DimensionError("forward: input width " + std::to_string(cur.cols()) + " != net input " +
                             std::to_string(net.in_dim()));
    }
    t.layer_inputs.reserve(net.layers.size());
    for (const auto& l : net.layers) {
        t.layer_inputs.push_back(cur);
        cur = apply_layer(l, cur);
    }
    t.output = std::move(cur);
    t.valid = true;
    return t;
}

Tensor forward(const LipNet& net, const Tensor& x) {
    bool single = false;
    Tensor cur = as_batch(x, single);
    net.validate();
    if (cur.cols() != net.in_dim()) {
        throw DimensionError("forward: input width " + std::to_string(cur.cols()) + " != net input " +
                             std::to_string(net.in_dim()));
    }
    for (const auto& l : net.layers) cur = apply_layer(l, cur);
    if (single) return cur.reshaped({cur.cols()});
    return cur;
}

Gradients backward(const LipNet& net, const ForwardTrace& trace, const Tensor& seed_grad) {
    if (!trace.valid) throw StateError("backward: no cached forward trace for this input");
    if (trace.layer_inputs.size() != net.layers.size()) {
        throw StateError("backward: trace does not match this net");
    }
    Tensor seed = seed_grad.rank() == 1 ? seed_grad.reshaped({1, seed_grad.size()}) : seed_grad;
    if (!seed.same_shape(trace.output)) {
        throw DimensionError("backward: seed gradient shape does not match traced output");
    }

    Gradients g;
    g.dw.resize(net.layers.size());
    g.db.resize(net.layers.size());

    Tensor dy = seed;
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const Layer& l = net.layers[li];
        const Tensor& xin = trace.layer_inputs[li];
        switch (l.kind) {
            case LayerKind::SpectralDense:
            case LayerKind::PlainDense: {
                g.dw[li] = matmul(transpose(xin), dy);
                Tensor db({l.w.cols()});
                for (std::size_t i = 0; i < dy.rows(); ++i)
                    for (std::size_t j = 0; j < dy.cols(); ++j) db.at(j) += dy.at(i, j);
                g.db[li] = std::move(db);
                dy = matmul(dy, transpose(l.w));
                break;
            }
            case LayerKind::GroupSort2: {
                Tensor dx({xin.rows(), xin.cols()});
                for (std::size_t i = 0; i < xin.rows(); ++i) {
                    for (std::size_t j = 0; j + 1 < xin.cols(); j += 2) {
                        const double a = xin.at(i, j), b = xin.at(i, j + 1);
                        // out = (min, max); ties keep original order.
                        if (a > b) {
                            dx.at(i, j) = dy.at(i, j + 1);
                            dx.at(i, j + 1) = dy.at(i, j);
                        } else {
                            dx.at(i, j) = dy.at(i, j);
                            dx.at(i, j + 1) = dy.at(i, j + 1);
                        }
                    }
                }
                dy = std::move(dx);
                break;
            }
            case LayerKind::Relu: {
                Tensor dx = dy;
                for (std::size_t i = 0; i < xin.size(); ++i) {
                    if (!(xin.at(i) > 0.0)) dx.at(i) = 0.0;  // subgradient 0 at exactly 0
                }
                dy = std::move(dx);
                break;
            }
        }
    }
    g.dx = trace.single_sample ? dy.reshaped({dy.cols()}) : dy;
    return g;
}

void project(LipNet& net, const ProjectionOptions& opts) {
    for (auto& l : net.layers) {
        if (l.kind == LayerKind::SpectralDense) {
            l.w = orthonormal_project(l.w, l.power_vec, opts);
        }
    }
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

std::string to_model_json(const LipNet& net) {
    net.validate();
    json j;
    j["format_version"] = 1;
    j["out_dim"] = net.out_dim();
    json layers = json::array();
    for (const auto& l : net.layers) {
        json jl;
        jl["kind"] = layer_kind_name(l.kind);
        jl["in"] = l.in_dim();
        jl["out"] = l.out_dim();
        if (l.is_dense()) {
            jl["w"] = l.w.values();
            jl["b"] = l.b.values();
        }
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j.dump(2) + "\n";
}

LipNet from_model_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: malformed JSON: ") + e.what());
    }
    if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
        throw VersionError("model file: missing format_version");
    }
    if (j["format_version"].get<int>() != 1) {
        throw VersionError("model file: unsupported format_version " +
                           std::to_string(j["format_version"].get<int>()));
    }
    if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty()) {
        throw ParseError("model file: missing layers");
    }
    LipNet net;
    try {
        for (const auto& jl : j["layers"]) {
            const LayerKind kind = layer_kind_from_name(jl.at("kind").get<std::string>());
            const std::size_t in = jl.at("in").get<std::size_t>();
            const std::size_t out = jl.at("out").get<std::size_t>();
            if (kind == LayerKind::SpectralDense || kind == LayerKind::PlainDense) {
                std::vector<double> w = jl.at("w").get<std::vector<double>>();
                std::vector<double> b = jl.at("b").get<std::vector<double>>();
                if (w.size() != in * out) {
                    throw DimensionError("model file: weight array has " + std::to_string(w.size()) +
                                         " values, expected " + std::to_string(in * out));
                }
                if (b.size() != out) {
                    throw DimensionError("model file: bias array has wrong length");
                }
                Tensor wt = Tensor::from({in, out}, std::move(w));
                Tensor bt = Tensor::from({out}, std::move(b));
                net.layers.push_back(kind == LayerKind::SpectralDense
                                         ? Layer::spectral_dense(std::move(wt), std::move(bt))
                                         : Layer::plain_dense(std::move(wt), std::move(bt)));
            } else {
                if (in != out) throw DimensionError("model file: activation layer with in != out");
                net.layers.push_back(kind == LayerKind::GroupSort2 ? Layer::groupsort2(in)
                                                                   : Layer::relu(in));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    net.validate();
    if (j.contains("out_dim") && j["out_dim"].get<std::size_t>() != net.out_dim()) {
        throw DimensionError("model file: out_dim does not match last layer");
    }
    return net;
}

void save(const LipNet& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save: cannot open " + path);
    out << to_model_json(net);
    if (!out) throw IoError("save: write failed for " + path);
}

LipNet load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_model_json(ss.str());
}

}  // namespace otnn
