#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "oracles.hpp"
#include "otnn/net.hpp"

using namespace otnn;

namespace {

LipNet identity_net(std::size_t d) {
    Tensor w({d, d});
    for (std::size_t i = 0; i < d; ++i) w.at(i, i) = 1.0;
    LipNet net;
    net.layers.push_back(Layer::plain_dense(std::move(w), Tensor({d})));
    return net;
}

LipNet random_small_net(Rng& rng, std::size_t in, std::size_t hidden, std::size_t out,
                        bool with_relu = false) {
    LipNet net;
    auto dense = [&](std::size_t a, std::size_t b) {
        Tensor w({a, b});
        for (std::size_t i = 0; i < w.size(); ++i) w.at(i) = rng.normal() * 0.6;
        Tensor bias({b});
        for (std::size_t i = 0; i < b; ++i) bias.at(i) = rng.normal() * 0.1;
        return Layer::plain_dense(std::move(w), std::move(bias));
    };
    net.layers.push_back(dense(in, hidden));
    net.layers.push_back(with_relu ? Layer::relu(hidden) : Layer::groupsort2(hidden));
    net.layers.push_back(dense(hidden, out));
    return net;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("forward: identity network returns its input") {
    LipNet net = identity_net(3);
    Tensor x = Tensor::vec({0.5, -1.25, 2.0});
    Tensor y = forward(net, x);
    for (std::size_t i = 0; i < 3; ++i) CHECK(y.at(i) == x.at(i));
}

TEST_CASE("forward: groupsort2 sorts pairs") {
    LipNet net;
    net.layers.push_back(Layer::groupsort2(4));
    Tensor y = forward(net, Tensor::vec({3, 1, 2, 5}));
    CHECK(y.at(0) == 1.0);
    CHECK(y.at(1) == 3.0);
    CHECK(y.at(2) == 2.0);
    CHECK(y.at(3) == 5.0);
}

TEST_CASE("forward: hand-computed two-layer value") {
    // W1 = [[1, 2], [0, 1]], b1 = (1, -1); W2 = [[1, -1], [2, 0]], b2 = (0.5, 0)
    // x = (1, 1): h = x W1 + b1 = (2, 2); groupsort keeps (2, 2);
    // y = h W2 + b2 = (2*1 + 2*2 + 0.5, 2*(-1) + 0) = (6.5, -2).
    LipNet net;
    net.layers.push_back(Layer::plain_dense(Tensor::matrix(2, 2, {1, 2, 0, 1}), Tensor::vec({1, -1})));
    net.layers.push_back(Layer::groupsort2(2));
    net.layers.push_back(Layer::plain_dense(Tensor::matrix(2, 2, {1, -1, 2, 0}), Tensor::vec({0.5, 0})));
    Tensor y = forward(net, Tensor::vec({1, 1}));
    CHECK(y.at(0) == doctest::Approx(6.5));
    CHECK(y.at(1) == doctest::Approx(-2.0));
}

TEST_CASE("forward: width mismatch raises") {
    LipNet net = identity_net(3);
    CHECK_THROWS_AS(forward(net, Tensor::vec({1, 2})), DimensionError);
}

TEST_CASE("backward: linear net input gradient is the weight row") {
    LipNet net;
    net.layers.push_back(Layer::plain_dense(Tensor::matrix(3, 1, {2, -1, 0.5}), Tensor({1})));
    for (double xv : {0.0, 1.0, -3.0}) {
        Tensor x = Tensor::vec({xv, xv + 1, xv - 2});
        ForwardTrace trace = forward_trace(net, x);
        Gradients g = backward(net, trace, Tensor::vec({1}));
        CHECK(g.dx.at(0) == 2.0);
        CHECK(g.dx.at(1) == -1.0);
        CHECK(g.dx.at(2) == 0.5);
    }
}

TEST_CASE("backward: relu subgradient at exactly 0 is 0") {
    LipNet net;
    net.layers.push_back(Layer::relu(1));
    ForwardTrace trace = forward_trace(net, Tensor::vec({0.0}));
    Gradients g = backward(net, trace, Tensor::vec({1}));
    CHECK(g.dx.at(0) == 0.0);
}

TEST_CASE("backward: groupsort tie keeps original order") {
    LipNet net;
    net.layers.push_back(Layer::groupsort2(2));
    ForwardTrace trace = forward_trace(net, Tensor::vec({1.0, 1.0}));
    Gradients g = backward(net, trace, Tensor::vec({5.0, 7.0}));
    CHECK(g.dx.at(0) == 5.0);
    CHECK(g.dx.at(1) == 7.0);
}

TEST_CASE("backward: invalid trace raises a state error") {
    LipNet net = identity_net(2);
    ForwardTrace stale;  // never produced by forward_trace
    CHECK_THROWS_AS(backward(net, stale, Tensor::vec({1, 0})), StateError);
}

TEST_CASE("backward matches finite differences on random small nets") {
    Rng rng(2024);
    for (int trial = 0; trial < 6; ++trial) {
        LipNet net = random_small_net(rng, 4, 6, 2, trial % 2 == 0);
        Tensor x = Tensor::vec({rng.normal(), rng.normal(), rng.normal(), rng.normal()});
        Tensor seed = Tensor::vec({rng.normal(), rng.normal()});

        ForwardTrace trace = forward_trace(net, x);
        Gradients g = backward(net, trace, seed);

        CHECK(oracles::max_rel_err(g.dx, oracles::fd_input_gradient(net, x, seed)) < 1e-4);
        const auto fd = oracles::fd_param_gradients(net, x, seed);
        for (std::size_t li = 0; li < net.layers.size(); ++li) {
            if (!net.layers[li].is_dense()) continue;
            CHECK(oracles::max_rel_err(g.dw[li], fd.dw[li]) < 1e-4);
            CHECK(oracles::max_rel_err(g.db[li], fd.db[li]) < 1e-4);
        }
    }
}

TEST_CASE("project: orthogonal weights unchanged within 1e-7") {
    LipNet net;
    net.layers.push_back(Layer::spectral_dense(Tensor::matrix(2, 2, {0, 1, 1, 0}), Tensor({2})));
    LipNet copy = net;
    project(net);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(net.layers[0].w.at(i) == doctest::Approx(copy.layers[0].w.at(i)).epsilon(1e-7));
    }
    // idempotence
    LipNet again = net;
    project(again);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(again.layers[0].w.at(i) == doctest::Approx(net.layers[0].w.at(i)).epsilon(1e-7));
    }
}

TEST_CASE("project: x5 scaled weights come back with unit spectral norm") {
    Rng rng(8);
    Tensor w({5, 3});
    for (std::size_t i = 0; i < w.size(); ++i) w.at(i) = rng.normal();
    LipNet net;
    net.layers.push_back(Layer::spectral_dense(scale(w, 5.0), Tensor({3})));
    project(net);
    const auto sv = oracles::singular_values(net.layers[0].w);
    for (std::size_t i = 0; i < 3; ++i) CHECK(sv[i] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("project: 4x3 random weight equals the Jacobi polar oracle") {
    Rng rng(31);
    Tensor w({4, 3});
    for (std::size_t i = 0; i < w.size(); ++i) w.at(i) = rng.normal();
    LipNet net;
    net.layers.push_back(Layer::spectral_dense(w, Tensor({3})));
    ProjectionOptions tight;
    tight.bjorck.tol = 1e-10;
    tight.bjorck.iters = 40;
    project(net, tight);
    Tensor u = oracles::polar_factor(w);
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(net.layers[0].w.at(i) == doctest::Approx(u.at(i)).epsilon(1e-6));
    }
}

TEST_CASE("groupsort2 preserves the L2 norm exactly (it is a permutation)") {
    Rng rng(77);
    LipNet net;
    net.layers.push_back(Layer::groupsort2(8));
    for (int trial = 0; trial < 50; ++trial) {
        Tensor x({8});
        for (std::size_t i = 0; i < 8; ++i) x.at(i) = rng.normal();
        const Tensor y = forward(net, x);
        // each output pair is exactly the input pair, reordered
        double sum_x = 0.0, sum_y = 0.0;  // fixed per-pair accumulation order
        for (std::size_t j = 0; j < 8; j += 2) {
            CHECK(std::min(x.at(j), x.at(j + 1)) == y.at(j));
            CHECK(std::max(x.at(j), x.at(j + 1)) == y.at(j + 1));
            sum_x += x.at(j) * x.at(j) + x.at(j + 1) * x.at(j + 1);
            sum_y += y.at(j) * y.at(j) + y.at(j + 1) * y.at(j + 1);
        }
        CHECK(sum_x == sum_y);
    }
}

TEST_CASE("lipschitz property: 1000 random pairs after project()") {
    Rng rng(3001);
    LipNet net = make_otnn({4, 8, 8, 1}, rng);
    int violations = 0;
    for (int k = 0; k < 1000; ++k) {
        Tensor x({4}), z({4});
        for (std::size_t i = 0; i < 4; ++i) {
            x.at(i) = rng.uniform(-2, 2);
            z.at(i) = rng.uniform(-2, 2);
        }
        const double lhs = std::fabs(forward(net, x).at(0) - forward(net, z).at(0));
        const double rhs = l2_distance(x, z) * (1.0 + 1e-6);
        if (lhs > rhs) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("save/load round trip is byte identical") {
    Rng rng(55);
    LipNet net = make_otnn({3, 4, 2}, rng);
    const std::string p1 = "/tmp/otnn_model_a.json", p2 = "/tmp/otnn_model_b.json";
    save(net, p1);
    LipNet loaded = load(p1);
    save(loaded, p2);
    CHECK(read_file(p1) == read_file(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("load: distinct errors for version, malformed json, bad shapes") {
    CHECK_THROWS_AS(from_model_json("{\"format_version\": 2, \"layers\": []}"), VersionError);
    CHECK_THROWS_AS(from_model_json("{nope"), ParseError);
    CHECK_THROWS_AS(from_model_json("{\"format_version\": 1}"), ParseError);
    // truncated weight array: 2x2 layer with 3 weights
    const char* bad_shape =
        "{\"format_version\":1,\"out_dim\":2,\"layers\":[{\"kind\":\"plain_dense\",\"in\":2,"
        "\"out\":2,\"w\":[1,2,3],\"b\":[0,0]}]}";
    CHECK_THROWS_AS(from_model_json(bad_shape), DimensionError);
    const char* bad_kind =
        "{\"format_version\":1,\"out_dim\":1,\"layers\":[{\"kind\":\"conv\",\"in\":1,\"out\":1,"
        "\"w\":[1],\"b\":[0]}]}";
    CHECK_THROWS_AS(from_model_json(bad_kind), ParseError);
}

TEST_CASE("groupsort2 requires even width") {
    CHECK_THROWS_AS(Layer::groupsort2(5), DimensionError);
}
