#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dynframe/graph.hpp"
#include "dynframe/rng.hpp"

using namespace dynframe;

TEST_CASE("forward arithmetic basics") {
    Graph g;
    NodeId x = g.input("x", Tensor::scalar(2.0));
    NodeId y = g.input("y", Tensor::scalar(3.0));
    NodeId p = g.mul(x, y);
    CHECK(g.value(p).data[0] == doctest::Approx(6.0));

    NodeId sm = g.softmax(g.constant(Tensor::row({0, 0, 0})));
    for (int k = 0; k < 3; ++k)
        CHECK(double(g.value(sm).data[size_t(k)]) == doctest::Approx(1.0 / 3.0));

    // exp(-r^2 / 2 sigma^2) at r = 0
    NodeId r = g.constant(Tensor::scalar(0.0));
    NodeId decay = g.exp(g.scale_shift(g.mul(r, r), -0.5 / (1.2 * 1.2), 0.0));
    CHECK(double(g.value(decay).data[0]) == doctest::Approx(1.0));
}

TEST_CASE("repeated evaluation is bit-identical") {
    Graph g;
    g.input("x", Tensor::row({0.3, -1.7, 2.9}));
    NodeId y = g.sum(g.softmax(g.exp(g.input_id("x"))));
    g.mark_output("y", y);
    auto a = g.evaluate({{"x", Tensor::row({0.5, 0.25, -3.0})}});
    auto b = g.evaluate({{"x", Tensor::row({0.5, 0.25, -3.0})}});
    CHECK(a.at("y").data == b.at("y").data);
}

TEST_CASE("gradient of x^2") {
    Graph g;
    NodeId x = g.input("x", Tensor::scalar(3.0));
    NodeId y = g.mul(x, x);
    g.backward(y);
    CHECK(double(g.grad(x).data[0]) == doctest::Approx(6.0));
}

TEST_CASE("stop gradient semantics") {
    Graph g;
    NodeId x = g.input("x", Tensor::scalar(3.0));
    NodeId y = g.mul(g.stop_gradient(x), x);
    CHECK(double(g.value(y).data[0]) == doctest::Approx(9.0));
    g.backward(y);
    CHECK(double(g.grad(x).data[0]) == doctest::Approx(3.0));  // not 6

    // forward value of stopgrad is the identity
    Graph g2;
    NodeId a = g2.input("a", Tensor::scalar(5.0));
    CHECK(double(g2.value(g2.stop_gradient(a)).data[0]) == doctest::Approx(5.0));
}

TEST_CASE("stop gradient leaves every forward value unchanged") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor t = Tensor::zeros({2, 3});
        for (auto& v : t.data) v = real(rng.uniform(-2, 2));
        Graph g1, g2;
        NodeId a1 = g1.input("a", t);
        NodeId a2 = g2.input("a", t);
        NodeId y1 = g1.sum(g1.softmax(g1.mul(a1, a1)));
        NodeId y2 = g2.sum(g2.softmax(g2.stop_gradient(g2.mul(a2, a2))));
        CHECK(g1.value(y1).data == g2.value(y2).data);
        g2.backward(y2);
        auto ga = g2.input_gradients({"a"}).at("a");
        for (real v : ga.data) CHECK(double(v) == 0.0);
        (void)a1;
        (void)a2;
    }
}

TEST_CASE("softmax jacobian rows sum to zero") {
    // d/dx_j sum_i softmax_i = 0 for each j
    Graph g;
    NodeId x = g.input("x", Tensor::row({0.2, -0.4, 1.3, 0.0}));
    NodeId y = g.sum(g.softmax(x));
    g.backward(y);
    for (real v : g.grad(x).data) CHECK(std::abs(double(v)) < 1e-14);
}

TEST_CASE("gradient errors") {
    Graph g;
    NodeId x = g.input("x", Tensor::scalar(1.0));
    NodeId y = g.mul(x, x);
    g.backward(y);
    CHECK_THROWS_AS((void)g.input_gradients({"missing"}), NumericError);
    CHECK_THROWS_AS((void)g.matmul(x, g.constant(Tensor::zeros({2, 2}))), NumericError);
}

TEST_CASE("finite difference on a quadratic graph") {
    Graph g;
    NodeId x = g.input("x", Tensor::row({1.5, -0.7, 0.2}));
    NodeId y = g.sum(g.mul(x, x));
    double err = g.finite_difference_check({"x"}, y, 1e-5);
    CHECK(err < 1e-8);
}

TEST_CASE("finite difference over the full op set") {
    // random graphs over add/mul/matmul/exp/softmax/norm/div/concat
    Rng rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        Graph g;
        Tensor a0 = Tensor::zeros({2, 3}), b0 = Tensor::zeros({2, 3}), m0 = Tensor::zeros({3, 2});
        for (auto& v : a0.data) v = real(rng.uniform(-1.5, 1.5));
        for (auto& v : b0.data) v = real(rng.uniform(0.5, 2.0));
        for (auto& v : m0.data) v = real(rng.uniform(-1.0, 1.0));
        NodeId a = g.input("a", a0);
        NodeId b = g.input("b", b0);
        NodeId m = g.input("m", m0);

        NodeId t = g.add(a, g.mul(a, b));
        switch (trial % 5) {
            case 0: t = g.exp(g.scale_shift(t, 0.3, 0.0)); break;
            case 1: t = g.softmax(t); break;
            case 2: t = g.div(t, b); break;
            case 3: t = g.concat({t, b}, 1); break;
            case 4: t = g.gelu(t); break;
        }
        NodeId mm = (g.value(t).cols() == 3) ? g.matmul(t, m) : t;
        Tensor mask = Tensor::zeros(g.value(mm).shape);
        for (auto& v : mask.data) v = real(rng.uniform(0.5, 1.5));
        NodeId y = g.add(g.norm(mm), g.sum(g.mul(mm, g.constant(mask))));
        double err = g.finite_difference_check({"a", "b", "m"}, y, 1e-5);
        CHECK(err < 1e-6);
    }
}

TEST_CASE("nonlinearity gradients at moderate inputs") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        Graph g;
        Tensor x0 = Tensor::zeros({1, 8});
        for (auto& v : x0.data) v = real(rng.uniform(-2.0, 2.0));
        NodeId x = g.input("x", x0);
        NodeId y = g.sum(g.add(g.sigmoid(x), g.gelu(x)));
        CHECK(g.finite_difference_check({"x"}, y, 1e-5) < 1e-6);
    }
}

TEST_CASE("finite difference over empty wrt set is vacuous") {
    Graph g;
    NodeId y = g.sum(g.constant(Tensor::row({1, 2})));
    CHECK(g.finite_difference_check({}, y, 1e-5) == 0.0);
}

TEST_CASE("gather, segment_sum, slice backward") {
    Rng rng(11);
    Graph g;
    Tensor a0 = Tensor::zeros({1, 6});
    for (auto& v : a0.data) v = real(rng.uniform(-1, 1));
    NodeId a = g.input("a", a0);
    NodeId ga = g.gather(a, {0, 2, 2, 5});
    NodeId seg = g.segment_sum(ga, {0, 1, 1, 0}, 2);
    NodeId sl = g.slice_cols(g.concat({seg, seg}, 1), 1, 2);
    NodeId y = g.norm(sl);
    CHECK(g.finite_difference_check({"a"}, y, 1e-6) < 1e-7);
}

TEST_CASE("bind rejects mismatched shapes") {
    Graph g;
    g.input("x", Tensor::scalar(1.0));
    CHECK_THROWS_AS(g.bind("x", Tensor::row({1.0, 2.0})), NumericError);
}

TEST_CASE("overflow raises a numeric error naming exp") {
    Graph g;
    g.input("x", Tensor::scalar(1.0));
    bool threw = false;
    try {
        (void)g.exp(g.scale_shift(g.input_id("x"), 10000.0, 0.0));
    } catch (const NumericError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("exp") != std::string::npos);
    }
    CHECK(threw);
}
