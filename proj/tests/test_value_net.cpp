#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <sstream>

#include "cbfrl/value_net.hpp"
#include "support/finite_diff.hpp"

using namespace cbfrl;
using testsupport::max_gradient_mismatch;

namespace {

ValueNet zero_net(const std::vector<int>& sizes, Head head, double gamma) {
    RngStream rng(0, "zero");
    ValueNet net = make_value_net(sizes, head, gamma, rng);
    for (auto& w : net.weights) w.setZero();
    for (auto& b : net.biases) b.setZero();
    return net;
}

} // namespace

TEST_CASE("bounded head pins the value scale") {
    ValueNet net = zero_net({4, 8, 2}, Head::kBounded, 0.99);

    SUBCASE("zero logit sits at the midpoint") {
        const auto out = forward(net, {0.3, -0.2, 0.05, 1.0});
        for (const auto& av : out) {
            CHECK(av.logit == 0.0);
            CHECK(av.q == doctest::Approx(50.0));
        }
        CHECK(value_of(net, {0.3, -0.2, 0.05, 1.0}) == doctest::Approx(50.0));
    }

    SUBCASE("saturated logits stay strictly inside the range") {
        net.biases[1](0) = 1000.0;   // clamped to +30
        net.biases[1](1) = -1000.0;  // clamped to -30
        const auto out = forward(net, {0, 0, 0, 0});
        CHECK(out[0].logit == 30.0);
        CHECK(out[1].logit == -30.0);
        CHECK(out[0].q < 100.0);
        CHECK(out[0].q > 99.999);
        CHECK(out[1].q > 0.0);
        CHECK(out[1].q < 1e-9);
    }

    SUBCASE("value sign identity against the midpoint") {
        RngStream rng(21, "net-init");
        ValueNet random = make_value_net({4, 16, 2}, Head::kBounded, 0.99, rng);
        RngStream xs(22, "states");
        for (int i = 0; i < 500; ++i) {
            const StateVec x = {xs.uniform(-3, 3), xs.uniform(-3, 3), xs.uniform(-0.3, 0.3),
                                xs.uniform(-3, 3)};
            const auto out = forward(random, x);
            for (const auto& av : out) {
                CHECK(av.q > 0.0);
                CHECK(av.q < 100.0);
                CHECK((av.q >= 50.0) == (av.logit >= 0.0));
            }
        }
    }
}

TEST_CASE("unbounded head is the raw output") {
    RngStream rng(31, "net-init");
    const ValueNet net = make_value_net({4, 8, 2}, Head::kUnbounded, 0.99, rng);
    const StateVec x = {0.5, -1.0, 0.1, 0.2};
    const auto out = forward(net, x);
    for (const auto& av : out) CHECK(av.q == av.logit);

    CHECK_THROWS_AS(forward(net, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("backward matches central finite differences") {
    RngStream rng(41, "net-init");
    RngStream xs(42, "states");
    for (const Head head : {Head::kUnbounded, Head::kBounded}) {
        ValueNet net = make_value_net({4, 8, 2}, head, 0.99, rng);
        for (int trial = 0; trial < 4; ++trial) {
            const StateVec x = {xs.uniform(-2, 2), xs.uniform(-2, 2), xs.uniform(-0.2, 0.2),
                                xs.uniform(-2, 2)};
            const std::vector<double> upstream = {xs.uniform(-1, 1), xs.uniform(-1, 1)};
            CHECK(max_gradient_mismatch(net, x, upstream, 1e-5) < 1e-4);
        }
    }
}

TEST_CASE("backward is linear in the upstream gradient") {
    RngStream rng(43, "net-init");
    const ValueNet net = make_value_net({4, 8, 2}, Head::kBounded, 0.99, rng);
    const StateVec x = {0.4, -0.6, 0.05, 1.2};

    const GradientBuffer zero = backward(net, x, {0.0, 0.0});
    for (const auto& w : zero.weights) CHECK(w.norm() == 0.0);
    for (const auto& b : zero.biases) CHECK(b.norm() == 0.0);

    const GradientBuffer g1 = backward(net, x, {0.7, -0.3});
    GradientBuffer g3 = backward(net, x, {3 * 0.7, 3 * -0.3});
    g3.add_scaled(g1, -3.0);
    for (const auto& w : g3.weights) CHECK(w.norm() < 1e-12);
    for (const auto& b : g3.biases) CHECK(b.norm() < 1e-12);
}

TEST_CASE("adam update behaviour") {
    SUBCASE("zero gradient leaves parameters untouched") {
        RngStream rng(51, "net-init");
        ValueNet net = make_value_net({2, 4, 2}, Head::kUnbounded, 0.99, rng);
        const ValueNet before = net;
        AdamState state = make_adam_state(net);
        adam_step(net, state, zero_gradients(net), 1e-3);
        for (int l = 0; l < net.layer_count(); ++l) {
            CHECK((net.weights[l] - before.weights[l]).norm() == 0.0);
            CHECK((net.biases[l] - before.biases[l]).norm() == 0.0);
        }
    }

    SUBCASE("constant gradient converges to lr-sized signed steps") {
        RngStream rng(52, "net-init");
        ValueNet net = make_value_net({2, 2}, Head::kUnbounded, 0.99, rng);
        AdamState state = make_adam_state(net);
        GradientBuffer g = zero_gradients(net);
        g.weights[0].setConstant(0.5);
        const double lr = 1e-3;
        double prev = net.weights[0](0, 0);
        double delta = 0.0;
        for (int t = 0; t < 5000; ++t) {
            adam_step(net, state, g, lr);
            delta = prev - net.weights[0](0, 0);
            prev = net.weights[0](0, 0);
        }
        CHECK(delta == doctest::Approx(lr).epsilon(1e-6));  // sign(g) = +1
    }

    SUBCASE("drives a one-parameter quadratic downhill") {
        // f(w) = (w - 3)^2 on a single 1x1 weight; gradient is analytic.
        ValueNet net = zero_net({1, 1}, Head::kUnbounded, 0.99);
        AdamState state = make_adam_state(net);
        auto loss = [&]() {
            const double w = net.weights[0](0, 0);
            return (w - 3.0) * (w - 3.0);
        };
        const double initial = loss();
        for (int t = 0; t < 100; ++t) {
            GradientBuffer g = zero_gradients(net);
            g.weights[0](0, 0) = 2.0 * (net.weights[0](0, 0) - 3.0);
            adam_step(net, state, g, 0.05);
        }
        CHECK(loss() < initial);
        CHECK(net.weights[0](0, 0) > 0.0);
    }

    SUBCASE("non-finite gradients are rejected") {
        RngStream rng(53, "net-init");
        ValueNet net = make_value_net({2, 2}, Head::kUnbounded, 0.99, rng);
        AdamState state = make_adam_state(net);
        GradientBuffer g = zero_gradients(net);
        g.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(adam_step(net, state, g, 1e-3), std::runtime_error);
    }
}

TEST_CASE("checkpoint round trip preserves outputs") {
    RngStream rng(61, "net-init");
    for (const Head head : {Head::kUnbounded, Head::kBounded}) {
        const ValueNet net = make_value_net({4, 16, 8, 2}, head, 0.99, rng);
        std::ostringstream out;
        save_checkpoint(out, net, head == Head::kBounded ? "SIGMOID" : "MLP");
        std::istringstream in(out.str());
        const Checkpoint loaded = load_checkpoint(in);

        CHECK(loaded.arch == (head == Head::kBounded ? "SIGMOID" : "MLP"));
        CHECK(loaded.net.head == net.head);
        CHECK(loaded.net.gamma == net.gamma);
        CHECK(loaded.net.layer_sizes == net.layer_sizes);

        RngStream xs(62, "states");
        for (int i = 0; i < 50; ++i) {
            const StateVec x = {xs.uniform(-3, 3), xs.uniform(-3, 3), xs.uniform(-0.3, 0.3),
                                xs.uniform(-3, 3)};
            const auto a = forward(net, x);
            const auto b = forward(loaded.net, x);
            for (std::size_t k = 0; k < a.size(); ++k) {
                CHECK(std::abs(a[k].q - b[k].q) <= 1e-12);
                CHECK(std::abs(a[k].logit - b[k].logit) <= 1e-12);
            }
        }
    }

    std::istringstream bad("arch=MLP\nhead=weird\n");
    CHECK_THROWS_AS(load_checkpoint(bad), std::runtime_error);
}

TEST_CASE("deterministic construction and evaluation") {
    RngStream a(71, "net-init");
    RngStream b(71, "net-init");
    const ValueNet n1 = make_value_net({4, 8, 2}, Head::kBounded, 0.99, a);
    const ValueNet n2 = make_value_net({4, 8, 2}, Head::kBounded, 0.99, b);
    const StateVec x = {0.1, 0.2, 0.03, -0.4};
    const auto o1 = forward(n1, x);
    const auto o2 = forward(n2, x);
    for (std::size_t k = 0; k < o1.size(); ++k) CHECK(o1[k].q == o2[k].q);

    CHECK(greedy_action(n1, x) == greedy_action(n2, x));

    // Argmax ties break toward the lowest index.
    const ValueNet flat = zero_net({4, 2}, Head::kUnbounded, 0.99);
    CHECK(greedy_action(flat, x) == 0);
}
