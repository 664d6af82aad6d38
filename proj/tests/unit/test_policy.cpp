#include <cmath>
#include <numbers>

#include <doctest.h>

#include "bikesim/errors.hpp"
#include "bikesim/policy.hpp"

using namespace bikesim;

namespace {

NetworkWeights random_net(Rng& rng, int in, int hidden)
{
    NetworkWeights w;
    w.settings = "prop";
    w.input_size = in;
    auto layer = [&](int rows, int cols, Activation a) {
        DenseLayer l;
        l.rows = rows;
        l.cols = cols;
        l.activation = a;
        for (int i = 0; i < rows * cols; ++i) l.weights.push_back(rng.uniform(-0.5, 0.5));
        for (int i = 0; i < rows; ++i) l.bias.push_back(rng.uniform(-0.1, 0.1));
        return l;
    };
    w.layers = {layer(hidden, in, Activation::Relu), layer(hidden, hidden, Activation::Tanh),
                layer(1, hidden, Activation::Linear)};
    return w;
}

} // namespace

TEST_CASE("baseline policy signs")
{
    const auto s = EnvSettings::named("prop");
    BaselineGains g{-2.5, -0.8, {0, 0, 0, -0.3, 0}};
    std::vector<double> x(16, 0.0);
    CHECK(baseline_policy(x, g, s) == 0.0);
    x[4] = 0.05; // leaning right
    CHECK(baseline_policy(x, g, s) < 0.0); // steer right, into the fall
    CHECK(baseline_policy(x, g, s) == doctest::Approx(-0.125).epsilon(1e-15));
    x[4] = 0;
    x[14] = 1.0; // path ahead lies to the left
    CHECK(baseline_policy(x, g, s) == doctest::Approx(-0.3).epsilon(1e-15));
    x[4] = 10;
    CHECK(baseline_policy(x, g, s) == -s.delta_limit);
}

TEST_CASE("baseline indexes the q form")
{
    const auto s = EnvSettings::named("alt1");
    BaselineGains g{-2, -1, {1, 0, 0, 0, 0}};
    std::vector<double> x(15, 0.0);
    x[3] = 0.1;
    x[7] = 0.2;
    x[10] = 0.05;
    CHECK(baseline_policy(x, g, s) == doctest::Approx(-0.2 - 0.2 + 0.05).epsilon(1e-15));
}

TEST_CASE("identity network")
{
    NetworkWeights w;
    w.input_size = 2;
    w.layers = {DenseLayer{1, 2, {1.0, 0.0}, {0.0}, Activation::Linear}};
    w.validate();
    CHECK(w.forward({0, 5}) == 0.0);
    CHECK(w.forward({0.3, 5}) == doctest::Approx(w.delta_limit * std::tanh(0.3)).epsilon(1e-15));
    CHECK_THROWS_AS(w.forward({1, 2, 3}), InvalidInput);
}

TEST_CASE("weights JSON round trip is exact")
{
    Rng rng(12);
    const NetworkWeights w = random_net(rng, 16, 8);
    const NetworkWeights back = weights_from_json(weights_to_json(w));
    CHECK(back.input_size == 16);
    CHECK(back.settings == "prop");
    REQUIRE(back.layers.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.layers[i].weights == w.layers[i].weights);
        CHECK(back.layers[i].bias == w.layers[i].bias);
        CHECK(back.layers[i].activation == w.layers[i].activation);
    }
    for (int n = 0; n < 100; ++n) {
        std::vector<double> x(16);
        for (auto& v : x) v = rng.uniform(-1, 1);
        CHECK(back.forward(x) == w.forward(x));
    }
}

TEST_CASE("malformed weights are rejected")
{
    Rng rng(2);
    NetworkWeights w = random_net(rng, 4, 3);
    w.layers[1].cols = 5;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    CHECK_THROWS_AS(weights_from_json("{\"format\":\"bikesim-policy\",\"version\":2}"), ConfigError);
    CHECK_THROWS_AS(weights_from_json("not json"), ConfigError);
    CHECK_THROWS_AS(parse_activation("sigmoid"), ConfigError);
}

TEST_CASE("gains JSON round trip")
{
    BaselineGains g{-2.5, -0.8, {0.1, 0, 0, -0.3, 0.2}};
    const BaselineGains b = gains_from_json(gains_to_json(g));
    CHECK(b.k_phi == g.k_phi);
    CHECK(b.k_phi_dot == g.k_phi_dot);
    CHECK(b.k_t == g.k_t);
}

TEST_CASE("policy dispatch")
{
    const auto s = EnvSettings::named("prop");
    Rng rng(5);
    const Policy net(random_net(rng, 16, 4));
    const Policy base(BaselineGains{-1, 0, {0, 0, 0, 0, 0}});
    CHECK(net.is_network());
    CHECK_FALSE(base.is_network());
    std::vector<double> x(16, 0.0);
    x[4] = 0.1;
    CHECK(base.act(x, s) == -0.1);
    CHECK(std::abs(net.act(x, s)) <= s.delta_limit);
}
