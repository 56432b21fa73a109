#include <doctest.h>

#include <cmath>

#include "lgan/critic.hpp"
#include "support/oracles.hpp"

using namespace lgan;
using namespace lgan::critic;

namespace {

CriticSpec tiny_spec(CriticVariant v) {
    CriticSpec s;
    s.variant = v;
    s.input_size = 8;
    s.channel_schedule = {2, 4};
    s.fc_widths = {4, 1};
    s.init_std = 0.5;
    s.late_fusion_extra_blocks = 2;
    return s;
}

CriticInput random_input(CriticVariant v, Rng& rng, int n, int size) {
    const Tensor m = oracle::random_tensor(rng, {n, 1, size, size}, 0, 1);
    const Tensor i = oracle::random_tensor(rng, {n, 1, size, size}, 0, 1);
    const Tensor o = oracle::random_tensor(rng, {n, 1, size, size}, 0, 1);
    return wire_inputs(v, m, i, &o);
}

}  // namespace

TEST_CASE("variant names") {
    for (auto v : kAllVariants) {
        CHECK(parse_variant(short_name(v)) == v);
        CHECK(parse_variant(display_name(v)) == v);
    }
    CHECK(parse_variant("origin") == CriticVariant::Basic);
    CHECK_FALSE(parse_variant("nope").has_value());
    CHECK(input_arity(CriticVariant::Basic) == 1);
    CHECK(input_arity(CriticVariant::Product) == 1);
    CHECK(input_arity(CriticVariant::EarlyFusion) == 1);
    CHECK(input_arity(CriticVariant::LateFusion) == 2);
    CHECK(input_arity(CriticVariant::Regression) == 2);
}

TEST_CASE("wiring") {
    const GrayImage img(2, 2, {0.2, 0.3, 0.4, 0.5});
    const BinaryMask m(2, 2, {1, 0, 0, 1});
    const auto prod = wire_inputs(CriticVariant::Product, m, img);
    REQUIRE(prod.arrays.size() == 1);
    CHECK(prod.arrays[0] == Tensor({1, 1, 2, 2}, std::vector<double>{0.2, 0.0, 0.0, 0.5}));

    const BinaryMask ones(2, 2, {1, 1, 1, 1});
    CHECK(wire_inputs(CriticVariant::Product, ones, img).arrays[0] ==
          Tensor({1, 1, 2, 2}, std::vector<double>(img.values().begin(), img.values().end())));

    const auto ef = wire_inputs(CriticVariant::EarlyFusion, m, img);
    REQUIRE(ef.arrays.size() == 1);
    CHECK(ef.arrays[0].shape() == Shape{1, 2, 2, 2});
    CHECK(ef.arrays[0].at(0, 0, 0, 0) == 1.0);
    CHECK(ef.arrays[0].at(0, 1, 0, 1) == 0.3);

    const auto lf = wire_inputs(CriticVariant::LateFusion, m, img);
    REQUIRE(lf.arrays.size() == 2);
    CHECK(lf.arrays[1].at(0, 0, 1, 1) == 0.5);

    CHECK_THROWS_AS(wire_inputs(CriticVariant::Regression, m, img), WiringError);
    const auto reg = wire_inputs(CriticVariant::Regression, m, img, &ones);
    REQUIRE(reg.arrays.size() == 2);
    CHECK(reg.arrays[1].at(0, 0, 1, 0) == 1.0);

    const GrayImage big = GrayImage::constant(4, 4, 0.1);
    CHECK_THROWS_AS(wire_inputs(CriticVariant::Product, m, big), ShapeError);
}

TEST_CASE("topologies") {
    const auto lf = topology(CriticSpec::desk_scale(CriticVariant::LateFusion));
    REQUIRE(lf.branches.size() == 2);
    CHECK(lf.branches[1].size() > lf.branches[0].size());
    const auto reg = topology(CriticSpec::desk_scale(CriticVariant::Regression));
    REQUIRE(reg.branches.size() == 2);
    CHECK(reg.branches[0].size() == reg.branches[1].size());
    const auto ef = topology(CriticSpec::desk_scale(CriticVariant::EarlyFusion));
    REQUIRE(ef.branches.size() == 1);
    CHECK(ef.branches[0][0].in_channels == 2);
    CHECK_FALSE(ef.branches[0][0].batchnorm);
    const auto paper = CriticSpec::paper_scale(CriticVariant::Basic);
    CHECK(paper.channel_schedule == std::vector<int>{32, 64, 128, 256});
}

TEST_CASE("forward returns one finite score per sample, purely") {
    Rng rng(1);
    for (auto v : kAllVariants) {
        const auto state = build_critic(CriticSpec::desk_scale(v), 3);
        const auto in = random_input(v, rng, 3, 64);
        const auto a = forward(state, in);
        const auto b = forward(state, in);
        REQUIRE(a.size() == 3);
        CHECK(a == b);
        for (double s : a) CHECK(std::isfinite(s));
    }
    const auto basic = build_critic(CriticSpec::desk_scale(CriticVariant::Basic), 3);
    const auto z = forward(basic, CriticInput{{Tensor({1, 1, 64, 64}, 0.0)}});
    const auto o = forward(basic, CriticInput{{Tensor({1, 1, 64, 64}, 1.0)}});
    CHECK(std::isfinite(z[0]));
    CHECK(std::isfinite(o[0]));

    CHECK_THROWS_AS(forward(basic, CriticInput{{Tensor({1, 1, 64, 64}), Tensor({1, 1, 64, 64})}}), WiringError);
    CHECK_THROWS_AS(forward(basic, CriticInput{{Tensor({1, 1, 32, 32})}}), ShapeError);
}

TEST_CASE("EarlyFusion accepts a 2x224x224 bundle") {
    auto spec = CriticSpec::desk_scale(CriticVariant::EarlyFusion, 224);
    spec.fc_widths = {8, 1};
    const auto state = build_critic(spec, 1);
    Rng rng(2);
    const auto s = forward(state, random_input(CriticVariant::EarlyFusion, rng, 1, 224));
    REQUIRE(s.size() == 1);
    CHECK(std::isfinite(s[0]));
}

TEST_CASE("critic gradients match finite differences for every variant") {
    for (auto v : kAllVariants) {
        CAPTURE(short_name(v));
        auto state = build_critic(tiny_spec(v), 7);
        CHECK(state.parameter_count() <= 1000);
        Rng rng(8);
        auto in = random_input(v, rng, 3, 8);
        const std::vector<double> w{0.7, -1.3, 0.4};
        auto objective = [&] {
            const auto s = forward(state, in);
            double t = 0;
            for (std::size_t i = 0; i < s.size(); ++i) t += w[i] * s[i];
            return t;
        };
        CriticTape tape;
        forward(state, in, &tape);
        const auto g = backward(state, tape, w);
        const auto np = oracle::numerical_gradient(state.params, objective);
        CHECK(oracle::compare(g.params, np).max_rel_error <= 1e-6);
        const auto ni = oracle::numerical_gradient(in.arrays, objective);
        CHECK(oracle::compare(g.inputs, ni).max_rel_error <= 1e-6);
    }
}
