#include <doctest.h>

#include <cmath>

#include "lgan/losses.hpp"
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
    return s;
}

Tensor binary_tensor(Rng& rng, Shape s) {
    Tensor t(s);
    for (double& v : t.values()) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
    return t;
}

void zero_last_fc(nn::NetworkState& state) {
    const auto widths = CriticSpec::from_json(state.spec).fc_widths;
    const std::string last = "fc" + std::to_string(widths.size() - 1);
    state.param(last + ".w").fill(0.0);
    state.param(last + ".b").fill(0.0);
}

}  // namespace

TEST_CASE("bce closed forms") {
    const BinaryMask t(2, 2, {1, 0, 1, 1});
    CHECK(losses::bce(ProbMask(2, 2, std::vector<double>(4, 0.5)), t).value == doctest::Approx(std::log(2.0)));
    CHECK(losses::bce(ProbMask(1, 1, {0.9}), BinaryMask(1, 1, {1})).value ==
          doctest::Approx(0.105361).epsilon(1e-6));
    const double perfect = losses::bce(ProbMask(2, 2, std::vector<double>(4, 1.0)), BinaryMask(2, 2, {1, 1, 1, 1})).value;
    CHECK(perfect == doctest::Approx(-std::log1p(-ProbMask::kEps)).epsilon(1e-9));
    CHECK(perfect < 2e-7);
    CHECK_THROWS_AS(losses::bce(ProbMask(2, 2, std::vector<double>(4, 0.5)), BinaryMask::zeros(2, 1)), ShapeError);
}

TEST_CASE("bce gradient") {
    Rng rng(1);
    std::vector<Tensor> p{oracle::random_tensor(rng, {2, 1, 3, 3}, 0.05, 0.95)};
    const Tensor t = binary_tensor(rng, p[0].shape());
    const auto g = losses::bce_gradient(p[0], t);
    const auto n = oracle::numerical_gradient(p, [&] { return losses::bce(p[0], t).value; });
    CHECK(oracle::compare({g}, n).max_rel_error <= 1e-6);
}

TEST_CASE("zero critic leaves only BCE and zero critic loss") {
    Rng rng(2);
    const Tensor gen = oracle::random_tensor(rng, {2, 1, 8, 8}, 0.05, 0.95);
    const Tensor real = binary_tensor(rng, gen.shape());
    const Tensor img = oracle::random_tensor(rng, gen.shape(), 0, 1);
    const losses::Batch b{gen, real, img};
    for (auto v : kAllVariants) {
        auto state = build_critic(tiny_spec(v), 3);
        zero_last_fc(state);
        const auto gl = losses::generator_loss(state, b);
        CHECK(gl.value == losses::bce(gen, real).value);
        CHECK(gl.component("adversarial") == 0.0);
        if (v == CriticVariant::Regression) CHECK(losses::critic_loss(state, b).value == 0.0);
    }
}

TEST_CASE("identical wirings give zero critic loss") {
    Rng rng(3);
    const Tensor real = binary_tensor(rng, {2, 1, 8, 8});
    const Tensor img = oracle::random_tensor(rng, real.shape(), 0, 1);
    const losses::Batch b{real, real, img};
    for (auto v : {CriticVariant::Basic, CriticVariant::EarlyFusion, CriticVariant::LateFusion}) {
        const auto state = build_critic(tiny_spec(v), 4);
        CHECK(losses::critic_loss(state, b).value == 0.0);
    }
}

TEST_CASE("loss gradients match finite differences") {
    Rng rng(5);
    const Tensor real = binary_tensor(rng, {2, 1, 8, 8});
    const Tensor img = oracle::random_tensor(rng, real.shape(), 0, 1);
    for (auto v : kAllVariants) {
        CAPTURE(short_name(v));
        auto state = build_critic(tiny_spec(v), 6);
        std::vector<Tensor> gen{oracle::random_tensor(rng, real.shape(), 0.05, 0.95)};
        const auto gg = losses::generator_loss_with_grad(state, {gen[0], real, img});
        CHECK(gg.loss.value == losses::generator_loss(state, {gen[0], real, img}).value);
        const auto ng = oracle::numerical_gradient(gen, [&] {
            return losses::generator_loss(state, {gen[0], real, img}).value;
        });
        CHECK(oracle::compare({gg.dgenerated}, ng).max_rel_error <= 1e-6);

        const auto cg = losses::critic_loss_with_grad(state, {gen[0], real, img});
        const auto nc = oracle::numerical_gradient(state.params, [&] {
            return losses::critic_loss(state, {gen[0], real, img}).value;
        });
        CHECK(oracle::compare(cg.dparams, nc).max_rel_error <= 1e-6);
    }
}

TEST_CASE("clipping") {
    Rng rng(7);
    auto state = build_critic(tiny_spec(CriticVariant::Basic), 1);
    const auto clipped = losses::clip_parameters(state, {0.01});
    CHECK(nn::max_abs_parameter(clipped) <= 0.01);
    CHECK(losses::clip_parameters(clipped, {0.01}) == clipped);
    state.params[0][0] = 0.5;
    CHECK(losses::clip_parameters(state, {0.01}).params[0][0] == 0.01);
    state.params[0][0] = -0.5;
    CHECK(losses::clip_parameters(state, {0.01}).params[0][0] == -0.01);
    CHECK(state.params[0][0] == -0.5);
}
