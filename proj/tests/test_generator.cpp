#include <doctest.h>

#include <set>

#include "lgan/generator.hpp"
#include "lgan/losses.hpp"
#include "support/oracles.hpp"

using namespace lgan;

namespace {

generator::GeneratorSpec tiny_spec() {
    generator::GeneratorSpec s;
    s.input_size = 8;
    s.depth = 2;
    s.base_channels = 2;
    s.channel_schedule = {2, 4};
    s.init_std = 0.5;
    return s;
}

}  // namespace

TEST_CASE("generator output shape equals input shape") {
    const auto spec = generator::GeneratorSpec::desk_scale();
    const auto g = generator::build_generator(spec, 1);
    Rng rng(2);
    const Tensor x = oracle::random_tensor(rng, {1, 1, 64, 64}, 0, 1);
    const Tensor y = generator::forward(g, x);
    CHECK(y.shape() == x.shape());
    for (double v : y.values()) {
        CHECK(v >= ProbMask::kEps);
        CHECK(v <= 1 - ProbMask::kEps);
    }
    const ProbMask p = generator::forward(g, GrayImage::constant(64, 64, 0.3));
    CHECK(p.height() == 64);

    CHECK_THROWS_AS(generator::forward(g, GrayImage::constant(32, 32, 0.3)), ShapeError);
}

TEST_CASE("builds are seed-deterministic and specs round-trip") {
    const auto spec = tiny_spec();
    CHECK(generator::build_generator(spec, 5) == generator::build_generator(spec, 5));
    CHECK_FALSE(generator::build_generator(spec, 5) == generator::build_generator(spec, 6));
    const auto g = generator::build_generator(spec, 5);
    const auto back = generator::spec_of(g);
    CHECK(back.to_json() == spec.to_json());
    CHECK(g.parameter_count() <= 1000);
}

TEST_CASE("paper-scale spec is accepted") {
    const auto s = generator::GeneratorSpec::paper_scale();
    CHECK(s.input_size == 224);
    CHECK(s.channels() == std::vector<int>{64, 128, 256, 512});
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("invalid specs are rejected") {
    auto s = tiny_spec();
    s.input_size = 10;
    CHECK_THROWS_AS(s.validate(), SpecError);
    s = tiny_spec();
    s.channel_schedule = {2, 4, 8};
    CHECK_THROWS_AS(s.validate(), SpecError);
    s = tiny_spec();
    s.depth = 0;
    CHECK_THROWS_AS(s.validate(), SpecError);
}

TEST_CASE("generator gradient of a BCE objective matches finite differences") {
    auto g = generator::build_generator(tiny_spec(), 3);
    Rng rng(4);
    const Tensor x = oracle::random_tensor(rng, {2, 1, 8, 8}, 0, 1);
    Tensor target({2, 1, 8, 8});
    for (double& v : target.values()) v = rng.uniform() < 0.4 ? 1.0 : 0.0;

    generator::GeneratorTape tape;
    const Tensor p = generator::forward(g, x, &tape);
    const auto grads = generator::backward(g, tape, losses::bce_gradient(p, target));
    const auto numeric =
        oracle::numerical_gradient(g.params, [&] { return losses::bce(generator::forward(g, x), target).value; });
    const auto r = oracle::compare(grads, numeric);
    CHECK(r.checked == g.parameter_count());
    CHECK(r.max_rel_error <= 1e-6);
}

TEST_CASE("activation capture") {
    const auto g = generator::build_generator(generator::GeneratorSpec::desk_scale(), 1);
    const auto maps = generator::capture_activations(g, GrayImage::constant(64, 64, 0.4));
    REQUIRE(maps.size() == 5);
    CHECK(maps[0].layer == "encoder1");
    CHECK(maps[2].layer == "decoder1");
    CHECK(maps[4].layer == "head");
    for (const auto& m : maps) {
        for (double v : m.map.values()) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }

    // A zero input with zero biases leaves every activation constant.
    const auto zmaps = generator::capture_activations(g, GrayImage::constant(64, 64, 0.0));
    for (const auto& m : zmaps) {
        std::set<double> levels(m.map.values().begin(), m.map.values().end());
        CHECK(levels.size() == 1);
    }
}
