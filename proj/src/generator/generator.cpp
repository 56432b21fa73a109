#include "lgan/generator.hpp"

#include <algorithm>
#include <cmath>

namespace lgan::generator {

using nn::ConvGeometry;
using nn::NetworkState;

namespace {

constexpr ConvGeometry kConv3{3, 1, 1};
constexpr ConvGeometry kConv1{1, 1, 0};

std::string enc(int level, const char* part) { return "enc" + std::to_string(level) + "." + part; }
std::string dec(int level, const char* part) { return "dec" + std::to_string(level) + "." + part; }

}  // namespace

GeneratorSpec GeneratorSpec::desk_scale() { return GeneratorSpec{}; }

GeneratorSpec GeneratorSpec::paper_scale() {
    GeneratorSpec s;
    s.input_size = 224;
    s.depth = 4;
    s.base_channels = 64;
    s.channel_schedule = {64, 128, 256, 512};
    return s;
}

std::vector<int> GeneratorSpec::channels() const {
    if (!channel_schedule.empty()) return channel_schedule;
    std::vector<int> out;
    for (int l = 0, c = base_channels; l < depth; ++l, c *= 2) out.push_back(c);
    return out;
}

void GeneratorSpec::validate() const {
    if (depth < 1) throw SpecError("generator depth must be >= 1");
    if (input_size < 8) throw SpecError("generator input_size must be >= 8");
    if (input_size % (1 << depth) != 0) {
        throw SpecError("input_size " + std::to_string(input_size) + " is not divisible by 2^" + std::to_string(depth));
    }
    const auto ch = channels();
    if (static_cast<int>(ch.size()) != depth) throw SpecError("channel_schedule length must equal depth");
    for (int c : ch) {
        if (c < 1) throw SpecError("channel counts must be positive");
    }
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw SpecError("leaky_slope must lie in (0,1)");
    if (!(init_std > 0.0)) throw SpecError("init_std must be positive");
}

nlohmann::json GeneratorSpec::to_json() const {
    return {{"input_size", input_size},       {"depth", depth},
            {"base_channels", base_channels}, {"channel_schedule", channel_schedule},
            {"leaky_slope", leaky_slope},     {"skip_connections", skip_connections},
            {"init_std", init_std}};
}

GeneratorSpec GeneratorSpec::from_json(const nlohmann::json& j) {
    GeneratorSpec s;
    try {
        s.input_size = j.at("input_size").get<int>();
        s.depth = j.at("depth").get<int>();
        s.base_channels = j.at("base_channels").get<int>();
        s.channel_schedule = j.at("channel_schedule").get<std::vector<int>>();
        s.leaky_slope = j.at("leaky_slope").get<double>();
        s.skip_connections = j.at("skip_connections").get<bool>();
        s.init_std = j.at("init_std").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed generator spec: ") + e.what());
    }
    s.validate();
    return s;
}

NetworkState build_generator(const GeneratorSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto ch = spec.channels();
    NetworkState state;
    state.kind = "generator";
    state.spec = spec.to_json();
    state.seed = seed;
    state.init_std = spec.init_std;
    Rng rng(seed);

    auto conv = [&](const std::string& prefix, int cin, int cout, int k) {
        add_parameter(state, rng, prefix + ".w", {cout, cin, k, k}, true);
        add_parameter(state, rng, prefix + ".b", {cout, 1, 1, 1}, false);
    };

    for (int l = 0; l < spec.depth; ++l) {
        const int cin = l == 0 ? 1 : ch[l - 1];
        conv(enc(l, "conv1"), cin, ch[l], 3);
        conv(enc(l, "conv2"), ch[l], ch[l], 3);
    }
    for (int l = spec.depth - 1; l >= 0; --l) {
        const int cin = l == spec.depth - 1 ? ch[l] : ch[l + 1];
        add_parameter(state, rng, dec(l, "up.w"), {cin, ch[l], 2, 2}, true);
        add_parameter(state, rng, dec(l, "up.b"), {ch[l], 1, 1, 1}, false);
        conv(dec(l, "conv1"), spec.skip_connections ? 2 * ch[l] : ch[l], ch[l], 3);
        conv(dec(l, "conv2"), ch[l], ch[l], 3);
    }
    conv("head", ch[0], 1, 1);
    return state;
}

GeneratorSpec spec_of(const NetworkState& state) {
    if (state.kind != "generator") throw SpecError("state is a " + state.kind + ", not a generator");
    return GeneratorSpec::from_json(state.spec);
}

Tensor forward(const NetworkState& state, const Tensor& images, GeneratorTape* tape) {
    const GeneratorSpec spec = spec_of(state);
    if (images.c() != 1 || images.h() != spec.input_size || images.w() != spec.input_size) {
        throw ShapeError("generator expects {N,1," + std::to_string(spec.input_size) + "," +
                         std::to_string(spec.input_size) + "}, got " + to_string(images.shape()));
    }
    const double alpha = spec.leaky_slope;
    GeneratorTape local;
    GeneratorTape& t = tape ? *tape : local;
    t.encoder.assign(spec.depth, {});
    t.decoder.assign(spec.depth, {});

    Tensor x = images;
    for (int l = 0; l < spec.depth; ++l) {
        auto& e = t.encoder[l];
        e.input = std::move(x);
        e.pre1 = nn::conv2d(e.input, state.param(enc(l, "conv1.w")), state.param(enc(l, "conv1.b")), kConv3);
        e.act1 = nn::leaky_relu(e.pre1, alpha);
        e.pre2 = nn::conv2d(e.act1, state.param(enc(l, "conv2.w")), state.param(enc(l, "conv2.b")), kConv3);
        e.act2 = nn::leaky_relu(e.pre2, alpha);
        e.pooled = nn::maxpool2x2(e.act2);
        x = e.pooled.output;
    }
    for (int l = spec.depth - 1; l >= 0; --l) {
        auto& d = t.decoder[l];
        d.input = std::move(x);
        d.up_pre = nn::deconv2x2(d.input, state.param(dec(l, "up.w")), state.param(dec(l, "up.b")));
        d.up_act = nn::leaky_relu(d.up_pre, alpha);
        d.joined = spec.skip_connections ? concat_channels(d.up_act, t.encoder[l].act2) : d.up_act;
        d.pre1 = nn::conv2d(d.joined, state.param(dec(l, "conv1.w")), state.param(dec(l, "conv1.b")), kConv3);
        d.act1 = nn::leaky_relu(d.pre1, alpha);
        d.pre2 = nn::conv2d(d.act1, state.param(dec(l, "conv2.w")), state.param(dec(l, "conv2.b")), kConv3);
        d.act2 = nn::leaky_relu(d.pre2, alpha);
        x = d.act2;
    }
    t.head_input = std::move(x);
    t.sigmoid_output =
        nn::sigmoid(nn::conv2d(t.head_input, state.param("head.w"), state.param("head.b"), kConv1));
    Tensor probs = t.sigmoid_output;
    for (double& v : probs.values()) v = std::clamp(v, ProbMask::kEps, 1.0 - ProbMask::kEps);
    return probs;
}

ProbMask forward(const NetworkState& state, const GrayImage& image) {
    const Tensor probs = forward(state, to_tensor(std::span<const GrayImage>(&image, 1)));
    return prob_from_tensor(probs, 0);
}

nn::Gradients backward(const NetworkState& state, const GeneratorTape& tape, const Tensor& dprob) {
    const GeneratorSpec spec = spec_of(state);
    const double alpha = spec.leaky_slope;
    const auto ch = spec.channels();
    nn::Gradients grads = nn::zero_gradients(state);
    auto g = [&](const std::string& name) -> Tensor& { return grads[state.index_of(name)]; };

    require_same_shape(dprob, tape.sigmoid_output, "generator backward");
    Tensor dlogit(dprob.shape());
    for (std::size_t i = 0; i < dprob.size(); ++i) {
        const double s = tape.sigmoid_output[i];
        const bool clamped = s < ProbMask::kEps || s > 1.0 - ProbMask::kEps;
        dlogit[i] = clamped ? 0.0 : dprob[i] * s * (1.0 - s);
    }
    Tensor dx = nn::conv2d_backward(tape.head_input, state.param("head.w"), dlogit, kConv1, g("head.w"), g("head.b"));

    std::vector<Tensor> dskip(spec.depth);
    for (int l = 0; l < spec.depth; ++l) {
        const auto& d = tape.decoder[l];
        dx = nn::leaky_relu_backward(d.pre2, dx, alpha);
        dx = nn::conv2d_backward(d.act1, state.param(dec(l, "conv2.w")), dx, kConv3, g(dec(l, "conv2.w")),
                                 g(dec(l, "conv2.b")));
        dx = nn::leaky_relu_backward(d.pre1, dx, alpha);
        dx = nn::conv2d_backward(d.joined, state.param(dec(l, "conv1.w")), dx, kConv3, g(dec(l, "conv1.w")),
                                 g(dec(l, "conv1.b")));
        if (spec.skip_connections) {
            Tensor dup;
            split_channels(dx, ch[l], dup, dskip[l]);
            dx = std::move(dup);
        }
        dx = nn::leaky_relu_backward(d.up_pre, dx, alpha);
        dx = nn::deconv2x2_backward(d.input, state.param(dec(l, "up.w")), dx, g(dec(l, "up.w")), g(dec(l, "up.b")));
    }
    for (int l = spec.depth - 1; l >= 0; --l) {
        const auto& e = tape.encoder[l];
        dx = nn::maxpool2x2_backward(e.act2.shape(), e.pooled.argmax, dx);
        if (spec.skip_connections) add_inplace(dx, dskip[l]);
        dx = nn::leaky_relu_backward(e.pre2, dx, alpha);
        dx = nn::conv2d_backward(e.act1, state.param(enc(l, "conv2.w")), dx, kConv3, g(enc(l, "conv2.w")),
                                 g(enc(l, "conv2.b")));
        dx = nn::leaky_relu_backward(e.pre1, dx, alpha);
        dx = nn::conv2d_backward(e.input, state.param(enc(l, "conv1.w")), dx, kConv3, g(enc(l, "conv1.w")),
                                 g(enc(l, "conv1.b")));
    }
    return grads;
}

namespace {

ActivationMap representative(std::string layer, const Tensor& act) {
    const std::size_t plane = act.shape().plane();
    int best = 0;
    double best_mean = -1.0;
    for (int c = 0; c < act.c(); ++c) {
        const double* p = act.channel(0, c);
        double sum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) sum += std::abs(p[i]);
        if (sum / plane > best_mean) {
            best_mean = sum / plane;
            best = c;
        }
    }
    const double* p = act.channel(0, best);
    const auto [lo, hi] = std::minmax_element(p, p + plane);
    const double range = *hi - *lo;
    std::vector<double> v(plane);
    for (std::size_t i = 0; i < plane; ++i) v[i] = range > 0.0 ? std::clamp((p[i] - *lo) / range, 0.0, 1.0) : 0.0;
    return ActivationMap{std::move(layer), best, GrayImage(act.h(), act.w(), std::move(v))};
}

}  // namespace

std::vector<ActivationMap> capture_activations(const NetworkState& state, const GrayImage& image) {
    GeneratorTape tape;
    const Tensor probs = forward(state, to_tensor(std::span<const GrayImage>(&image, 1)), &tape);
    std::vector<ActivationMap> maps;
    const int depth = static_cast<int>(tape.encoder.size());
    for (int l = 0; l < depth; ++l) maps.push_back(representative("encoder" + std::to_string(l + 1), tape.encoder[l].act2));
    for (int l = depth - 1, k = 1; l >= 0; --l, ++k) {
        maps.push_back(representative("decoder" + std::to_string(k), tape.decoder[l].act2));
    }
    maps.push_back(representative("head", probs));
    return maps;
}

}  // namespace lgan::generator
