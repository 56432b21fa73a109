#include "lgan/critic.hpp"

namespace lgan::critic {

using nn::NetworkState;

std::string_view short_name(CriticVariant v) {
    switch (v) {
        case CriticVariant::Basic: return "basic";
        case CriticVariant::Product: return "product";
        case CriticVariant::EarlyFusion: return "ef";
        case CriticVariant::LateFusion: return "lf";
        case CriticVariant::Regression: return "regression";
    }
    return "?";
}

std::string_view display_name(CriticVariant v) {
    switch (v) {
        case CriticVariant::Basic: return "LGAN_Basic";
        case CriticVariant::Product: return "LGAN_Product";
        case CriticVariant::EarlyFusion: return "LGAN_EF";
        case CriticVariant::LateFusion: return "LGAN_LF";
        case CriticVariant::Regression: return "LGAN_Regression";
    }
    return "?";
}

std::optional<CriticVariant> parse_variant(std::string_view name) {
    for (auto v : kAllVariants) {
        if (name == short_name(v) || name == display_name(v)) return v;
    }
    // "origin" is an alias of the basic critic.
    if (name == "origin" || name == "LGAN_Origin") return CriticVariant::Basic;
    return std::nullopt;
}

int input_arity(CriticVariant v) {
    return (v == CriticVariant::LateFusion || v == CriticVariant::Regression) ? 2 : 1;
}

CriticSpec CriticSpec::desk_scale(CriticVariant v, int input_size) {
    CriticSpec s;
    s.variant = v;
    s.input_size = input_size;
    return s;
}

CriticSpec CriticSpec::paper_scale(CriticVariant v, int input_size) {
    CriticSpec s;
    s.variant = v;
    s.input_size = input_size;
    s.channel_schedule = {32, 64, 128, 256};
    return s;
}

void CriticSpec::validate() const {
    if (channel_schedule.empty()) throw SpecError("critic channel_schedule must not be empty");
    for (int c : channel_schedule) {
        if (c < 1) throw SpecError("critic channel counts must be positive");
    }
    const int levels = static_cast<int>(channel_schedule.size());
    if (input_size < 2 || input_size % (1 << levels) != 0) {
        throw SpecError("critic input_size " + std::to_string(input_size) + " is not divisible by 2^" +
                        std::to_string(levels));
    }
    if (fc_widths.empty() || fc_widths.back() != 1) throw SpecError("critic fc_widths must end in 1");
    for (int w : fc_widths) {
        if (w < 1) throw SpecError("critic fc widths must be positive");
    }
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw SpecError("leaky_slope must lie in (0,1)");
    if (!(init_std > 0.0)) throw SpecError("init_std must be positive");
    if (late_fusion_extra_blocks < 0) throw SpecError("late_fusion_extra_blocks must be >= 0");
}

nlohmann::json CriticSpec::to_json() const {
    return {{"variant", std::string(short_name(variant))},
            {"input_size", input_size},
            {"channel_schedule", channel_schedule},
            {"leaky_slope", leaky_slope},
            {"use_batchnorm", use_batchnorm},
            {"fc_widths", fc_widths},
            {"init_std", init_std},
            {"late_fusion_extra_blocks", late_fusion_extra_blocks}};
}

CriticSpec CriticSpec::from_json(const nlohmann::json& j) {
    CriticSpec s;
    try {
        const auto name = j.at("variant").get<std::string>();
        const auto v = parse_variant(name);
        if (!v) throw SpecError("unknown critic variant '" + name + "'");
        s.variant = *v;
        s.input_size = j.at("input_size").get<int>();
        s.channel_schedule = j.at("channel_schedule").get<std::vector<int>>();
        s.leaky_slope = j.at("leaky_slope").get<double>();
        s.use_batchnorm = j.at("use_batchnorm").get<bool>();
        s.fc_widths = j.at("fc_widths").get<std::vector<int>>();
        s.init_std = j.at("init_std").get<double>();
        s.late_fusion_extra_blocks = j.at("late_fusion_extra_blocks").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed critic spec: ") + e.what());
    }
    s.validate();
    return s;
}

CriticTopology topology(const CriticSpec& spec) {
    spec.validate();
    const auto& ch = spec.channel_schedule;
    const bool bn = spec.use_batchnorm;
    const nn::ConvGeometry down{4, 2, 1};
    const nn::ConvGeometry same{3, 1, 1};
    const int levels = static_cast<int>(ch.size());

    CriticTopology t;
    auto first = [&](int in) { return ConvBlock{in, ch[0], down, false}; };
    const bool fused_late = spec.variant == CriticVariant::LateFusion || spec.variant == CriticVariant::Regression;

    switch (spec.variant) {
        case CriticVariant::Basic:
        case CriticVariant::Product:
            t.branches = {{first(1)}};
            break;
        case CriticVariant::EarlyFusion:
            t.branches = {{first(2)}};
            break;
        case CriticVariant::LateFusion: {
            std::vector<ConvBlock> mask_branch{first(1)};
            std::vector<ConvBlock> image_branch{first(1)};
            for (int k = 0; k < spec.late_fusion_extra_blocks; ++k) image_branch.push_back({ch[0], ch[0], same, bn});
            t.branches = {mask_branch, image_branch};
            break;
        }
        case CriticVariant::Regression: {
            std::vector<ConvBlock> branch{first(1), {ch[0], ch[0], same, bn}};
            t.branches = {branch, branch};
            break;
        }
    }

    int in = fused_late ? 2 * ch[0] : ch[0];
    for (int l = 1; l < levels; ++l) {
        t.trunk.push_back({in, ch[l], down, bn});
        in = ch[l];
        if (spec.variant == CriticVariant::Regression) t.trunk.push_back({ch[l], ch[l], same, bn});
    }
    if (spec.variant == CriticVariant::Regression && levels == 1) t.trunk.push_back({in, in, same, bn});
    const int side = spec.input_size >> levels;
    t.flat_features = in * side * side;
    t.fc_widths = spec.fc_widths;
    return t;
}

namespace {

std::string block_name(const std::string& prefix, std::size_t i, const char* part) {
    return prefix + std::to_string(i) + "." + part;
}

std::string branch_prefix(std::size_t b) { return "branch" + std::to_string(b) + ".block"; }

void add_block(NetworkState& state, Rng& rng, const std::string& prefix, std::size_t i, const ConvBlock& b) {
    const int k = b.geometry.kernel;
    add_parameter(state, rng, block_name(prefix, i, "w"), {b.out_channels, b.in_channels, k, k}, true);
    add_parameter(state, rng, block_name(prefix, i, "b"), {b.out_channels, 1, 1, 1}, false);
    if (b.batchnorm) {
        add_parameter(state, rng, block_name(prefix, i, "gamma"), {b.out_channels, 1, 1, 1}, false, 1.0);
        add_parameter(state, rng, block_name(prefix, i, "beta"), {b.out_channels, 1, 1, 1}, false);
    }
}

}  // namespace

NetworkState build_critic(const CriticSpec& spec, std::uint64_t seed) {
    const CriticTopology t = topology(spec);
    NetworkState state;
    state.kind = "critic";
    state.spec = spec.to_json();
    state.seed = seed;
    state.init_std = spec.init_std;
    Rng rng(seed);
    for (std::size_t b = 0; b < t.branches.size(); ++b) {
        for (std::size_t i = 0; i < t.branches[b].size(); ++i) add_block(state, rng, branch_prefix(b), i, t.branches[b][i]);
    }
    for (std::size_t i = 0; i < t.trunk.size(); ++i) add_block(state, rng, "trunk.block", i, t.trunk[i]);
    int in = t.flat_features;
    for (std::size_t i = 0; i < t.fc_widths.size(); ++i) {
        add_parameter(state, rng, "fc" + std::to_string(i) + ".w", {t.fc_widths[i], in, 1, 1}, true);
        add_parameter(state, rng, "fc" + std::to_string(i) + ".b", {t.fc_widths[i], 1, 1, 1}, false);
        in = t.fc_widths[i];
    }
    return state;
}

CriticSpec spec_of(const NetworkState& state) {
    if (state.kind != "critic") throw SpecError("state is a " + state.kind + ", not a critic");
    return CriticSpec::from_json(state.spec);
}

CriticInput wire_inputs(CriticVariant v, const Tensor& mask, const Tensor& image, const Tensor* other_mask) {
    require_same_shape(mask, image, "critic wiring (mask vs image)");
    if (mask.c() != 1) throw ShapeError("critic wiring expects single-channel masks");
    switch (v) {
        case CriticVariant::Basic: return {{mask}};
        case CriticVariant::Product: return {{hadamard(mask, image)}};
        case CriticVariant::EarlyFusion: return {{concat_channels(mask, image)}};
        case CriticVariant::LateFusion: return {{mask, image}};
        case CriticVariant::Regression:
            if (!other_mask) throw WiringError("regression critic requires the paired real mask");
            require_same_shape(mask, *other_mask, "critic wiring (generated vs real mask)");
            return {{mask, *other_mask}};
    }
    throw WiringError("unknown critic variant");
}

namespace {

Tensor block_forward(const NetworkState& state, const std::string& prefix, std::size_t i, const ConvBlock& b,
                     const Tensor& x, double alpha, BlockTape& tape) {
    tape.input = x;
    tape.conv_out = nn::conv2d(x, state.param(block_name(prefix, i, "w")), state.param(block_name(prefix, i, "b")),
                               b.geometry);
    if (b.batchnorm) {
        tape.bn_out = nn::batch_norm(tape.conv_out, state.param(block_name(prefix, i, "gamma")),
                                     state.param(block_name(prefix, i, "beta")), &tape.bn);
    } else {
        tape.bn_out = tape.conv_out;
    }
    return nn::leaky_relu(tape.bn_out, alpha);
}

Tensor block_backward(const NetworkState& state, nn::Gradients& grads, const std::string& prefix, std::size_t i,
                      const ConvBlock& b, const BlockTape& tape, Tensor dy, double alpha) {
    auto g = [&](const char* part) -> Tensor& { return grads[state.index_of(block_name(prefix, i, part))]; };
    dy = nn::leaky_relu_backward(tape.bn_out, dy, alpha);
    if (b.batchnorm) {
        dy = nn::batch_norm_backward(tape.bn, state.param(block_name(prefix, i, "gamma")), dy, g("gamma"), g("beta"));
    }
    return nn::conv2d_backward(tape.input, state.param(block_name(prefix, i, "w")), dy, b.geometry, g("w"), g("b"));
}

}  // namespace

std::vector<double> forward(const NetworkState& state, const CriticInput& input, CriticTape* tape) {
    const CriticSpec spec = spec_of(state);
    const CriticTopology topo = topology(spec);
    const double alpha = spec.leaky_slope;
    const int arity = input_arity(spec.variant);
    if (static_cast<int>(input.arrays.size()) != arity) {
        throw WiringError(std::string(display_name(spec.variant)) + " critic takes " + std::to_string(arity) +
                          " input array(s), got " + std::to_string(input.arrays.size()));
    }
    CriticTape local;
    CriticTape& t = tape ? *tape : local;
    t.branches.assign(topo.branches.size(), {});
    t.branch_channels.clear();

    const int batch = input.arrays.front().n();
    Tensor joined;
    for (std::size_t b = 0; b < topo.branches.size(); ++b) {
        const Tensor& x0 = input.arrays[b];
        const int want_c = topo.branches[b].front().in_channels;
        if (x0.n() != batch || x0.c() != want_c || x0.h() != spec.input_size || x0.w() != spec.input_size) {
            throw ShapeError("critic input " + std::to_string(b) + " has shape " + to_string(x0.shape()) +
                             ", expected {N," + std::to_string(want_c) + "," + std::to_string(spec.input_size) + "," +
                             std::to_string(spec.input_size) + "}");
        }
        Tensor x = x0;
        t.branches[b].resize(topo.branches[b].size());
        for (std::size_t i = 0; i < topo.branches[b].size(); ++i) {
            x = block_forward(state, branch_prefix(b), i, topo.branches[b][i], x, alpha, t.branches[b][i]);
        }
        t.branch_channels.push_back(x.c());
        joined = b == 0 ? std::move(x) : concat_channels(joined, x);
    }
    Tensor x = std::move(joined);
    t.trunk.resize(topo.trunk.size());
    for (std::size_t i = 0; i < topo.trunk.size(); ++i) {
        x = block_forward(state, "trunk.block", i, topo.trunk[i], x, alpha, t.trunk[i]);
    }
    t.features_shape = x.shape();
    t.fc_inputs.clear();
    t.fc_pre.clear();
    for (std::size_t i = 0; i < topo.fc_widths.size(); ++i) {
        t.fc_inputs.push_back(x);
        const auto idx = std::to_string(i);
        x = nn::linear(x, state.param("fc" + idx + ".w"), state.param("fc" + idx + ".b"));
        if (i + 1 < topo.fc_widths.size()) {
            t.fc_pre.push_back(x);
            x = nn::leaky_relu(x, alpha);
        }
    }
    return std::vector<double>(x.data(), x.data() + batch);
}

CriticGradients backward(const NetworkState& state, const CriticTape& tape, const std::vector<double>& dscores) {
    const CriticSpec spec = spec_of(state);
    const CriticTopology topo = topology(spec);
    const double alpha = spec.leaky_slope;
    CriticGradients out{nn::zero_gradients(state), {}};
    const int batch = tape.fc_inputs.front().n();
    if (static_cast<int>(dscores.size()) != batch) throw ShapeError("score gradient count does not match batch");

    Tensor dy({batch, 1, 1, 1}, std::vector<double>(dscores));
    for (std::size_t i = topo.fc_widths.size(); i-- > 0;) {
        const auto idx = std::to_string(i);
        if (i + 1 < topo.fc_widths.size()) dy = nn::leaky_relu_backward(tape.fc_pre[i], dy, alpha);
        dy = nn::linear_backward(tape.fc_inputs[i], state.param("fc" + idx + ".w"), dy,
                                 out.params[state.index_of("fc" + idx + ".w")],
                                 out.params[state.index_of("fc" + idx + ".b")]);
    }
    // linear_backward returns {N, F, 1, 1}; restore the trunk's spatial layout.
    dy = Tensor(tape.features_shape, std::move(dy.storage()));

    for (std::size_t i = topo.trunk.size(); i-- > 0;) {
        dy = block_backward(state, out.params, "trunk.block", i, topo.trunk[i], tape.trunk[i], std::move(dy), alpha);
    }

    std::vector<Tensor> branch_grads;
    if (topo.branches.size() == 1) {
        branch_grads.push_back(std::move(dy));
    } else {
        Tensor first;
        Tensor second;
        split_channels(dy, tape.branch_channels[0], first, second);
        branch_grads.push_back(std::move(first));
        branch_grads.push_back(std::move(second));
    }
    for (std::size_t b = 0; b < topo.branches.size(); ++b) {
        Tensor d = std::move(branch_grads[b]);
        for (std::size_t i = topo.branches[b].size(); i-- > 0;) {
            d = block_backward(state, out.params, branch_prefix(b), i, topo.branches[b][i], tape.branches[b][i],
                               std::move(d), alpha);
        }
        out.inputs.push_back(std::move(d));
    }
    return out;
}

}  // namespace lgan::critic
