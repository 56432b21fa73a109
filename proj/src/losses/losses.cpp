#include "lgan/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lgan::losses {

using critic::CriticVariant;

LossValue bce(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "bce");
    if (pred.size() == 0) throw ShapeError("bce of an empty batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = std::clamp(pred[i], ProbMask::kEps, 1.0 - ProbMask::kEps);
        const double t = target[i];
        sum -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    const double v = sum / static_cast<double>(pred.size());
    return LossValue{v, {{"bce", v}}};
}

LossValue bce(const ProbMask& pred, const BinaryMask& target) {
    return bce(to_tensor(std::span<const ProbMask>(&pred, 1)), to_tensor(std::span<const BinaryMask>(&target, 1)));
}

Tensor bce_gradient(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "bce_gradient");
    Tensor g(pred.shape());
    const double inv_count = 1.0 / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = pred[i];
        if (p < ProbMask::kEps || p > 1.0 - ProbMask::kEps) continue;
        const double t = target[i];
        g[i] = (-t / p + (1.0 - t) / (1.0 - p)) * inv_count;
    }
    return g;
}

critic::CriticInput generated_wiring(CriticVariant v, const Batch& b) {
    return critic::wire_inputs(v, b.generated, b.image, &b.real);
}

critic::CriticInput real_wiring(CriticVariant v, const Batch& b) {
    if (v == CriticVariant::Regression) throw WiringError("regression critic has no real-side wiring");
    return critic::wire_inputs(v, b.real, b.image, nullptr);
}

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

void check_batch(const Batch& b) {
    require_same_shape(b.generated, b.real, "loss batch (generated vs real)");
    require_same_shape(b.generated, b.image, "loss batch (generated vs image)");
}

// Maps the critic's input gradient back onto the generated mask.
Tensor generated_input_gradient(CriticVariant v, const critic::CriticGradients& g, const Batch& b) {
    switch (v) {
        case CriticVariant::Basic:
        case CriticVariant::LateFusion:
        case CriticVariant::Regression: return g.inputs[0];
        case CriticVariant::Product: return hadamard(g.inputs[0], b.image);
        case CriticVariant::EarlyFusion: {
            Tensor mask_part;
            Tensor image_part;
            split_channels(g.inputs[0], 1, mask_part, image_part);
            return mask_part;
        }
    }
    throw WiringError("unknown critic variant");
}

}  // namespace

LossValue generator_loss(const nn::NetworkState& critic_state, const Batch& b) {
    check_batch(b);
    const auto v = critic::spec_of(critic_state).variant;
    const double bce_term = bce(b.generated, b.real).value;
    const double adversarial = -mean(critic::forward(critic_state, generated_wiring(v, b)));
    return LossValue{bce_term + adversarial, {{"bce", bce_term}, {"adversarial", adversarial}}};
}

GeneratorLossGrad generator_loss_with_grad(const nn::NetworkState& critic_state, const Batch& b) {
    check_batch(b);
    const auto v = critic::spec_of(critic_state).variant;
    const double bce_term = bce(b.generated, b.real).value;
    critic::CriticTape tape;
    const auto scores = critic::forward(critic_state, generated_wiring(v, b), &tape);
    const double adversarial = -mean(scores);

    const std::vector<double> dscores(scores.size(), -1.0 / static_cast<double>(scores.size()));
    const auto cg = critic::backward(critic_state, tape, dscores);
    Tensor grad = bce_gradient(b.generated, b.real);
    add_inplace(grad, generated_input_gradient(v, cg, b));
    return {LossValue{bce_term + adversarial, {{"bce", bce_term}, {"adversarial", adversarial}}}, std::move(grad)};
}

LossValue critic_loss(const nn::NetworkState& critic_state, const Batch& b) {
    check_batch(b);
    const auto v = critic::spec_of(critic_state).variant;
    const double generated = mean(critic::forward(critic_state, generated_wiring(v, b)));
    if (v == CriticVariant::Regression) return LossValue{generated, {{"generated", generated}}};
    const double real = -mean(critic::forward(critic_state, real_wiring(v, b)));
    return LossValue{generated + real, {{"generated", generated}, {"real", real}}};
}

CriticLossGrad critic_loss_with_grad(const nn::NetworkState& critic_state, const Batch& b) {
    check_batch(b);
    const auto v = critic::spec_of(critic_state).variant;
    critic::CriticTape gen_tape;
    const auto gen_scores = critic::forward(critic_state, generated_wiring(v, b), &gen_tape);
    const double generated = mean(gen_scores);
    const double n = static_cast<double>(gen_scores.size());
    CriticLossGrad out{LossValue{generated, {{"generated", generated}}},
                       critic::backward(critic_state, gen_tape, std::vector<double>(gen_scores.size(), 1.0 / n)).params};
    if (v == CriticVariant::Regression) return out;

    critic::CriticTape real_tape;
    const auto real_scores = critic::forward(critic_state, real_wiring(v, b), &real_tape);
    const double real = -mean(real_scores);
    const auto real_grads =
        critic::backward(critic_state, real_tape, std::vector<double>(real_scores.size(), -1.0 / n)).params;
    for (std::size_t k = 0; k < out.dparams.size(); ++k) add_inplace(out.dparams[k], real_grads[k]);
    out.loss.value = generated + real;
    out.loss.components["real"] = real;
    return out;
}

nn::NetworkState clip_parameters(const nn::NetworkState& state, ClipConfig cfg) {
    nn::NetworkState out = state;
    clip_parameters_inplace(out, cfg);
    return out;
}

void clip_parameters_inplace(nn::NetworkState& state, ClipConfig cfg) {
    if (!(cfg.c > 0.0)) throw SpecError("clip bound must be positive");
    if (state.kind != "critic") throw SpecError("only critic parameters are clipped");
    for (auto& p : state.params) {
        for (double& v : p.values()) v = std::min(std::max(v, -cfg.c), cfg.c);
    }
}

}  // namespace lgan::losses
