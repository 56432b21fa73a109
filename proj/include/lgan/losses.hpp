#pragma once

#include <map>
#include <string>

#include "lgan/critic.hpp"
#include "lgan/image.hpp"
#include "lgan/nn/network.hpp"

namespace lgan::losses {

// Scalar objective with its named additive parts; value == sum(components).
struct LossValue {
    double value = 0.0;
    std::map<std::string, double> components;

    [[nodiscard]] double component(const std::string& name) const { return components.at(name); }
};

// Mean over all pixels of -[t log p + (1-t) log(1-p)], p clamped to [eps, 1-eps].
LossValue bce(const Tensor& pred, const Tensor& target);
LossValue bce(const ProbMask& pred, const BinaryMask& target);
// d bce / d pred, with zero gradient where the clamp is active.
Tensor bce_gradient(const Tensor& pred, const Tensor& target);

// Inputs are batches {N,1,H,W}: generated probabilities, real masks, images.
struct Batch {
    const Tensor& generated;
    const Tensor& real;
    const Tensor& image;
};

// Critic input for the generated side of the game.
critic::CriticInput generated_wiring(critic::CriticVariant v, const Batch& b);
// Critic input for the real side. Regression has none (its loss is one-sided).
critic::CriticInput real_wiring(critic::CriticVariant v, const Batch& b);

// bce(generated, real) - mean D(generated wiring).
// components: "bce", "adversarial".
LossValue generator_loss(const nn::NetworkState& critic_state, const Batch& b);

struct GeneratorLossGrad {
    LossValue loss;
    Tensor dgenerated;  // d loss / d generated probabilities
};
GeneratorLossGrad generator_loss_with_grad(const nn::NetworkState& critic_state, const Batch& b);

// Difference-form variants: mean D(generated wiring) - mean D(real wiring).
// Regression: mean D(generated, real).
// components: "generated" and, except for Regression, "real" (already negated).
LossValue critic_loss(const nn::NetworkState& critic_state, const Batch& b);

struct CriticLossGrad {
    LossValue loss;
    nn::Gradients dparams;
};
CriticLossGrad critic_loss_with_grad(const nn::NetworkState& critic_state, const Batch& b);

struct ClipConfig {
    double c = 0.01;
};

// Every parameter p becomes min(max(p, -c), c).
nn::NetworkState clip_parameters(const nn::NetworkState& state, ClipConfig cfg);
void clip_parameters_inplace(nn::NetworkState& state, ClipConfig cfg);

}  // namespace lgan::losses
