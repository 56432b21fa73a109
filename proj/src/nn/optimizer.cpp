#include "lgan/nn/optimizer.hpp"

#include <cmath>

namespace lgan::nn {

Adam::Adam(const NetworkState& state, AdamConfig cfg)
    : cfg_(cfg), m_(zero_gradients(state)), v_(zero_gradients(state)) {
    if (!(cfg_.lr > 0 && cfg_.beta1 >= 0 && cfg_.beta1 < 1 && cfg_.beta2 >= 0 && cfg_.beta2 < 1 &&
          cfg_.weight_decay >= 0)) {
        throw SpecError("invalid Adam hyperparameters");
    }
}

NetworkState Adam::step(const NetworkState& state, const Gradients& grads) {
    NetworkState next = state;
    step_inplace(next, grads);
    return next;
}

void Adam::step_inplace(NetworkState& state, const Gradients& grads) {
    if (grads.size() != state.params.size()) throw ShapeError("gradient count does not match parameters");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < state.params.size(); ++k) {
        Tensor& p = state.params[k];
        const Tensor& g = grads[k];
        require_same_shape(p, g, "adam");
        Tensor& m = m_[k];
        Tensor& v = v_[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g[i] + cfg_.weight_decay * p[i];
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
            p[i] -= cfg_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
        }
    }
}

}  // namespace lgan::nn
