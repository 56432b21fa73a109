#pragma once

#include "lgan/nn/network.hpp"

namespace lgan::nn {

struct AdamConfig {
    double lr = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    // Coupled L2: weight_decay * p is added to the gradient before the moments.
    double weight_decay = 5e-4;
};

// Adam moment buffers for one network. The optimiser owns the only
// mutable state of a training run.
class Adam {
public:
    Adam(const NetworkState& state, AdamConfig cfg);

    // Returns the updated state; `state` itself is left untouched.
    [[nodiscard]] NetworkState step(const NetworkState& state, const Gradients& grads);
    void step_inplace(NetworkState& state, const Gradients& grads);

    [[nodiscard]] long steps() const { return t_; }
    [[nodiscard]] const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    Gradients m_;
    Gradients v_;
    long t_ = 0;
};

}  // namespace lgan::nn
