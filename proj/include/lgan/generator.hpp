#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lgan/image.hpp"
#include "lgan/nn/network.hpp"
#include "lgan/nn/ops.hpp"

namespace lgan::generator {

struct GeneratorSpec {
    int input_size = 64;
    int depth = 2;
    int base_channels = 16;
    // One entry per encoder level; empty means base_channels doubled per level.
    std::vector<int> channel_schedule{16, 32};
    double leaky_slope = 0.2;
    bool skip_connections = true;
    double init_std = 0.02;

    static GeneratorSpec desk_scale();
    // 224x224 input, 64-128-256-512.
    static GeneratorSpec paper_scale();

    [[nodiscard]] std::vector<int> channels() const;
    void validate() const;

    [[nodiscard]] nlohmann::json to_json() const;
    static GeneratorSpec from_json(const nlohmann::json& j);
};

nn::NetworkState build_generator(const GeneratorSpec& spec, std::uint64_t seed);
GeneratorSpec spec_of(const nn::NetworkState& state);

// Intermediate values kept for the backward pass.
struct EncoderLevel {
    Tensor input, pre1, act1, pre2, act2;
    nn::PoolResult pooled;
};

struct DecoderLevel {
    Tensor input, up_pre, up_act, joined, pre1, act1, pre2, act2;
};

struct GeneratorTape {
    std::vector<EncoderLevel> encoder;
    std::vector<DecoderLevel> decoder;
    Tensor head_input;
    Tensor sigmoid_output;  // before the epsilon clamp
};

// images {N,1,S,S} -> clamped probabilities {N,1,S,S}.
Tensor forward(const nn::NetworkState& state, const Tensor& images, GeneratorTape* tape = nullptr);
ProbMask forward(const nn::NetworkState& state, const GrayImage& image);

// dprob is the loss gradient w.r.t. the clamped probabilities. Entries whose
// sigmoid output fell outside the clamp window receive zero gradient.
nn::Gradients backward(const nn::NetworkState& state, const GeneratorTape& tape, const Tensor& dprob);

struct ActivationMap {
    std::string layer;  // "encoder1", ..., "decoder1", ..., "head"
    int channel = 0;
    GrayImage map;      // min-max normalised to [0,1]
};

// One map per block (depth encoder blocks, depth decoder blocks, head): the
// channel with the largest mean absolute activation.
std::vector<ActivationMap> capture_activations(const nn::NetworkState& state, const GrayImage& image);

}  // namespace lgan::generator
