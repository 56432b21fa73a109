#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lgan/image.hpp"
#include "lgan/nn/network.hpp"
#include "lgan/nn/ops.hpp"

namespace lgan::critic {

// The five critic wirings.
enum class CriticVariant { Basic, Product, EarlyFusion, LateFusion, Regression };

inline constexpr std::array kAllVariants{CriticVariant::Basic, CriticVariant::Product, CriticVariant::EarlyFusion,
                                         CriticVariant::LateFusion, CriticVariant::Regression};

// Short CLI names: basic, product, ef, lf, regression.
std::string_view short_name(CriticVariant v);
// Report names: LGAN_Basic, LGAN_Product, LGAN_EF, LGAN_LF, LGAN_Regression.
std::string_view display_name(CriticVariant v);
std::optional<CriticVariant> parse_variant(std::string_view name);

// Number of separate input arrays the critic consumes (1 or 2).
int input_arity(CriticVariant v);

struct CriticSpec {
    CriticVariant variant = CriticVariant::Basic;
    int input_size = 64;
    std::vector<int> channel_schedule{16, 32, 64};
    double leaky_slope = 0.2;
    bool use_batchnorm = true;
    std::vector<int> fc_widths{256, 1};
    double init_std = 0.02;
    // Extra stride-1 blocks on the image branch of the late-fusion critic.
    int late_fusion_extra_blocks = 2;

    static CriticSpec desk_scale(CriticVariant v, int input_size = 64);
    // 32-64-128-256 channels.
    static CriticSpec paper_scale(CriticVariant v, int input_size = 224);

    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
    static CriticSpec from_json(const nlohmann::json& j);
};

struct ConvBlock {
    int in_channels = 1;
    int out_channels = 1;
    nn::ConvGeometry geometry{4, 2, 1};
    bool batchnorm = false;
};

// Resolved layer layout: input branches (one per input array), optional
// channel concatenation, shared trunk, then fully-connected head.
struct CriticTopology {
    std::vector<std::vector<ConvBlock>> branches;
    std::vector<ConvBlock> trunk;
    int flat_features = 0;
    std::vector<int> fc_widths;
};

CriticTopology topology(const CriticSpec& spec);

nn::NetworkState build_critic(const CriticSpec& spec, std::uint64_t seed);
CriticSpec spec_of(const nn::NetworkState& state);

// Batch of critic inputs: one array for Basic/Product/EarlyFusion, two for
// LateFusion (mask, image) and Regression (generated mask, real mask).
struct CriticInput {
    std::vector<Tensor> arrays;
};

// Tensor-level wiring of a {N,1,H,W} mask batch. `other_mask` is required
// for Regression and ignored otherwise.
CriticInput wire_inputs(CriticVariant v, const Tensor& mask, const Tensor& image, const Tensor* other_mask = nullptr);

template <class Mask>
CriticInput wire_inputs(CriticVariant v, const Mask& mask, const GrayImage& image,
                        const BinaryMask* other_mask = nullptr) {
    const Tensor m = to_tensor(std::span<const Mask>(&mask, 1));
    const Tensor i = to_tensor(std::span<const GrayImage>(&image, 1));
    if (other_mask) {
        const Tensor o = to_tensor(std::span<const BinaryMask>(other_mask, 1));
        return wire_inputs(v, m, i, &o);
    }
    return wire_inputs(v, m, i, nullptr);
}

struct BlockTape {
    Tensor input, conv_out, bn_out;
    nn::BatchNormCache bn;
};

struct CriticTape {
    std::vector<std::vector<BlockTape>> branches;
    std::vector<int> branch_channels;
    std::vector<BlockTape> trunk;
    Shape features_shape;  // trunk output before flattening
    std::vector<Tensor> fc_inputs;
    std::vector<Tensor> fc_pre;  // pre-activation of every hidden FC layer
};

// One unbounded score per batch element.
std::vector<double> forward(const nn::NetworkState& state, const CriticInput& input, CriticTape* tape = nullptr);

struct CriticGradients {
    nn::Gradients params;
    std::vector<Tensor> inputs;  // parallel to CriticInput::arrays
};

CriticGradients backward(const nn::NetworkState& state, const CriticTape& tape, const std::vector<double>& dscores);

}  // namespace lgan::critic
