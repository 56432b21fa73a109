#pragma once

#include <vector>

#include "lgan/tensor.hpp"

// Forward/backward kernels for the layers used by the generator and the
// critics. Backward functions return the input gradient and accumulate
// (+=) into the parameter gradients they are handed.
namespace lgan::nn {

struct ConvGeometry {
    int kernel = 3;
    int stride = 1;
    int pad = 1;

    [[nodiscard]] int out_size(int in) const { return (in + 2 * pad - kernel) / stride + 1; }
};

// weight {Cout, Cin, k, k}, bias {Cout, 1, 1, 1}
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, ConvGeometry g);
Tensor conv2d_backward(const Tensor& x, const Tensor& weight, const Tensor& dy, ConvGeometry g, Tensor& dweight,
                       Tensor& dbias);

// Transposed convolution with a 2x2 kernel and stride 2 (exact 2x upsampling).
// weight {Cin, Cout, 2, 2}, bias {Cout, 1, 1, 1}
Tensor deconv2x2(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor deconv2x2_backward(const Tensor& x, const Tensor& weight, const Tensor& dy, Tensor& dweight, Tensor& dbias);

struct PoolResult {
    Tensor output;
    std::vector<std::size_t> argmax;  // flat input index per output element
};

// 2x2 max pooling, stride 2. Odd trailing rows/columns are dropped.
PoolResult maxpool2x2(const Tensor& x);
Tensor maxpool2x2_backward(const Shape& input, const std::vector<std::size_t>& argmax, const Tensor& dy);

double leaky_relu(double x, double alpha);
Tensor leaky_relu(const Tensor& x, double alpha);
// `pre` is the activation input.
Tensor leaky_relu_backward(const Tensor& pre, const Tensor& dy, double alpha);

struct BatchNormCache {
    Tensor normalized;
    std::vector<double> inv_std;
};

inline constexpr double kBatchNormEps = 1e-5;

// Batch statistics over (N, H, W) per channel. gamma/beta {C, 1, 1, 1}.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormCache* cache);
Tensor batch_norm_backward(const BatchNormCache& cache, const Tensor& gamma, const Tensor& dy, Tensor& dgamma,
                           Tensor& dbeta);

// x is treated as {N, C*H*W}. weight {Out, In, 1, 1}, bias {Out, 1, 1, 1}.
// Output shape {N, Out, 1, 1}.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor linear_backward(const Tensor& x, const Tensor& weight, const Tensor& dy, Tensor& dweight, Tensor& dbias);

Tensor sigmoid(const Tensor& x);

}  // namespace lgan::nn
