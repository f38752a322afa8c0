#pragma once

#include <cstddef>
#include <optional>

#include "ace/tensor.hpp"

namespace ace {

enum class Mode { train, eval };

// Binary elementwise ops accept equal shapes, or a right operand whose shape
// equals the left operand's shape without its leading (batch) extent.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);

// [M,K] x [K,N] -> [M,N]
Tensor matmul(const Tensor& a, const Tensor& b);
// x [B,in] * weight [in,out] + bias [out]
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor abs(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
// ln(cosh(x)), evaluated as |x| - ln 2 once |x| > 20. Derivative tanh(x).
Tensor lncosh(const Tensor& a);
double lncosh(double x);
// Gradient passes only where lo <= x <= hi.
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor sum(const Tensor& a);
// [B, ...] -> [B], summing everything but the leading extent.
Tensor sum_rows(const Tensor& a);

// Softmax of a rank-1 tensor, max-subtracted.
Tensor softmax(const Tensor& logits);

struct Conv2dGeometry {
    std::size_t stride = 1;
    std::size_t padding = 0;
};

// Cross-correlation. input [B,C,H,W], kernels [O,C,KH,KW], optional bias [O].
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              Conv2dGeometry geometry);
Tensor conv2d(const Tensor& input, const Tensor& kernels, Conv2dGeometry geometry);

// 2x2 max pooling over [B,C,H,W] with even H, W. Backward routes to the first
// maximum in row-major order within each block.
Tensor maxpool2(const Tensor& input);
// Nearest-neighbour 2x upsampling over [B,C,h,w].
Tensor upsample_repeat2(const Tensor& input);
// [B,C,H,W] -> [B,C]
Tensor global_avg_pool(const Tensor& input);

// Per-feature normalisation over [B,F], or per-channel over [B,C,H,W].
struct BatchNorm {
    static constexpr double epsilon = 1e-5;
    static constexpr double momentum = 0.9;

    BatchNorm() = default;
    explicit BatchNorm(std::size_t features);

    Tensor gamma;  // trainable, starts at 1
    Tensor beta;   // trainable, starts at 0
    std::vector<double> running_mean;
    std::vector<double> running_var;

    std::size_t features() const { return running_mean.size(); }
};

// Train mode normalises by minibatch statistics (biased variance) and blends
// them into the running statistics (unbiased variance). Eval mode reads the
// running statistics only.
Tensor batchnorm(const Tensor& input, BatchNorm& bn, Mode mode);

}  // namespace ace
