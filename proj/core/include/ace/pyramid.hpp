#pragma once

#include "ace/tensor.hpp"

namespace ace::pyramid {

// Two-level Laplacian pyramid: a half-resolution coarse band taken by 2x2
// max pooling, and the full-resolution residual the upsampled coarse band
// misses. For images in [0,1] the residual lies in [-1, 0].
struct Decomposition {
    Tensor coarse;    // [B,C,H/2,W/2]
    Tensor residual;  // [B,C,H,W]
};

// Accepts [B,C,H,W] with even H and W. Differentiable through the tape.
Decomposition decompose(const Tensor& images);
// upsample_repeat2(coarse) + residual.
Tensor reconstruct(const Decomposition& d);
Tensor reconstruct(const Tensor& coarse, const Tensor& residual);

// Single 3x32x32 image convenience: rejects any other extents.
Decomposition decompose_image(const Tensor& image);

}  // namespace ace::pyramid
