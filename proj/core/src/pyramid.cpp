#include "ace/pyramid.hpp"

#include <stdexcept>

#include "ace/ops.hpp"

namespace ace::pyramid {

Decomposition decompose(const Tensor& images) {
    Tensor coarse = maxpool2(images);
    Tensor residual = sub(images, upsample_repeat2(coarse));
    return {std::move(coarse), std::move(residual)};
}

Tensor reconstruct(const Tensor& coarse, const Tensor& residual) {
    if (coarse.rank() != 4 || residual.rank() != 4 || coarse.dim(0) != residual.dim(0) ||
        coarse.dim(1) != residual.dim(1) || 2 * coarse.dim(2) != residual.dim(2) ||
        2 * coarse.dim(3) != residual.dim(3)) {
        throw std::invalid_argument("pyramid: coarse band " + shape_string(coarse.shape()) +
                                    " does not match residual " + shape_string(residual.shape()));
    }
    return add(upsample_repeat2(coarse), residual);
}

Tensor reconstruct(const Decomposition& d) { return reconstruct(d.coarse, d.residual); }

Decomposition decompose_image(const Tensor& image) {
    if (image.shape() != Shape{3, 32, 32}) {
        throw std::invalid_argument("pyramid: expected a 3x32x32 image, got " +
                                    shape_string(image.shape()));
    }
    auto d = decompose(image.reshape({1, 3, 32, 32}));
    return {d.coarse.reshape({3, 16, 16}), d.residual.reshape({3, 32, 32})};
}

}  // namespace ace::pyramid
