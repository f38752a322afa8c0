#include "ace/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ace {

namespace {

using Parents = std::span<const std::shared_ptr<detail::Node>>;
using Grad = std::span<const double>;

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                                shape_string(a.shape()) + " and " + shape_string(b.shape()));
}

// Returns true when b broadcasts over a's leading extent, false when shapes
// are equal; throws otherwise.
bool check_binary(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() == b.shape()) return false;
    const Shape& sa = a.shape();
    if (!sa.empty() && Shape(sa.begin() + 1, sa.end()) == b.shape()) return true;
    shape_error(op, a, b);
}

template <class F, class DF>
Tensor unary(const Tensor& a, F f, DF df) {
    auto in = a.values();
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
    return Tensor::make(a.shape(), std::move(out), {a}, [df](Grad g, Parents p) {
        double* t = Tensor::grad_target(p[0]);
        const auto& x = p[0]->value;
        for (std::size_t i = 0; i < g.size(); ++i) t[i] += g[i] * df(x[i]);
    });
}

std::size_t spatial_extent(const Tensor& t) {
    std::size_t s = 1;
    for (std::size_t i = 2; i < t.rank(); ++i) s *= t.dim(i);
    return s;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    const bool bc = check_binary("add", a, b);
    auto va = a.values();
    auto vb = b.values();
    const std::size_t n = vb.size();
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = va[i] + vb[bc ? i % n : i];
    return Tensor::make(a.shape(), std::move(out), {a, b}, [n](Grad g, Parents p) {
        if (double* ta = Tensor::grad_target(p[0])) {
            for (std::size_t i = 0; i < g.size(); ++i) ta[i] += g[i];
        }
        if (double* tb = Tensor::grad_target(p[1])) {
            for (std::size_t i = 0; i < g.size(); ++i) tb[i % n] += g[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    const bool bc = check_binary("sub", a, b);
    auto va = a.values();
    auto vb = b.values();
    const std::size_t n = vb.size();
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = va[i] - vb[bc ? i % n : i];
    return Tensor::make(a.shape(), std::move(out), {a, b}, [n](Grad g, Parents p) {
        if (double* ta = Tensor::grad_target(p[0])) {
            for (std::size_t i = 0; i < g.size(); ++i) ta[i] += g[i];
        }
        if (double* tb = Tensor::grad_target(p[1])) {
            for (std::size_t i = 0; i < g.size(); ++i) tb[i % n] -= g[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    const bool bc = check_binary("mul", a, b);
    auto va = a.values();
    auto vb = b.values();
    const std::size_t n = vb.size();
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = va[i] * vb[bc ? i % n : i];
    return Tensor::make(a.shape(), std::move(out), {a, b}, [n](Grad g, Parents p) {
        const auto& xa = p[0]->value;
        const auto& xb = p[1]->value;
        if (double* ta = Tensor::grad_target(p[0])) {
            for (std::size_t i = 0; i < g.size(); ++i) ta[i] += g[i] * xb[i % n];
        }
        if (double* tb = Tensor::grad_target(p[1])) {
            for (std::size_t i = 0; i < g.size(); ++i) tb[i % n] += g[i] * xa[i];
        }
    });
}

Tensor scale(const Tensor& a, double factor) {
    return unary(a, [factor](double x) { return factor * x; },
                 [factor](double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double offset) {
    return unary(a, [offset](double x) { return x + offset; }, [](double) { return 1.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) shape_error("matmul", a, b);
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    auto va = a.values();
    auto vb = b.values();
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double* row = out.data() + i * n;
        for (std::size_t q = 0; q < k; ++q) {
            const double aiq = va[i * k + q];
            const double* brow = vb.data() + q * n;
            for (std::size_t j = 0; j < n; ++j) row[j] += aiq * brow[j];
        }
    }
    return Tensor::make({m, n}, std::move(out), {a, b}, [m, k, n](Grad g, Parents p) {
        const auto& xa = p[0]->value;
        const auto& xb = p[1]->value;
        if (double* ta = Tensor::grad_target(p[0])) {
            for (std::size_t i = 0; i < m; ++i) {
                const double* grow = g.data() + i * n;
                for (std::size_t q = 0; q < k; ++q) {
                    const double* brow = xb.data() + q * n;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                    ta[i * k + q] += acc;
                }
            }
        }
        if (double* tb = Tensor::grad_target(p[1])) {
            for (std::size_t i = 0; i < m; ++i) {
                const double* grow = g.data() + i * n;
                for (std::size_t q = 0; q < k; ++q) {
                    const double aiq = xa[i * k + q];
                    double* trow = tb + q * n;
                    for (std::size_t j = 0; j < n; ++j) trow[j] += aiq * grow[j];
                }
            }
        }
    });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    return add(matmul(x, weight), bias);
}

Tensor abs(const Tensor& a) {
    return unary(a, [](double x) { return std::abs(x); },
                 [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Tensor exp(const Tensor& a) {
    auto in = a.values();
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::exp(in[i]);
    std::vector<double> saved = out;
    return Tensor::make(a.shape(), std::move(out), {a},
                        [y = std::move(saved)](Grad g, Parents p) {
                            double* t = Tensor::grad_target(p[0]);
                            for (std::size_t i = 0; i < g.size(); ++i) t[i] += g[i] * y[i];
                        });
}

Tensor log(const Tensor& a) {
    return unary(a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Tensor tanh(const Tensor& a) {
    return unary(a, [](double x) { return std::tanh(x); },
                 [](double x) {
                     const double t = std::tanh(x);
                     return 1.0 - t * t;
                 });
}

Tensor relu(const Tensor& a) {
    return unary(a, [](double x) { return x > 0 ? x : 0.0; },
                 [](double x) { return x > 0 ? 1.0 : 0.0; });
}

double lncosh(double x) {
    const double ax = std::abs(x);
    if (ax > 20.0) return ax - std::numbers::ln2;
    return std::log(std::cosh(x));
}

Tensor lncosh(const Tensor& a) {
    return unary(a, [](double x) { return lncosh(x); }, [](double x) { return std::tanh(x); });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    return unary(a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
                 [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    return Tensor::make({}, {s}, {a}, [](Grad g, Parents p) {
        double* t = Tensor::grad_target(p[0]);
        const std::size_t n = p[0]->value.size();
        for (std::size_t i = 0; i < n; ++i) t[i] += g[0];
    });
}

Tensor sum_rows(const Tensor& a) {
    if (a.rank() < 1) throw std::invalid_argument("sum_rows needs rank >= 1");
    const std::size_t rows = a.dim(0);
    const std::size_t cols = rows ? a.size() / rows : 0;
    auto v = a.values();
    std::vector<double> out(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += v[r * cols + c];
        out[r] = s;
    }
    return Tensor::make({rows}, std::move(out), {a}, [rows, cols](Grad g, Parents p) {
        double* t = Tensor::grad_target(p[0]);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) t[r * cols + c] += g[r];
        }
    });
}

Tensor softmax(const Tensor& logits) {
    if (logits.rank() != 1 || logits.size() == 0) {
        throw std::invalid_argument("softmax expects a non-empty vector, got " +
                                    shape_string(logits.shape()));
    }
    auto x = logits.values();
    const double top = *std::max_element(x.begin(), x.end());
    std::vector<double> y(x.size());
    double z = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::exp(x[i] - top);
        z += y[i];
    }
    for (double& v : y) v /= z;
    std::vector<double> saved = y;
    return Tensor::make(logits.shape(), std::move(y), {logits},
                        [y = std::move(saved)](Grad g, Parents p) {
                            double* t = Tensor::grad_target(p[0]);
                            double dot = 0.0;
                            for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
                            for (std::size_t i = 0; i < g.size(); ++i) t[i] += y[i] * (g[i] - dot);
                        });
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, Conv2dGeometry geometry) {
    return conv2d(input, kernels, Tensor(), geometry);
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              Conv2dGeometry geo) {
    if (input.rank() != 4 || kernels.rank() != 4 || input.dim(1) != kernels.dim(1)) {
        shape_error("conv2d", input, kernels);
    }
    if (geo.stride == 0) throw std::invalid_argument("conv2d: stride must be positive");
    const std::size_t batch = input.dim(0), chan = input.dim(1), h = input.dim(2),
                      w = input.dim(3);
    const std::size_t outc = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
    if (h + 2 * geo.padding < kh || w + 2 * geo.padding < kw) {
        throw std::invalid_argument("conv2d: kernel " + shape_string(kernels.shape()) +
                                    " larger than padded input " +
                                    shape_string(input.shape()));
    }
    const std::size_t oh = (h + 2 * geo.padding - kh) / geo.stride + 1;
    const std::size_t ow = (w + 2 * geo.padding - kw) / geo.stride + 1;
    const std::size_t ck = chan * kh * kw;
    const std::size_t positions = oh * ow;
    const bool has_bias = bias.defined();
    if (has_bias && bias.shape() != Shape{outc}) shape_error("conv2d bias", kernels, bias);

    // cols[k, p]: input value under kernel tap k at output position p.
    auto im2col = [=](const double* img, std::vector<double>& cols) {
        cols.assign(ck * positions, 0.0);
        for (std::size_t c = 0; c < chan; ++c) {
            for (std::size_t u = 0; u < kh; ++u) {
                for (std::size_t v = 0; v < kw; ++v) {
                    double* row = cols.data() + ((c * kh + u) * kw + v) * positions;
                    for (std::size_t oy = 0; oy < oh; ++oy) {
                        const std::ptrdiff_t iy =
                            static_cast<std::ptrdiff_t>(oy * geo.stride + u) -
                            static_cast<std::ptrdiff_t>(geo.padding);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                        for (std::size_t ox = 0; ox < ow; ++ox) {
                            const std::ptrdiff_t ix =
                                static_cast<std::ptrdiff_t>(ox * geo.stride + v) -
                                static_cast<std::ptrdiff_t>(geo.padding);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                            row[oy * ow + ox] = img[(c * h + iy) * w + ix];
                        }
                    }
                }
            }
        }
    };

    auto in = input.values();
    auto kv = kernels.values();
    std::vector<double> out(batch * outc * positions, 0.0);
    std::vector<double> cols;
    for (std::size_t b = 0; b < batch; ++b) {
        im2col(in.data() + b * chan * h * w, cols);
        double* ob = out.data() + b * outc * positions;
        for (std::size_t o = 0; o < outc; ++o) {
            double* orow = ob + o * positions;
            if (has_bias) std::fill(orow, orow + positions, bias.values()[o]);
            for (std::size_t k = 0; k < ck; ++k) {
                const double wk = kv[o * ck + k];
                const double* crow = cols.data() + k * positions;
                for (std::size_t q = 0; q < positions; ++q) orow[q] += wk * crow[q];
            }
        }
    }

    std::vector<Tensor> parents{input, kernels};
    if (has_bias) parents.push_back(bias);
    return Tensor::make(
        {batch, outc, oh, ow}, std::move(out), std::move(parents),
        [=](Grad g, Parents p) {
            const auto& xin = p[0]->value;
            const auto& xk = p[1]->value;
            double* tin = Tensor::grad_target(p[0]);
            double* tk = Tensor::grad_target(p[1]);
            double* tbias = has_bias ? Tensor::grad_target(p[2]) : nullptr;
            std::vector<double> cols_b;
            std::vector<double> dcols;
            for (std::size_t b = 0; b < batch; ++b) {
                const double* gb = g.data() + b * outc * positions;
                if (tbias) {
                    for (std::size_t o = 0; o < outc; ++o) {
                        for (std::size_t q = 0; q < positions; ++q) tbias[o] += gb[o * positions + q];
                    }
                }
                if (tk) {
                    im2col(xin.data() + b * chan * h * w, cols_b);
                    for (std::size_t o = 0; o < outc; ++o) {
                        const double* grow = gb + o * positions;
                        for (std::size_t k = 0; k < ck; ++k) {
                            const double* crow = cols_b.data() + k * positions;
                            double acc = 0.0;
                            for (std::size_t q = 0; q < positions; ++q) acc += grow[q] * crow[q];
                            tk[o * ck + k] += acc;
                        }
                    }
                }
                if (tin) {
                    dcols.assign(ck * positions, 0.0);
                    for (std::size_t o = 0; o < outc; ++o) {
                        const double* grow = gb + o * positions;
                        for (std::size_t k = 0; k < ck; ++k) {
                            const double wk = xk[o * ck + k];
                            double* drow = dcols.data() + k * positions;
                            for (std::size_t q = 0; q < positions; ++q) drow[q] += wk * grow[q];
                        }
                    }
                    double* tb = tin + b * chan * h * w;
                    for (std::size_t c = 0; c < chan; ++c) {
                        for (std::size_t u = 0; u < kh; ++u) {
                            for (std::size_t v = 0; v < kw; ++v) {
                                const double* drow = dcols.data() + ((c * kh + u) * kw + v) * positions;
                                for (std::size_t oy = 0; oy < oh; ++oy) {
                                    const std::ptrdiff_t iy =
                                        static_cast<std::ptrdiff_t>(oy * geo.stride + u) -
                                        static_cast<std::ptrdiff_t>(geo.padding);
                                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                                    for (std::size_t ox = 0; ox < ow; ++ox) {
                                        const std::ptrdiff_t ix =
                                            static_cast<std::ptrdiff_t>(ox * geo.stride + v) -
                                            static_cast<std::ptrdiff_t>(geo.padding);
                                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                                        tb[(c * h + iy) * w + ix] += drow[oy * ow + ox];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        });
}

Tensor maxpool2(const Tensor& input) {
    if (input.rank() != 4 || input.dim(2) % 2 != 0 || input.dim(3) % 2 != 0) {
        throw std::invalid_argument("maxpool2 needs [B,C,H,W] with even H and W, got " +
                                    shape_string(input.shape()));
    }
    const std::size_t planes = input.dim(0) * input.dim(1);
    const std::size_t h = input.dim(2), w = input.dim(3), oh = h / 2, ow = w / 2;
    auto in = input.values();
    std::vector<double> out(planes * oh * ow);
    std::vector<std::size_t> source(out.size());
    for (std::size_t pl = 0; pl < planes; ++pl) {
        const std::size_t base = pl * h * w;
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                const std::size_t cand[4] = {base + (2 * y) * w + 2 * x, base + (2 * y) * w + 2 * x + 1,
                                             base + (2 * y + 1) * w + 2 * x,
                                             base + (2 * y + 1) * w + 2 * x + 1};
                std::size_t best = cand[0];
                for (int c = 1; c < 4; ++c) {
                    if (in[cand[c]] > in[best]) best = cand[c];
                }
                const std::size_t o = (pl * oh + y) * ow + x;
                out[o] = in[best];
                source[o] = best;
            }
        }
    }
    return Tensor::make({input.dim(0), input.dim(1), oh, ow}, std::move(out), {input},
                        [source = std::move(source)](Grad g, Parents p) {
                            double* t = Tensor::grad_target(p[0]);
                            for (std::size_t i = 0; i < g.size(); ++i) t[source[i]] += g[i];
                        });
}

Tensor upsample_repeat2(const Tensor& input) {
    if (input.rank() != 4) {
        throw std::invalid_argument("upsample_repeat2 needs [B,C,h,w], got " +
                                    shape_string(input.shape()));
    }
    const std::size_t planes = input.dim(0) * input.dim(1);
    const std::size_t h = input.dim(2), w = input.dim(3), oh = 2 * h, ow = 2 * w;
    auto in = input.values();
    std::vector<double> out(planes * oh * ow);
    for (std::size_t pl = 0; pl < planes; ++pl) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                out[(pl * oh + y) * ow + x] = in[(pl * h + y / 2) * w + x / 2];
            }
        }
    }
    return Tensor::make({input.dim(0), input.dim(1), oh, ow}, std::move(out), {input},
                        [=](Grad g, Parents p) {
                            double* t = Tensor::grad_target(p[0]);
                            for (std::size_t pl = 0; pl < planes; ++pl) {
                                for (std::size_t y = 0; y < oh; ++y) {
                                    for (std::size_t x = 0; x < ow; ++x) {
                                        t[(pl * h + y / 2) * w + x / 2] += g[(pl * oh + y) * ow + x];
                                    }
                                }
                            }
                        });
}

Tensor global_avg_pool(const Tensor& input) {
    if (input.rank() != 4) {
        throw std::invalid_argument("global_avg_pool needs [B,C,H,W], got " +
                                    shape_string(input.shape()));
    }
    const std::size_t planes = input.dim(0) * input.dim(1);
    const std::size_t area = input.dim(2) * input.dim(3);
    auto in = input.values();
    std::vector<double> out(planes, 0.0);
    for (std::size_t pl = 0; pl < planes; ++pl) {
        double s = 0.0;
        for (std::size_t i = 0; i < area; ++i) s += in[pl * area + i];
        out[pl] = s / static_cast<double>(area);
    }
    return Tensor::make({input.dim(0), input.dim(1)}, std::move(out), {input},
                        [planes, area](Grad g, Parents p) {
                            double* t = Tensor::grad_target(p[0]);
                            const double inv = 1.0 / static_cast<double>(area);
                            for (std::size_t pl = 0; pl < planes; ++pl) {
                                for (std::size_t i = 0; i < area; ++i) t[pl * area + i] += g[pl] * inv;
                            }
                        });
}

BatchNorm::BatchNorm(std::size_t features)
    : gamma(Tensor::full({features}, 1.0, true)),
      beta(Tensor::zeros({features}, true)),
      running_mean(features, 0.0),
      running_var(features, 1.0) {}

Tensor batchnorm(const Tensor& input, BatchNorm& bn, Mode mode) {
    if ((input.rank() != 2 && input.rank() != 4) || input.dim(1) != bn.features()) {
        throw std::invalid_argument("batchnorm: input " + shape_string(input.shape()) +
                                    " does not match " + std::to_string(bn.features()) +
                                    " features");
    }
    const std::size_t batch = input.dim(0), feats = input.dim(1);
    const std::size_t spatial = spatial_extent(input);
    const std::size_t count = batch * spatial;
    if (mode == Mode::train && batch < 2) {
        throw std::invalid_argument("batchnorm: train mode needs a batch of at least 2, got " +
                                    std::to_string(batch));
    }
    auto x = input.values();
    auto at = [=](std::size_t b, std::size_t f, std::size_t s) {
        return (b * feats + f) * spatial + s;
    };

    std::vector<double> mean(feats), inv_std(feats);
    if (mode == Mode::train) {
        for (std::size_t f = 0; f < feats; ++f) {
            double m = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t s = 0; s < spatial; ++s) m += x[at(b, f, s)];
            }
            m /= static_cast<double>(count);
            double v = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t s = 0; s < spatial; ++s) {
                    const double d = x[at(b, f, s)] - m;
                    v += d * d;
                }
            }
            v /= static_cast<double>(count);
            mean[f] = m;
            inv_std[f] = 1.0 / std::sqrt(v + BatchNorm::epsilon);
            const double unbiased = v * static_cast<double>(count) / static_cast<double>(count - 1);
            bn.running_mean[f] = BatchNorm::momentum * bn.running_mean[f] + (1.0 - BatchNorm::momentum) * m;
            bn.running_var[f] = BatchNorm::momentum * bn.running_var[f] + (1.0 - BatchNorm::momentum) * unbiased;
        }
    } else {
        for (std::size_t f = 0; f < feats; ++f) {
            mean[f] = bn.running_mean[f];
            inv_std[f] = 1.0 / std::sqrt(bn.running_var[f] + BatchNorm::epsilon);
        }
    }

    auto gamma = bn.gamma.values();
    auto beta = bn.beta.values();
    std::vector<double> xhat(x.size());
    std::vector<double> out(x.size());
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t f = 0; f < feats; ++f) {
            for (std::size_t s = 0; s < spatial; ++s) {
                const std::size_t i = at(b, f, s);
                xhat[i] = (x[i] - mean[f]) * inv_std[f];
                out[i] = gamma[f] * xhat[i] + beta[f];
            }
        }
    }

    const bool train = mode == Mode::train;
    return Tensor::make(
        input.shape(), std::move(out), {input, bn.gamma, bn.beta},
        [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Grad g, Parents p) {
            const auto& gam = p[1]->value;
            double* tx = Tensor::grad_target(p[0]);
            double* tg = Tensor::grad_target(p[1]);
            double* tb = Tensor::grad_target(p[2]);
            const double n = static_cast<double>(count);
            for (std::size_t f = 0; f < feats; ++f) {
                double sum_g = 0.0, sum_gx = 0.0;
                for (std::size_t b = 0; b < batch; ++b) {
                    for (std::size_t s = 0; s < spatial; ++s) {
                        const std::size_t i = at(b, f, s);
                        sum_g += g[i];
                        sum_gx += g[i] * xhat[i];
                    }
                }
                if (tg) tg[f] += sum_gx;
                if (tb) tb[f] += sum_g;
                if (!tx) continue;
                const double k = gam[f] * inv_std[f];
                for (std::size_t b = 0; b < batch; ++b) {
                    for (std::size_t s = 0; s < spatial; ++s) {
                        const std::size_t i = at(b, f, s);
                        if (train) {
                            tx[i] += k * (g[i] - sum_g / n - xhat[i] * sum_gx / n);
                        } else {
                            tx[i] += k * g[i];
                        }
                    }
                }
            }
        });
}

}  // namespace ace
