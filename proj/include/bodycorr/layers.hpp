#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bodycorr/tensor.hpp"

namespace bodycorr {

enum class PadMode { Zero, Replicate };

// Output size ceil(in/stride) with the padding split before/after; this keeps
// the downsample-then-restore bookkeeping of the schedule exact.
struct ConvGeometry {
    int kernel = 1, stride = 1;
    int pad_top = 0, pad_left = 0;
    int out_h = 0, out_w = 0;

    static ConvGeometry same(int in_h, int in_w, int kernel, int stride) {
        ConvGeometry g;
        g.kernel = kernel;
        g.stride = stride;
        g.out_h = (in_h + stride - 1) / stride;
        g.out_w = (in_w + stride - 1) / stride;
        const int pad_h = std::max(0, (g.out_h - 1) * stride + kernel - in_h);
        const int pad_w = std::max(0, (g.out_w - 1) * stride + kernel - in_w);
        g.pad_top = pad_h / 2;
        g.pad_left = pad_w / 2;
        return g;
    }
};

namespace detail {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMajorMap =
    Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename Scalar>
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Patch matrix: rows indexed by (channel, ky, kx), one column per output pixel.
template <typename Scalar>
MatrixX<Scalar> im2col(const Tensor<Scalar>& input, int batch, const ConvGeometry& g,
                       PadMode pad) {
    const int k = g.kernel;
    MatrixX<Scalar> cols(static_cast<Eigen::Index>(input.c) * k * k,
                         static_cast<Eigen::Index>(g.out_h) * g.out_w);
    for (int oy = 0; oy < g.out_h; ++oy) {
        for (int ox = 0; ox < g.out_w; ++ox) {
            const Eigen::Index col = static_cast<Eigen::Index>(oy) * g.out_w + ox;
            Eigen::Index row = 0;
            for (int ic = 0; ic < input.c; ++ic) {
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx, ++row) {
                        int iy = oy * g.stride - g.pad_top + ky;
                        int ix = ox * g.stride - g.pad_left + kx;
                        if (pad == PadMode::Replicate) {
                            iy = std::clamp(iy, 0, input.h - 1);
                            ix = std::clamp(ix, 0, input.w - 1);
                            cols(row, col) = input.at(batch, ic, iy, ix);
                        } else if (iy >= 0 && iy < input.h && ix >= 0 && ix < input.w) {
                            cols(row, col) = input.at(batch, ic, iy, ix);
                        } else {
                            cols(row, col) = Scalar(0);
                        }
                    }
                }
            }
        }
    }
    return cols;
}

template <typename Scalar>
void col2im_add(const MatrixX<Scalar>& cols, Tensor<Scalar>& grad_input, int batch,
                const ConvGeometry& g, PadMode pad) {
    const int k = g.kernel;
    for (int oy = 0; oy < g.out_h; ++oy) {
        for (int ox = 0; ox < g.out_w; ++ox) {
            const Eigen::Index col = static_cast<Eigen::Index>(oy) * g.out_w + ox;
            Eigen::Index row = 0;
            for (int ic = 0; ic < grad_input.c; ++ic) {
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx, ++row) {
                        int iy = oy * g.stride - g.pad_top + ky;
                        int ix = ox * g.stride - g.pad_left + kx;
                        if (pad == PadMode::Replicate) {
                            iy = std::clamp(iy, 0, grad_input.h - 1);
                            ix = std::clamp(ix, 0, grad_input.w - 1);
                        } else if (iy < 0 || iy >= grad_input.h || ix < 0 || ix >= grad_input.w) {
                            continue;
                        }
                        grad_input.at(batch, ic, iy, ix) += cols(row, col);
                    }
                }
            }
        }
    }
}

}  // namespace detail

// Cross-correlation. weights has shape (out_channels, in_channels, k, k); the
// bias has one entry per output channel.
template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                      const Eigen::Array<Scalar, Eigen::Dynamic, 1>& bias, int stride,
                      PadMode pad = PadMode::Zero) {
    if (weights.c != input.c) {
        throw std::invalid_argument("conv2d: channel mismatch, input " + input.shape_string() +
                                    " vs weights " + weights.shape_string());
    }
    if (weights.h != weights.w) throw std::invalid_argument("conv2d: kernel must be square");
    if (bias.size() != weights.n) throw std::invalid_argument("conv2d: bias size mismatch");
    const ConvGeometry g = ConvGeometry::same(input.h, input.w, weights.h, stride);
    const Eigen::Index k2 = static_cast<Eigen::Index>(weights.c) * weights.h * weights.w;
    detail::ConstRowMajorMap<Scalar> wmat(weights.data.data(), weights.n, k2);

    Tensor<Scalar> out(input.n, weights.n, g.out_h, g.out_w);
    const Eigen::Index plane = static_cast<Eigen::Index>(g.out_h) * g.out_w;
    for (int b = 0; b < input.n; ++b) {
        const auto cols = detail::im2col(input, b, g, pad);
        detail::RowMajorMap<Scalar> omat(out.data.data() + out.index(b, 0, 0, 0), weights.n,
                                         plane);
        omat.noalias() = wmat * cols;
        omat.colwise() += Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(bias.matrix());
    }
    return out;
}

template <typename Scalar>
struct ConvGrads {
    Tensor<Scalar> input;
    Tensor<Scalar> weights;
    Eigen::Array<Scalar, Eigen::Dynamic, 1> bias;
};

template <typename Scalar>
ConvGrads<Scalar> conv2d_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                                  const Tensor<Scalar>& grad_out, int stride,
                                  PadMode pad = PadMode::Zero) {
    const ConvGeometry g = ConvGeometry::same(input.h, input.w, weights.h, stride);
    if (grad_out.n != input.n || grad_out.c != weights.n || grad_out.h != g.out_h ||
        grad_out.w != g.out_w) {
        throw std::invalid_argument("conv2d_backward: gradient shape mismatch");
    }
    const Eigen::Index k2 = static_cast<Eigen::Index>(weights.c) * weights.h * weights.w;
    const Eigen::Index plane = static_cast<Eigen::Index>(g.out_h) * g.out_w;
    detail::ConstRowMajorMap<Scalar> wmat(weights.data.data(), weights.n, k2);

    ConvGrads<Scalar> grads;
    grads.input.resize(input.n, input.c, input.h, input.w);
    grads.weights.resize(weights.n, weights.c, weights.h, weights.w);
    grads.bias.setZero(weights.n);
    detail::RowMajorMap<Scalar> gwmat(grads.weights.data.data(), weights.n, k2);

    for (int b = 0; b < input.n; ++b) {
        detail::ConstRowMajorMap<Scalar> gomat(grad_out.data.data() + grad_out.index(b, 0, 0, 0),
                                               weights.n, plane);
        const auto cols = detail::im2col(input, b, g, pad);
        gwmat.noalias() += gomat * cols.transpose();
        grads.bias += gomat.rowwise().sum().array();
        const detail::MatrixX<Scalar> gcols = wmat.transpose() * gomat;
        detail::col2im_add(gcols, grads.input, b, g, pad);
    }
    return grads;
}

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& input) {
    Tensor<Scalar> out = input;
    out.data = out.data.max(Scalar(0));
    return out;
}

template <typename Scalar>
Tensor<Scalar> relu_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& grad_out) {
    Tensor<Scalar> grad = grad_out;
    grad.data *= (input.data > Scalar(0)).template cast<Scalar>();
    return grad;
}

// Across-channel local response normalization.
struct LrnConfig {
    int window = 5;
    double alpha = 1e-4;
    double beta = 0.75;
    double k = 2.0;
};

template <typename Scalar>
Tensor<Scalar> lrn(const Tensor<Scalar>& input, const LrnConfig& cfg) {
    Tensor<Scalar> out(input.n, input.c, input.h, input.w);
    const int half = cfg.window / 2;
    for (int b = 0; b < input.n; ++b) {
        for (int y = 0; y < input.h; ++y) {
            for (int x = 0; x < input.w; ++x) {
                for (int c = 0; c < input.c; ++c) {
                    Scalar sum = 0;
                    const int c0 = std::max(0, c - half), c1 = std::min(input.c - 1, c + half);
                    for (int j = c0; j <= c1; ++j) {
                        const Scalar v = input.at(b, j, y, x);
                        sum += v * v;
                    }
                    const Scalar denom = Scalar(cfg.k) + Scalar(cfg.alpha) * sum;
                    out.at(b, c, y, x) =
                        input.at(b, c, y, x) * std::pow(denom, Scalar(-cfg.beta));
                }
            }
        }
    }
    return out;
}

template <typename Scalar>
Tensor<Scalar> lrn_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& grad_out,
                            const LrnConfig& cfg) {
    Tensor<Scalar> grad(input.n, input.c, input.h, input.w);
    const int half = cfg.window / 2;
    const Scalar alpha = Scalar(cfg.alpha), beta = Scalar(cfg.beta), k = Scalar(cfg.k);
    std::vector<Scalar> denom(static_cast<size_t>(input.c));
    for (int b = 0; b < input.n; ++b) {
        for (int y = 0; y < input.h; ++y) {
            for (int x = 0; x < input.w; ++x) {
                for (int c = 0; c < input.c; ++c) {
                    Scalar sum = 0;
                    const int c0 = std::max(0, c - half), c1 = std::min(input.c - 1, c + half);
                    for (int j = c0; j <= c1; ++j) {
                        const Scalar v = input.at(b, j, y, x);
                        sum += v * v;
                    }
                    denom[static_cast<size_t>(c)] = k + alpha * sum;
                }
                for (int i = 0; i < input.c; ++i) {
                    // d out_c / d x_i summed over the channels whose window
                    // covers i, plus the direct term at c = i.
                    Scalar g = grad_out.at(b, i, y, x) *
                               std::pow(denom[static_cast<size_t>(i)], -beta);
                    Scalar cross = 0;
                    const int c0 = std::max(0, i - half), c1 = std::min(input.c - 1, i + half);
                    for (int c = c0; c <= c1; ++c) {
                        cross += grad_out.at(b, c, y, x) * input.at(b, c, y, x) *
                                 std::pow(denom[static_cast<size_t>(c)], -beta - 1);
                    }
                    g -= Scalar(2) * alpha * beta * input.at(b, i, y, x) * cross;
                    grad.at(b, i, y, x) = g;
                }
            }
        }
    }
    return grad;
}

template <typename Scalar>
struct PoolResult {
    Tensor<Scalar> output;
    PhaseMap phase;
    std::vector<Eigen::Index> argmax;  // flat input index per output element
    int padded_h = 0, padded_w = 0;    // input size after replicate padding to even
};

// 3x3 max pooling with stride 2, evaluated at all four phase offsets; each
// input copy spawns four output copies so that interleaving can restore the
// full resolution later. Odd inputs are replicate-padded to even first.
template <typename Scalar>
PoolResult<Scalar> maxpool_all_offsets(const Tensor<Scalar>& input, const PhaseMap& phase) {
    if (input.n != phase.copies()) {
        throw std::invalid_argument("maxpool_all_offsets: phase copy count mismatch");
    }
    const Tensor<Scalar>* src = &input;
    Tensor<Scalar> padded;
    if (input.h % 2 != 0 || input.w % 2 != 0) {
        const int ph = input.h + input.h % 2, pw = input.w + input.w % 2;
        padded.resize(input.n, input.c, ph, pw);
        for (int b = 0; b < input.n; ++b)
            for (int c = 0; c < input.c; ++c)
                for (int y = 0; y < ph; ++y)
                    for (int x = 0; x < pw; ++x)
                        padded.at(b, c, y, x) =
                            input.at(b, c, std::min(y, input.h - 1), std::min(x, input.w - 1));
        src = &padded;
    }
    const int h = src->h, w = src->w;
    const int oh = h / 2, ow = w / 2;

    PoolResult<Scalar> result;
    result.padded_h = h;
    result.padded_w = w;
    result.output.resize(input.n * 4, input.c, oh, ow);
    result.argmax.resize(static_cast<size_t>(result.output.size()));
    result.phase.scale = phase.scale * 2;
    result.phase.offsets.clear();
    for (const auto& [py, px] : phase.offsets) {
        for (int oy = 0; oy < 2; ++oy) {
            for (int ox = 0; ox < 2; ++ox) {
                result.phase.offsets.emplace_back(py + phase.scale * oy, px + phase.scale * ox);
            }
        }
    }

    for (int b = 0; b < input.n; ++b) {
        for (int oy = 0; oy < 2; ++oy) {
            for (int ox = 0; ox < 2; ++ox) {
                const int out_b = b * 4 + oy * 2 + ox;
                for (int c = 0; c < input.c; ++c) {
                    for (int y = 0; y < oh; ++y) {
                        for (int x = 0; x < ow; ++x) {
                            const int cy = 2 * y + oy, cx = 2 * x + ox;
                            Scalar best = -std::numeric_limits<Scalar>::infinity();
                            Eigen::Index best_idx = 0;
                            for (int dy = -1; dy <= 1; ++dy) {
                                const int iy = cy + dy;
                                if (iy < 0 || iy >= h) continue;
                                for (int dx = -1; dx <= 1; ++dx) {
                                    const int ix = cx + dx;
                                    if (ix < 0 || ix >= w) continue;
                                    const Scalar v = src->at(b, c, iy, ix);
                                    if (v > best) {  // strict: first max in scan order wins
                                        best = v;
                                        best_idx = src->index(b, c, iy, ix);
                                    }
                                }
                            }
                            const Eigen::Index o = result.output.index(out_b, c, y, x);
                            result.output.data[o] = best;
                            result.argmax[static_cast<size_t>(o)] = best_idx;
                        }
                    }
                }
            }
        }
    }
    return result;
}

template <typename Scalar>
Tensor<Scalar> maxpool_all_offsets_backward(const Tensor<Scalar>& input,
                                            const PoolResult<Scalar>& pooled,
                                            const Tensor<Scalar>& grad_out) {
    if (!grad_out.same_shape(pooled.output)) {
        throw std::invalid_argument("maxpool backward: gradient shape mismatch");
    }
    Tensor<Scalar> grad_padded(input.n, input.c, pooled.padded_h, pooled.padded_w);
    for (Eigen::Index o = 0; o < grad_out.size(); ++o) {
        grad_padded.data[pooled.argmax[static_cast<size_t>(o)]] += grad_out.data[o];
    }
    if (pooled.padded_h == input.h && pooled.padded_w == input.w) return grad_padded;
    // Fold replicate-padding gradients back onto the edge pixels.
    Tensor<Scalar> grad(input.n, input.c, input.h, input.w);
    for (int b = 0; b < input.n; ++b)
        for (int c = 0; c < input.c; ++c)
            for (int y = 0; y < pooled.padded_h; ++y)
                for (int x = 0; x < pooled.padded_w; ++x)
                    grad.at(b, c, std::min(y, input.h - 1), std::min(x, input.w - 1)) +=
                        grad_padded.at(b, c, y, x);
    return grad;
}

// Scatters the phase copies back onto the full-resolution grid.
template <typename Scalar>
Tensor<Scalar> interleave(const Tensor<Scalar>& input, const PhaseMap& phase) {
    if (input.n != phase.copies()) {
        throw std::invalid_argument("interleave: copy count does not match phase map");
    }
    const int s = phase.scale;
    if (static_cast<int>(phase.offsets.size()) != s * s) {
        throw std::invalid_argument("interleave: offsets do not tile the phase grid");
    }
    Tensor<Scalar> out(1, input.c, input.h * s, input.w * s);
    std::vector<char> covered(static_cast<size_t>(s) * s, 0);
    for (int b = 0; b < input.n; ++b) {
        const auto [py, px] = phase.offsets[static_cast<size_t>(b)];
        if (py < 0 || py >= s || px < 0 || px >= s || covered[static_cast<size_t>(py) * s + px]) {
            throw std::invalid_argument("interleave: offsets do not tile the phase grid");
        }
        covered[static_cast<size_t>(py) * s + px] = 1;
        for (int c = 0; c < input.c; ++c)
            for (int y = 0; y < input.h; ++y)
                for (int x = 0; x < input.w; ++x)
                    out.at(0, c, s * y + py, s * x + px) = input.at(b, c, y, x);
    }
    return out;
}

template <typename Scalar>
Tensor<Scalar> interleave_backward(const Tensor<Scalar>& input, const PhaseMap& phase,
                                   const Tensor<Scalar>& grad_out) {
    const int s = phase.scale;
    Tensor<Scalar> grad(input.n, input.c, input.h, input.w);
    for (int b = 0; b < input.n; ++b) {
        const auto [py, px] = phase.offsets[static_cast<size_t>(b)];
        for (int c = 0; c < input.c; ++c)
            for (int y = 0; y < input.h; ++y)
                for (int x = 0; x < input.w; ++x)
                    grad.at(b, c, y, x) = grad_out.at(0, c, s * y + py, s * x + px);
    }
    return grad;
}

// Learned upsampling: a 3x3 convolution (replicate-padded) emits a
// factor x factor block of d-channel outputs per input pixel. Output channel
// index is d_index * factor^2 + by * factor + bx.
template <typename Scalar>
Tensor<Scalar> upsample3x3(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                           const Eigen::Array<Scalar, Eigen::Dynamic, 1>& bias, int factor) {
    if (weights.n % (factor * factor) != 0) {
        throw std::invalid_argument("upsample3x3: weight count incompatible with factor");
    }
    const Tensor<Scalar> packed = conv2d(input, weights, bias, 1, PadMode::Replicate);
    const int d = weights.n / (factor * factor);
    Tensor<Scalar> out(input.n, d, input.h * factor, input.w * factor);
    for (int b = 0; b < input.n; ++b)
        for (int c = 0; c < d; ++c)
            for (int by = 0; by < factor; ++by)
                for (int bx = 0; bx < factor; ++bx) {
                    const int pc = c * factor * factor + by * factor + bx;
                    for (int y = 0; y < input.h; ++y)
                        for (int x = 0; x < input.w; ++x)
                            out.at(b, c, factor * y + by, factor * x + bx) =
                                packed.at(b, pc, y, x);
                }
    return out;
}

template <typename Scalar>
ConvGrads<Scalar> upsample3x3_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                                       const Tensor<Scalar>& grad_out, int factor) {
    const int d = weights.n / (factor * factor);
    Tensor<Scalar> packed_grad(input.n, weights.n, input.h, input.w);
    for (int b = 0; b < input.n; ++b)
        for (int c = 0; c < d; ++c)
            for (int by = 0; by < factor; ++by)
                for (int bx = 0; bx < factor; ++bx) {
                    const int pc = c * factor * factor + by * factor + bx;
                    for (int y = 0; y < input.h; ++y)
                        for (int x = 0; x < input.w; ++x)
                            packed_grad.at(b, pc, y, x) =
                                grad_out.at(b, c, factor * y + by, factor * x + bx);
                }
    return conv2d_backward(input, weights, packed_grad, 1, PadMode::Replicate);
}

// Bilinear-interpolation initialization for the upsampling weights: averaging
// over input channels with tent-function spatial taps, so a constant field
// stays constant.
template <typename Scalar>
void upsample_bilinear_init(Tensor<Scalar>& weights, int factor) {
    const int d = weights.n / (factor * factor);
    auto tap = [&](int block, int k) {
        const double delta = (block + 0.5) / factor - 0.5;
        return std::max(0.0, 1.0 - std::abs(delta - (k - 1)));
    };
    for (int c = 0; c < d; ++c)
        for (int by = 0; by < factor; ++by)
            for (int bx = 0; bx < factor; ++bx) {
                const int oc = c * factor * factor + by * factor + bx;
                for (int ic = 0; ic < weights.c; ++ic)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx)
                            weights.at(oc, ic, ky, kx) =
                                Scalar(tap(by, ky) * tap(bx, kx) / weights.c);
            }
}

// Nearest-neighbor initialization; requires as many input channels as outputs.
template <typename Scalar>
void upsample_nearest_init(Tensor<Scalar>& weights, int factor) {
    const int d = weights.n / (factor * factor);
    if (weights.c < d) {
        throw std::invalid_argument("upsample_nearest_init: needs input channels >= d");
    }
    weights.data.setZero();
    for (int c = 0; c < d; ++c)
        for (int by = 0; by < factor; ++by)
            for (int bx = 0; bx < factor; ++bx)
                weights.at(c * factor * factor + by * factor + bx, c, 1, 1) = Scalar(1);
}

template <typename Scalar>
struct SoftmaxResult {
    Scalar loss = 0;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> grad;  // same shape as logits
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> probabilities;
};

// Mean cross-entropy over the columns of `logits` (classes x samples).
template <typename Scalar>
SoftmaxResult<Scalar> softmax_xent(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& logits,
    const std::vector<int>& targets) {
    const Eigen::Index classes = logits.rows(), samples = logits.cols();
    if (samples == 0) throw std::invalid_argument("softmax_xent: empty supervised set");
    if (static_cast<Eigen::Index>(targets.size()) != samples) {
        throw std::invalid_argument("softmax_xent: target count mismatch");
    }
    SoftmaxResult<Scalar> result;
    result.probabilities.resize(classes, samples);
    result.grad.resize(classes, samples);
    Scalar loss = 0;
    for (Eigen::Index s = 0; s < samples; ++s) {
        const int t = targets[static_cast<size_t>(s)];
        if (t < 0 || t >= classes) throw std::invalid_argument("softmax_xent: target out of range");
        const Scalar peak = logits.col(s).maxCoeff();
        Eigen::Array<Scalar, Eigen::Dynamic, 1> e = (logits.col(s).array() - peak).exp();
        const Scalar total = e.sum();
        result.probabilities.col(s) = (e / total).matrix();
        loss -= std::log(result.probabilities(t, s));
        result.grad.col(s) = result.probabilities.col(s) / Scalar(samples);
        result.grad(t, s) -= Scalar(1) / Scalar(samples);
    }
    result.loss = loss / Scalar(samples);
    return result;
}

// Classical momentum: v <- mu*v - lr*g, p <- p + v.
template <typename Scalar>
void sgd_step(Eigen::Array<Scalar, Eigen::Dynamic, 1>& params,
              const Eigen::Array<Scalar, Eigen::Dynamic, 1>& grads,
              Eigen::Array<Scalar, Eigen::Dynamic, 1>& velocity, Scalar lr, Scalar momentum) {
    if (params.size() != grads.size() || params.size() != velocity.size()) {
        throw std::invalid_argument("sgd_step: shape mismatch");
    }
    velocity = momentum * velocity - lr * grads;
    params += velocity;
}

}  // namespace bodycorr
