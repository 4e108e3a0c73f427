// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode layer library for the try-on network. Every layer
// owns its parameters and gradients, caches what its backward pass needs
// during forward, and is templated on the scalar type so the same code
// runs in float for training and in double for finite-difference checks.
// All heavy lifting is im2col plus an Eigen matrix product.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tryonlab/error.hpp"
#include "tryonlab/rng.hpp"
#include "tryonlab/tensor.hpp"

namespace tryonlab {

enum class Activation { relu, gelu, swish, sine };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Scalar activations with exact derivatives. gelu uses the error-function
/// normal CDF, not the tanh approximation; sine is sin(omega * x).
template <typename T>
T activate(Activation a, T x, T omega) {
    switch (a) {
    case Activation::relu:
        return x > T(0) ? x : T(0);
    case Activation::gelu:
        return x * T(0.5) * (T(1) + std::erf(x / T(M_SQRT2)));
    case Activation::swish:
        return x / (T(1) + std::exp(-x));
    case Activation::sine:
        return std::sin(omega * x);
    }
    raise(ErrorCode::UnknownActivation, "bad activation enum");
}

template <typename T>
T activate_grad(Activation a, T x, T omega) {
    switch (a) {
    case Activation::relu:
        return x > T(0) ? T(1) : T(0);
    case Activation::gelu: {
        const T cdf = T(0.5) * (T(1) + std::erf(x / T(M_SQRT2)));
        const T pdf = std::exp(-x * x / T(2)) / std::sqrt(T(2) * T(M_PI));
        return cdf + x * pdf;
    }
    case Activation::swish: {
        const T s = T(1) / (T(1) + std::exp(-x));
        return s * (T(1) + x * (T(1) - s));
    }
    case Activation::sine:
        return omega * std::cos(omega * x);
    }
    raise(ErrorCode::UnknownActivation, "bad activation enum");
}

/// Weight initialization families. Standard layers draw uniform bounds from
/// fan-in; sine layers follow the SIREN recipe (1/n first layer, sqrt(6/n)
/// for unit-frequency hidden layers). Biases start at zero.
enum class InitKind { standard, siren_first, siren_hidden };

namespace nn {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapM = Eigen::Map<const MatRM<T>>;

/// Parameter visitor: name, values, gradients (same length).
template <typename T>
using ParamVisitor = std::function<void(const std::string&, std::vector<T>&, std::vector<T>&)>;

template <typename T>
struct Conv2d {
    int in_c = 0, out_c = 0, k = 1, stride = 1, pad = 0;
    std::string name;
    Tensor<T> w; // (out_c, in_c*k*k) flattened row-major
    Tensor<T> b; // (out_c)
    Tensor<T> gw, gb;

    // caches
    Tensor<T> cols; // (in_c*k*k, N)
    int in_h = 0, in_w = 0, out_h = 0, out_w = 0;

    void build(const std::string& layer_name, int in_channels, int out_channels, int kernel,
               int stride_, int pad_, std::uint64_t seed, InitKind init) {
        name = layer_name;
        in_c = in_channels;
        out_c = out_channels;
        k = kernel;
        stride = stride_;
        pad = pad_;
        const int fan_in = in_c * k * k;
        w = Tensor<T>({out_c, fan_in});
        b = Tensor<T>({out_c});
        gw = Tensor<T>({out_c, fan_in});
        gb = Tensor<T>({out_c});
        Rng rng(substream_seed(seed, name));
        double bound = std::sqrt(6.0 / fan_in);
        if (init == InitKind::siren_first) bound = 1.0 / fan_in;
        for (std::size_t i = 0; i < w.numel(); ++i)
            w[i] = static_cast<T>(rng.uniform(-bound, bound));
    }

    Tensor<T> forward(const Tensor<T>& x) {
        if (x.ndim() != 3 || x.dim(0) != in_c)
            raise(ErrorCode::ShapeMismatch, "conv input channel mismatch", name);
        in_h = x.dim(1);
        in_w = x.dim(2);
        out_h = (in_h + 2 * pad - k) / stride + 1;
        out_w = (in_w + 2 * pad - k) / stride + 1;
        if (out_h < 1 || out_w < 1) raise(ErrorCode::ShapeMismatch, "conv output collapsed", name);
        const int n = out_h * out_w, rows = in_c * k * k;
        cols = Tensor<T>({rows, n});
        for (int c = 0; c < in_c; ++c)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const int r = (c * k + ky) * k + kx;
                    T* dst = cols.data() + static_cast<std::size_t>(r) * n;
                    for (int oy = 0; oy < out_h; ++oy) {
                        const int sy = oy * stride + ky - pad;
                        for (int ox = 0; ox < out_w; ++ox) {
                            const int sx = ox * stride + kx - pad;
                            dst[oy * out_w + ox] =
                                (sy >= 0 && sy < in_h && sx >= 0 && sx < in_w) ? x.at(c, sy, sx)
                                                                               : T(0);
                        }
                    }
                }
        Tensor<T> y({out_c, out_h, out_w});
        MapM<T> Y(y.data(), out_c, n);
        CMapM<T> W(w.data(), out_c, rows), X(cols.data(), rows, n);
        Y.noalias() = W * X;
        for (int r = 0; r < out_c; ++r) Y.row(r).array() += b[static_cast<std::size_t>(r)];
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) {
        const int n = out_h * out_w, rows = in_c * k * k;
        CMapM<T> DY(dy.data(), out_c, n), X(cols.data(), rows, n), W(w.data(), out_c, rows);
        MapM<T> GW(gw.data(), out_c, rows);
        GW.noalias() += DY * X.transpose();
        for (int r = 0; r < out_c; ++r) gb[static_cast<std::size_t>(r)] += DY.row(r).sum();

        MatRM<T> dcols = W.transpose() * DY;
        Tensor<T> dx({in_c, in_h, in_w});
        for (int c = 0; c < in_c; ++c)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const int r = (c * k + ky) * k + kx;
                    for (int oy = 0; oy < out_h; ++oy) {
                        const int sy = oy * stride + ky - pad;
                        if (sy < 0 || sy >= in_h) continue;
                        for (int ox = 0; ox < out_w; ++ox) {
                            const int sx = ox * stride + kx - pad;
                            if (sx < 0 || sx >= in_w) continue;
                            dx.at(c, sy, sx) += dcols(r, oy * out_w + ox);
                        }
                    }
                }
        return dx;
    }

    void visit(const ParamVisitor<T>& fn) {
        fn(name + ".w", w.vec(), gw.vec());
        fn(name + ".b", b.vec(), gb.vec());
    }
};

/// Per-channel normalization over the spatial plane of a single sample.
/// Chosen over batch statistics so losses are independent of how a batch
/// is split into accumulation micro-steps.
template <typename T>
struct InstanceNorm {
    static constexpr double kEps = 1e-5;
    int c = 0;
    std::string name;
    Tensor<T> gamma, beta, ggamma, gbeta;

    // caches
    Tensor<T> xhat;
    std::vector<T> inv_std;

    void build(const std::string& layer_name, int channels) {
        name = layer_name;
        c = channels;
        gamma = Tensor<T>({c}, T(1));
        beta = Tensor<T>({c});
        ggamma = Tensor<T>({c});
        gbeta = Tensor<T>({c});
    }

    Tensor<T> forward(const Tensor<T>& x) {
        if (x.dim(0) != c) raise(ErrorCode::ShapeMismatch, "norm channel mismatch", name);
        const std::size_t plane = x.plane();
        xhat = Tensor<T>(x.shape());
        inv_std.assign(static_cast<std::size_t>(c), T(0));
        Tensor<T> y(x.shape());
        for (int ch = 0; ch < c; ++ch) {
            const T* src = x.channel(ch);
            T mean = T(0);
            for (std::size_t i = 0; i < plane; ++i) mean += src[i];
            mean /= static_cast<T>(plane);
            T var = T(0);
            for (std::size_t i = 0; i < plane; ++i) var += (src[i] - mean) * (src[i] - mean);
            var /= static_cast<T>(plane);
            const T is = T(1) / std::sqrt(var + static_cast<T>(kEps));
            inv_std[static_cast<std::size_t>(ch)] = is;
            T* xh = xhat.channel(ch);
            T* dst = y.channel(ch);
            const T g = gamma[static_cast<std::size_t>(ch)], bt = beta[static_cast<std::size_t>(ch)];
            for (std::size_t i = 0; i < plane; ++i) {
                xh[i] = (src[i] - mean) * is;
                dst[i] = g * xh[i] + bt;
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) {
        const std::size_t plane = dy.plane();
        Tensor<T> dx(dy.shape());
        for (int ch = 0; ch < c; ++ch) {
            const T* dyp = dy.channel(ch);
            const T* xh = xhat.channel(ch);
            T* dxp = dx.channel(ch);
            const T g = gamma[static_cast<std::size_t>(ch)];
            const T is = inv_std[static_cast<std::size_t>(ch)];
            T sum_dy = T(0), sum_dyx = T(0);
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += dyp[i];
                sum_dyx += dyp[i] * xh[i];
            }
            ggamma[static_cast<std::size_t>(ch)] += sum_dyx;
            gbeta[static_cast<std::size_t>(ch)] += sum_dy;
            const T np = static_cast<T>(plane);
            for (std::size_t i = 0; i < plane; ++i)
                dxp[i] = g * is / np * (np * dyp[i] - sum_dy - xh[i] * sum_dyx);
        }
        return dx;
    }

    void visit(const ParamVisitor<T>& fn) {
        fn(name + ".gamma", gamma.vec(), ggamma.vec());
        fn(name + ".beta", beta.vec(), gbeta.vec());
    }
};

template <typename T>
struct Act {
    Activation a = Activation::relu;
    T omega = T(1);
    Tensor<T> x_cache;

    void build(Activation act, T omega_) {
        a = act;
        omega = omega_;
    }

    Tensor<T> forward(const Tensor<T>& x) {
        x_cache = x;
        Tensor<T> y(x.shape());
        for (std::size_t i = 0; i < x.numel(); ++i) y[i] = activate(a, x[i], omega);
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> dx(dy.shape());
        for (std::size_t i = 0; i < dy.numel(); ++i)
            dx[i] = dy[i] * activate_grad(a, x_cache[i], omega);
        return dx;
    }
};

/// (4C, H, W) -> (C, 2H, 2W); input channel c*4 + dy*2 + dx lands at output
/// pixel (2y+dy, 2x+dx) of channel c. With a 1x1 conv in front this is an
/// exact stride-2 transposed convolution without overlap artifacts.
template <typename T>
struct DepthToSpace {
    Tensor<T> forward(const Tensor<T>& x) {
        if (x.dim(0) % 4 != 0) raise(ErrorCode::ShapeMismatch, "depth_to_space needs 4k channels");
        const int c = x.dim(0) / 4, h = x.dim(1), w = x.dim(2);
        Tensor<T> y({c, 2 * h, 2 * w});
        for (int ch = 0; ch < c; ++ch)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx)
                    for (int yy = 0; yy < h; ++yy)
                        for (int xx = 0; xx < w; ++xx)
                            y.at(ch, 2 * yy + dy, 2 * xx + dx) =
                                x.at(ch * 4 + dy * 2 + dx, yy, xx);
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) {
        const int c = dy.dim(0), h = dy.dim(1) / 2, w = dy.dim(2) / 2;
        Tensor<T> dx({c * 4, h, w});
        for (int ch = 0; ch < c; ++ch)
            for (int sy = 0; sy < 2; ++sy)
                for (int sx = 0; sx < 2; ++sx)
                    for (int yy = 0; yy < h; ++yy)
                        for (int xx = 0; xx < w; ++xx)
                            dx.at(ch * 4 + sy * 2 + sx, yy, xx) =
                                dy.at(ch, 2 * yy + sy, 2 * xx + sx);
        return dx;
    }
};

/// Spatial self-attention over the flattened token grid with a learned
/// residual gain starting at zero, so a fresh layer is the identity map.
/// Token j attends with weights softmax_i(q_i . k_j) over value vectors.
template <typename T>
struct SelfAttention {
    int c = 0, ck = 0;
    std::string name;
    Tensor<T> wq, wk, wv, wo;     // (ck,c), (ck,c), (c,c), (c,c)
    Tensor<T> gwq, gwk, gwv, gwo;
    Tensor<T> gamma, ggamma; // single element

    // caches
    MatRM<T> x_mat, q, k, v, beta, attn, o;
    int h_cache = 0, w_cache = 0;

    void build(const std::string& layer_name, int channels, std::uint64_t seed) {
        name = layer_name;
        c = channels;
        ck = std::max(1, channels / 8);
        const auto make = [&](Tensor<T>& m, Tensor<T>& g, int rows, const char* suffix) {
            m = Tensor<T>({rows, c});
            g = Tensor<T>({rows, c});
            Rng rng(substream_seed(seed, name + "." + suffix));
            const double bound = std::sqrt(6.0 / c);
            for (std::size_t i = 0; i < m.numel(); ++i)
                m[i] = static_cast<T>(rng.uniform(-bound, bound));
        };
        make(wq, gwq, ck, "wq");
        make(wk, gwk, ck, "wk");
        make(wv, gwv, c, "wv");
        make(wo, gwo, c, "wo");
        gamma = Tensor<T>({1});
        ggamma = Tensor<T>({1});
    }

    Tensor<T> forward(const Tensor<T>& x) {
        if (x.dim(0) != c) raise(ErrorCode::ShapeMismatch, "attention channel mismatch", name);
        h_cache = x.dim(1);
        w_cache = x.dim(2);
        const int n = h_cache * w_cache;
        x_mat = CMapM<T>(x.data(), c, n);
        CMapM<T> WQ(wq.data(), ck, c), WK(wk.data(), ck, c), WV(wv.data(), c, c),
            WO(wo.data(), c, c);
        q.noalias() = WQ * x_mat;
        k.noalias() = WK * x_mat;
        v.noalias() = WV * x_mat;

        MatRM<T> logits = q.transpose() * k; // (n,n), entry (i,j) = q_i . k_j
        beta.resize(n, n);
        for (int j = 0; j < n; ++j) {
            const T mx = logits.col(j).maxCoeff();
            beta.col(j) = (logits.col(j).array() - mx).exp();
            beta.col(j) /= beta.col(j).sum();
        }
        attn.noalias() = v * beta;
        o.noalias() = WO * attn;

        Tensor<T> y(x.shape());
        MapM<T> Y(y.data(), c, n);
        Y = x_mat + gamma[0] * o;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) {
        const int n = h_cache * w_cache;
        CMapM<T> DY(dy.data(), c, n);
        CMapM<T> WQ(wq.data(), ck, c), WK(wk.data(), ck, c), WV(wv.data(), c, c),
            WO(wo.data(), c, c);

        ggamma[0] += (DY.array() * o.array()).sum();
        MatRM<T> dout = gamma[0] * DY;

        MapM<T>(gwo.data(), c, c).noalias() += dout * attn.transpose();
        MatRM<T> dattn = WO.transpose() * dout;

        MatRM<T> dv = dattn * beta.transpose();
        MapM<T>(gwv.data(), c, c).noalias() += dv * x_mat.transpose();

        MatRM<T> dbeta = v.transpose() * dattn; // (n,n)
        MatRM<T> dlogits(n, n);
        for (int j = 0; j < n; ++j) {
            const T dot = beta.col(j).dot(dbeta.col(j));
            dlogits.col(j) = beta.col(j).array() * (dbeta.col(j).array() - dot);
        }
        MatRM<T> dq = k * dlogits.transpose();
        MatRM<T> dk = q * dlogits;
        MapM<T>(gwq.data(), ck, c).noalias() += dq * x_mat.transpose();
        MapM<T>(gwk.data(), ck, c).noalias() += dk * x_mat.transpose();

        Tensor<T> dx({c, h_cache, w_cache});
        MapM<T> DX(dx.data(), c, n);
        DX.noalias() = DY;
        DX.noalias() += WQ.transpose() * dq;
        DX.noalias() += WK.transpose() * dk;
        DX.noalias() += WV.transpose() * dv;
        return dx;
    }

    void visit(const ParamVisitor<T>& fn) {
        fn(name + ".wq", wq.vec(), gwq.vec());
        fn(name + ".wk", wk.vec(), gwk.vec());
        fn(name + ".wv", wv.vec(), gwv.vec());
        fn(name + ".wo", wo.vec(), gwo.vec());
        fn(name + ".gamma", gamma.vec(), ggamma.vec());
    }
};

} // namespace nn
} // namespace tryonlab
