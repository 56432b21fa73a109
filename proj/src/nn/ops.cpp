#include "lgan/nn/ops.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>

namespace lgan::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

void im2col(const double* img, int channels, int h, int w, ConvGeometry g, int ho, int wo, double* cols) {
    const int k = g.kernel;
    const std::size_t plane = static_cast<std::size_t>(ho) * wo;
    for (int c = 0; c < channels; ++c) {
        const double* src = img + static_cast<std::size_t>(c) * h * w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                double* row = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * plane;
                for (int oy = 0; oy < ho; ++oy) {
                    const int iy = oy * g.stride - g.pad + ky;
                    double* dst = row + static_cast<std::size_t>(oy) * wo;
                    if (iy < 0 || iy >= h) {
                        std::fill(dst, dst + wo, 0.0);
                        continue;
                    }
                    const double* line = src + static_cast<std::size_t>(iy) * w;
                    for (int ox = 0; ox < wo; ++ox) {
                        const int ix = ox * g.stride - g.pad + kx;
                        dst[ox] = (ix >= 0 && ix < w) ? line[ix] : 0.0;
                    }
                }
            }
        }
    }
}

void col2im(const double* cols, int channels, int h, int w, ConvGeometry g, int ho, int wo, double* img) {
    const int k = g.kernel;
    const std::size_t plane = static_cast<std::size_t>(ho) * wo;
    for (int c = 0; c < channels; ++c) {
        double* dst = img + static_cast<std::size_t>(c) * h * w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const double* row = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * plane;
                for (int oy = 0; oy < ho; ++oy) {
                    const int iy = oy * g.stride - g.pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    double* line = dst + static_cast<std::size_t>(iy) * w;
                    const double* src = row + static_cast<std::size_t>(oy) * wo;
                    for (int ox = 0; ox < wo; ++ox) {
                        const int ix = ox * g.stride - g.pad + kx;
                        if (ix >= 0 && ix < w) line[ix] += src[ox];
                    }
                }
            }
        }
    }
}

void check_conv(const Tensor& x, const Tensor& weight, const Tensor& bias, ConvGeometry g) {
    if (weight.c() != x.c() || weight.h() != g.kernel || weight.w() != g.kernel) {
        throw ShapeError("conv2d weight " + to_string(weight.shape()) + " does not fit input " +
                         to_string(x.shape()));
    }
    if (bias.size() != static_cast<std::size_t>(weight.n())) throw ShapeError("conv2d bias size mismatch");
    if (g.out_size(x.h()) < 1 || g.out_size(x.w()) < 1) {
        throw ShapeError("conv2d input " + to_string(x.shape()) + " too small for kernel");
    }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, ConvGeometry g) {
    check_conv(x, weight, bias, g);
    const int cout = weight.n();
    const int ho = g.out_size(x.h());
    const int wo = g.out_size(x.w());
    const int kdim = x.c() * g.kernel * g.kernel;
    const int plane = ho * wo;
    Tensor y({x.n(), cout, ho, wo});
    Storage cols(static_cast<std::size_t>(kdim) * plane);
    ConstMatMap wm(weight.data(), cout, kdim);
    for (int n = 0; n < x.n(); ++n) {
        im2col(x.sample(n), x.c(), x.h(), x.w(), g, ho, wo, cols.data());
        MatMap out(y.sample(n), cout, plane);
        out.noalias() = wm * ConstMatMap(cols.data(), kdim, plane);
        for (int c = 0; c < cout; ++c) out.row(c).array() += bias[c];
    }
    return y;
}

Tensor conv2d_backward(const Tensor& x, const Tensor& weight, const Tensor& dy, ConvGeometry g, Tensor& dweight,
                       Tensor& dbias) {
    const int cout = weight.n();
    const int ho = dy.h();
    const int wo = dy.w();
    const int kdim = x.c() * g.kernel * g.kernel;
    const int plane = ho * wo;
    Tensor dx(x.shape());
    Storage cols(static_cast<std::size_t>(kdim) * plane);
    Storage dcols(cols.size());
    ConstMatMap wm(weight.data(), cout, kdim);
    MatMap dwm(dweight.data(), cout, kdim);
    for (int n = 0; n < x.n(); ++n) {
        ConstMatMap dym(dy.sample(n), cout, plane);
        im2col(x.sample(n), x.c(), x.h(), x.w(), g, ho, wo, cols.data());
        dwm.noalias() += dym * ConstMatMap(cols.data(), kdim, plane).transpose();
        for (int c = 0; c < cout; ++c) {
            const double* row = dy.sample(n) + static_cast<std::size_t>(c) * plane;
            double s = 0.0;
            for (int i = 0; i < plane; ++i) s += row[i];
            dbias[c] += s;
        }
        MatMap dc(dcols.data(), kdim, plane);
        dc.noalias() = wm.transpose() * dym;
        col2im(dcols.data(), x.c(), x.h(), x.w(), g, ho, wo, dx.sample(n));
    }
    return dx;
}

Tensor deconv2x2(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    if (weight.n() != x.c() || weight.h() != 2 || weight.w() != 2) {
        throw ShapeError("deconv weight " + to_string(weight.shape()) + " does not fit input " +
                         to_string(x.shape()));
    }
    const int cin = x.c();
    const int cout = weight.c();
    const int h = x.h();
    const int w = x.w();
    const int plane = h * w;
    Tensor y({x.n(), cout, 2 * h, 2 * w});
    // taps(cout*4, plane) = W^T(cout*4, cin) * x(cin, plane)
    ConstMatMap wm(weight.data(), cin, cout * 4);
    RowMatrix taps(cout * 4, plane);
    for (int n = 0; n < x.n(); ++n) {
        taps.noalias() = wm.transpose() * ConstMatMap(x.sample(n), cin, plane);
        for (int co = 0; co < cout; ++co) {
            double* out = y.channel(n, co);
            for (int t = 0; t < 4; ++t) {
                const int dy = t / 2;
                const int dx = t % 2;
                const double* src = taps.data() + static_cast<std::size_t>(co * 4 + t) * plane;
                for (int iy = 0; iy < h; ++iy) {
                    double* line = out + static_cast<std::size_t>(2 * iy + dy) * (2 * w) + dx;
                    for (int ix = 0; ix < w; ++ix) line[2 * ix] = src[iy * w + ix] + bias[co];
                }
            }
        }
    }
    return y;
}

Tensor deconv2x2_backward(const Tensor& x, const Tensor& weight, const Tensor& dy, Tensor& dweight, Tensor& dbias) {
    const int cin = x.c();
    const int cout = weight.c();
    const int h = x.h();
    const int w = x.w();
    const int plane = h * w;
    Tensor dx(x.shape());
    ConstMatMap wm(weight.data(), cin, cout * 4);
    MatMap dwm(dweight.data(), cin, cout * 4);
    RowMatrix dtaps(cout * 4, plane);
    for (int n = 0; n < x.n(); ++n) {
        for (int co = 0; co < cout; ++co) {
            const double* g = dy.channel(n, co);
            double bsum = 0.0;
            for (int t = 0; t < 4; ++t) {
                const int oy = t / 2;
                const int ox = t % 2;
                double* dst = dtaps.data() + static_cast<std::size_t>(co * 4 + t) * plane;
                for (int iy = 0; iy < h; ++iy) {
                    const double* line = g + static_cast<std::size_t>(2 * iy + oy) * (2 * w) + ox;
                    for (int ix = 0; ix < w; ++ix) {
                        dst[iy * w + ix] = line[2 * ix];
                        bsum += line[2 * ix];
                    }
                }
            }
            dbias[co] += bsum;
        }
        ConstMatMap xm(x.sample(n), cin, plane);
        dwm.noalias() += xm * dtaps.transpose();
        MatMap(dx.sample(n), cin, plane).noalias() = wm * dtaps;
    }
    return dx;
}

PoolResult maxpool2x2(const Tensor& x) {
    const int ho = x.h() / 2;
    const int wo = x.w() / 2;
    if (ho < 1 || wo < 1) throw ShapeError("maxpool input " + to_string(x.shape()) + " too small");
    PoolResult r{Tensor({x.n(), x.c(), ho, wo}), {}};
    r.argmax.resize(r.output.size());
    std::size_t o = 0;
    for (int n = 0; n < x.n(); ++n) {
        for (int c = 0; c < x.c(); ++c) {
            const std::size_t base = static_cast<std::size_t>(x.channel(n, c) - x.data());
            for (int oy = 0; oy < ho; ++oy) {
                for (int ox = 0; ox < wo; ++ox, ++o) {
                    std::size_t best = base + static_cast<std::size_t>(2 * oy) * x.w() + 2 * ox;
                    for (int t = 1; t < 4; ++t) {
                        const std::size_t idx = base + static_cast<std::size_t>(2 * oy + t / 2) * x.w() + 2 * ox + t % 2;
                        if (x[idx] > x[best]) best = idx;
                    }
                    r.output[o] = x[best];
                    r.argmax[o] = best;
                }
            }
        }
    }
    return r;
}

Tensor maxpool2x2_backward(const Shape& input, const std::vector<std::size_t>& argmax, const Tensor& dy) {
    Tensor dx(input);
    for (std::size_t o = 0; o < argmax.size(); ++o) dx[argmax[o]] += dy[o];
    return dx;
}

double leaky_relu(double x, double alpha) { return std::max(x, 0.0) + alpha * std::min(x, 0.0); }

Tensor leaky_relu(const Tensor& x, double alpha) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = leaky_relu(x[i], alpha);
    return y;
}

Tensor leaky_relu_backward(const Tensor& pre, const Tensor& dy, double alpha) {
    Tensor dx(pre.shape());
    for (std::size_t i = 0; i < pre.size(); ++i) dx[i] = pre[i] > 0.0 ? dy[i] : alpha * dy[i];
    return dx;
}

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormCache* cache) {
    const int channels = x.c();
    if (gamma.size() != static_cast<std::size_t>(channels) || beta.size() != gamma.size()) {
        throw ShapeError("batch_norm parameter size mismatch");
    }
    const std::size_t plane = x.shape().plane();
    const double count = static_cast<double>(plane) * x.n();
    Tensor y(x.shape());
    Tensor normalized(x.shape());
    std::vector<double> inv_std(channels);
    for (int c = 0; c < channels; ++c) {
        double mean = 0.0;
        for (int n = 0; n < x.n(); ++n) {
            const double* p = x.channel(n, c);
            for (std::size_t i = 0; i < plane; ++i) mean += p[i];
        }
        mean /= count;
        double var = 0.0;
        for (int n = 0; n < x.n(); ++n) {
            const double* p = x.channel(n, c);
            for (std::size_t i = 0; i < plane; ++i) var += (p[i] - mean) * (p[i] - mean);
        }
        var /= count;
        inv_std[c] = 1.0 / std::sqrt(var + kBatchNormEps);
        for (int n = 0; n < x.n(); ++n) {
            const double* p = x.channel(n, c);
            double* q = normalized.channel(n, c);
            double* out = y.channel(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                q[i] = (p[i] - mean) * inv_std[c];
                out[i] = gamma[c] * q[i] + beta[c];
            }
        }
    }
    if (cache) {
        cache->normalized = std::move(normalized);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

Tensor batch_norm_backward(const BatchNormCache& cache, const Tensor& gamma, const Tensor& dy, Tensor& dgamma,
                           Tensor& dbeta) {
    const Tensor& xhat = cache.normalized;
    const std::size_t plane = xhat.shape().plane();
    const double count = static_cast<double>(plane) * xhat.n();
    Tensor dx(xhat.shape());
    for (int c = 0; c < xhat.c(); ++c) {
        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (int n = 0; n < xhat.n(); ++n) {
            const double* g = dy.channel(n, c);
            const double* q = xhat.channel(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += g[i];
                sum_dy_xhat += g[i] * q[i];
            }
        }
        dgamma[c] += sum_dy_xhat;
        dbeta[c] += sum_dy;
        const double scale = gamma[c] * cache.inv_std[c] / count;
        for (int n = 0; n < xhat.n(); ++n) {
            const double* g = dy.channel(n, c);
            const double* q = xhat.channel(n, c);
            double* out = dx.channel(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                out[i] = scale * (count * g[i] - sum_dy - q[i] * sum_dy_xhat);
            }
        }
    }
    return dx;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    const int in = x.c() * x.h() * x.w();
    if (weight.c() != in || bias.size() != static_cast<std::size_t>(weight.n())) {
        throw ShapeError("linear weight " + to_string(weight.shape()) + " does not fit input " + to_string(x.shape()));
    }
    const int out = weight.n();
    Tensor y({x.n(), out, 1, 1});
    MatMap ym(y.data(), x.n(), out);
    ym.noalias() = ConstMatMap(x.data(), x.n(), in) * ConstMatMap(weight.data(), out, in).transpose();
    for (int n = 0; n < x.n(); ++n) {
        for (int o = 0; o < out; ++o) ym(n, o) += bias[o];
    }
    return y;
}

Tensor linear_backward(const Tensor& x, const Tensor& weight, const Tensor& dy, Tensor& dweight, Tensor& dbias) {
    const int in = weight.c();
    const int out = weight.n();
    ConstMatMap dym(dy.data(), x.n(), out);
    ConstMatMap xm(x.data(), x.n(), in);
    MatMap(dweight.data(), out, in).noalias() += dym.transpose() * xm;
    for (int o = 0; o < out; ++o) {
        double s = 0.0;
        for (int n = 0; n < x.n(); ++n) s += dy[static_cast<std::size_t>(n) * out + o];
        dbias[o] += s;
    }
    Tensor dx(x.shape());
    MatMap(dx.data(), x.n(), in).noalias() = dym * ConstMatMap(weight.data(), out, in);
    return dx;
}

Tensor sigmoid(const Tensor& x) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    return y;
}

}  // namespace lgan::nn
