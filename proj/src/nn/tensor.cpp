#include "lgan/tensor.hpp"

#include <cstring>

namespace lgan {

std::string to_string(const Shape& s) {
    return "[" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
           std::to_string(s.w) + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "hadamard");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
        throw ShapeError("concat_channels: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
    Tensor out({a.n(), a.c() + b.c(), a.h(), a.w()});
    const std::size_t pa = a.shape().c * a.shape().plane();
    const std::size_t pb = b.shape().c * b.shape().plane();
    for (int n = 0; n < a.n(); ++n) {
        std::memcpy(out.sample(n), a.sample(n), pa * sizeof(double));
        std::memcpy(out.sample(n) + pa, b.sample(n), pb * sizeof(double));
    }
    return out;
}

void split_channels(const Tensor& joined, int c_first, Tensor& first, Tensor& second) {
    const Shape s = joined.shape();
    first = Tensor({s.n, c_first, s.h, s.w});
    second = Tensor({s.n, s.c - c_first, s.h, s.w});
    const std::size_t pa = static_cast<std::size_t>(c_first) * s.plane();
    const std::size_t pb = static_cast<std::size_t>(s.c - c_first) * s.plane();
    for (int n = 0; n < s.n; ++n) {
        std::memcpy(first.sample(n), joined.sample(n), pa * sizeof(double));
        std::memcpy(second.sample(n), joined.sample(n) + pa, pb * sizeof(double));
    }
}

void add_inplace(Tensor& dst, const Tensor& src) {
    require_same_shape(dst, src, "add_inplace");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void scale_inplace(Tensor& dst, double s) {
    for (double& v : dst.values()) v *= s;
}

}  // namespace lgan
