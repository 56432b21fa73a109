#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace lgan::oracle {

double central_difference(double& slot, const std::function<double()>& f) {
    const double x0 = slot;
    auto estimate = [&](double h) {
        slot = x0 + h;
        const double up = f();
        slot = x0 - h;
        const double down = f();
        slot = x0;
        return (up - down) / (2.0 * h);
    };
    double h = 1e-5;
    double prev = estimate(h);
    for (int round = 0; round < 6; ++round) {
        h /= 4.0;
        const double next = estimate(h);
        if (std::abs(next - prev) <= 1e-8 * std::max(1.0, std::abs(next))) return prev;
        prev = next;
    }
    return prev;
}

std::vector<Tensor> numerical_gradient(std::vector<Tensor>& params, const std::function<double()>& f) {
    std::vector<Tensor> out;
    for (auto& p : params) {
        Tensor g(p.shape());
        for (std::size_t i = 0; i < p.size(); ++i) g[i] = central_difference(p[i], f);
        out.push_back(std::move(g));
    }
    return out;
}

GradCheck compare(const std::vector<Tensor>& analytic, const std::vector<Tensor>& numeric, double floor) {
    GradCheck r;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
        for (std::size_t i = 0; i < analytic[k].size(); ++i) {
            const double a = analytic[k][i];
            const double n = numeric[k][i];
            const double abs_err = std::abs(a - n);
            r.max_abs_error = std::max(r.max_abs_error, abs_err);
            r.max_rel_error = std::max(r.max_rel_error, abs_err / std::max({std::abs(a), std::abs(n), floor}));
            ++r.checked;
        }
    }
    return r;
}

std::vector<Pixel> foreground(const BinaryMask& m) {
    std::vector<Pixel> out;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m(y, x)) out.emplace_back(y, x);
        }
    }
    return out;
}

double brute_hausdorff(const BinaryMask& m, const BinaryMask& g) {
    const auto a = foreground(m);
    const auto b = foreground(g);
    auto directed = [](const std::vector<Pixel>& from, const std::vector<Pixel>& to) {
        double sup = 0.0;
        for (const auto& p : from) {
            double inf = std::numeric_limits<double>::infinity();
            for (const auto& q : to) {
                const double dy = p.first - q.first;
                const double dx = p.second - q.second;
                inf = std::min(inf, std::sqrt(dx * dx + dy * dy));
            }
            sup = std::max(sup, inf);
        }
        return sup;
    };
    return std::max(directed(a, b), directed(b, a));
}

std::pair<std::size_t, std::size_t> set_counts(const BinaryMask& x, const BinaryMask& y) {
    const auto a = foreground(x);
    const auto b = foreground(y);
    std::set<Pixel> sa(a.begin(), a.end());
    std::set<Pixel> sb(b.begin(), b.end());
    std::vector<Pixel> inter;
    std::vector<Pixel> uni;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(uni));
    return {inter.size(), uni.size()};
}

BinaryMask mask_from_pixels(int h, int w, const std::vector<Pixel>& on) {
    std::vector<std::uint8_t> v(static_cast<std::size_t>(h) * w, 0);
    for (const auto& [y, x] : on) v[static_cast<std::size_t>(y) * w + x] = 1;
    return BinaryMask(h, w, std::move(v));
}

BinaryMask random_mask(Rng& rng, int h, int w, double density) {
    std::vector<std::uint8_t> v(static_cast<std::size_t>(h) * w);
    for (auto& px : v) px = rng.uniform() < density ? 1 : 0;
    return BinaryMask(h, w, std::move(v));
}

BinaryMask random_blob_mask(Rng& rng, int h, int w) {
    std::vector<std::uint8_t> v(static_cast<std::size_t>(h) * w, 0);
    const int discs = 1 + static_cast<int>(rng.below(3));
    for (int d = 0; d < discs; ++d) {
        const double cy = rng.uniform(0, h);
        const double cx = rng.uniform(0, w);
        const double r = rng.uniform(1.0, std::min(h, w) / 3.0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r) v[static_cast<std::size_t>(y) * w + x] = 1;
            }
        }
    }
    return BinaryMask(h, w, std::move(v));
}

Tensor random_tensor(Rng& rng, Shape shape, double lo, double hi) {
    Tensor t(shape);
    for (double& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

bool ellipse_quadratic_form(double px, double py, double cx, double cy, double a, double b, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    // A = R diag(1/a^2, 1/b^2) R^T with R the rotation by `angle`.
    const double ia = 1.0 / (a * a);
    const double ib = 1.0 / (b * b);
    const double a11 = c * c * ia + s * s * ib;
    const double a22 = s * s * ia + c * c * ib;
    const double a12 = c * s * (ia - ib);
    const double dx = px - cx;
    const double dy = py - cy;
    return a11 * dx * dx + 2.0 * a12 * dx * dy + a22 * dy * dy <= 1.0;
}

}  // namespace lgan::oracle
