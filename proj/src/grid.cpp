// SPDX-License-Identifier: Apache-2.0

#include "csifb/grid.hpp"

#include <cmath>

#include "csifb/kernels.hpp"

namespace csifb {
namespace kern {

void layer_norm(const RealGrid& x, int axis, double eps, RealGrid& y, RealGrid* inv_std) {
    AxisLanes lanes(x.shape, axis);
    if (inv_std) *inv_std = RealGrid({(int)(lanes.outer * lanes.inner)});
    int64_t li = 0;
    double len = (double)lanes.len;
    for (int64_t o = 0; o < lanes.outer; ++o)
        for (int64_t c = 0; c < lanes.inner; ++c, ++li) {
            double mu = 0;
            for (int64_t k = 0; k < lanes.len; ++k) mu += x[lanes.idx(o, k, c)];
            mu /= len;
            double var = 0;
            for (int64_t k = 0; k < lanes.len; ++k) {
                double d = x[lanes.idx(o, k, c)] - mu;
                var += d * d;
            }
            var /= len;
            double is = 1.0 / std::sqrt(var + eps);
            if (inv_std) (*inv_std)[li] = is;
            for (int64_t k = 0; k < lanes.len; ++k) {
                int64_t i = lanes.idx(o, k, c);
                y[i] = (x[i] - mu) * is;
            }
        }
}

void softmax(const RealGrid& x, int axis, RealGrid& y) {
    AxisLanes lanes(x.shape, axis);
    for (int64_t o = 0; o < lanes.outer; ++o)
        for (int64_t c = 0; c < lanes.inner; ++c) {
            double mx = -HUGE_VAL;
            for (int64_t k = 0; k < lanes.len; ++k)
                mx = std::max(mx, x[lanes.idx(o, k, c)]);
            double z = 0;
            for (int64_t k = 0; k < lanes.len; ++k) {
                int64_t i = lanes.idx(o, k, c);
                y[i] = std::exp(x[i] - mx);
                z += y[i];
            }
            for (int64_t k = 0; k < lanes.len; ++k) y[lanes.idx(o, k, c)] /= z;
        }
}

double gelu1(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu1_grad(double x) {
    return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) +
           x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace kern

RealGrid layer_norm(const RealGrid& x, int axis, double eps) {
    RealGrid y(x.shape);
    kern::layer_norm(x, axis, eps, y, nullptr);
    return y;
}

RealGrid softmax(const RealGrid& x, int axis) {
    RealGrid y(x.shape);
    kern::softmax(x, axis, y);
    return y;
}

RealGrid gelu(const RealGrid& x) {
    RealGrid y(x.shape);
    for (int64_t i = 0; i < x.size(); ++i) y[i] = kern::gelu1(x[i]);
    return y;
}

}  // namespace csifb
