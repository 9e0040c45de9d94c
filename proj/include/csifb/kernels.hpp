// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "csifb/grid.hpp"

namespace csifb {

// Forward kernels shared by the tape ops and the plain (value-level) API.
namespace kern {

// Iterates lanes of `axis`: outer * inner lanes, each of length shape[axis]
// with stride `inner`.
struct AxisLanes {
    int64_t outer, len, inner;
    explicit AxisLanes(const Shape& s, int axis) {
        outer = 1;
        for (int i = 0; i < axis; ++i) outer *= s[i];
        len = s[axis];
        inner = 1;
        for (int i = axis + 1; i < (int)s.size(); ++i) inner *= s[i];
    }
    int64_t idx(int64_t o, int64_t k, int64_t in) const {
        return (o * len + k) * inner + in;
    }
};

void layer_norm(const RealGrid& x, int axis, double eps, RealGrid& y, RealGrid* inv_std);
void softmax(const RealGrid& x, int axis, RealGrid& y);
double gelu1(double x);
double gelu1_grad(double x);

}  // namespace kern

// Plain value-level neural primitives.
RealGrid layer_norm(const RealGrid& x, int axis, double eps = 1e-6);
RealGrid softmax(const RealGrid& x, int axis);
RealGrid gelu(const RealGrid& x);

}  // namespace csifb
