// SPDX-License-Identifier: Apache-2.0

#include "csifb/maxim.hpp"

#include <cmath>

namespace csifb {
namespace ag {

void register_gmlp(ParamStore& s, const std::string& prefix, int d, int axis_len,
                   uint64_t seed) {
    s.create_const(prefix + ".ln1.g", {d}, 1.0);
    s.create_const(prefix + ".ln1.b", {d}, 0.0);
    register_linear(s, prefix + ".in", d, 2 * d, seed);
    s.create_const(prefix + ".sgu_ln.g", {d}, 1.0);
    s.create_const(prefix + ".sgu_ln.b", {d}, 0.0);
    s.create_const(prefix + ".w2", {axis_len, axis_len}, 0.0);
    s.create_const(prefix + ".b2", {axis_len}, 1.0);
    register_linear_zero(s, prefix + ".out", d, d);
}

namespace {

Var affine_ln(const Net& net, Var x, const std::string& prefix, int axis) {
    Var y = layer_norm(x, axis);
    y = scale_axis(y, net.P(prefix + ".g"), axis);
    return add_bias(y, net.P(prefix + ".b"), axis);
}

}  // namespace

Var gmlp_axis(const Net& net, Var x, const std::string& prefix, int axis) {
    const Shape& xs = net.t.shape(x);
    if (xs.size() != 3) throw DimensionError("gmlp_axis: rank-3 input required");
    int d = xs[2];
    Var xn = affine_ln(net, x, prefix + ".ln1", 2);
    Var r1 = gelu(linear(net, xn, prefix + ".in"));  // [n1, n2, 2d]
    Var u = slice(r1, 2, 0, d);
    Var v = slice(r1, 2, d, d);
    Var vn = affine_ln(net, v, prefix + ".sgu_ln", 2);
    Var gate = axis_project(vn, net.P(prefix + ".w2"), axis);
    gate = add_bias(gate, net.P(prefix + ".b2"), axis);
    Var sgu = u * gate;
    return x + linear(net, sgu, prefix + ".out");
}

void register_mab(ParamStore& s, const std::string& prefix, int n1, int n2, int d,
                  const std::string& wiring, uint64_t seed) {
    if (wiring == "serial") {
        register_gmlp(s, prefix + ".g1", d, n1, seed);
        register_gmlp(s, prefix + ".g2", d, n2, seed);
    } else {
        if (d % 2) throw ConfigError("mab: channel width must be even, got " + std::to_string(d));
        bool swapped = wiring == "parallel_swapped";
        register_gmlp(s, prefix + ".g1", d / 2, swapped ? n2 : n1, seed);
        register_gmlp(s, prefix + ".g2", d / 2, swapped ? n1 : n2, seed);
    }
    register_linear_zero(s, prefix + ".merge", d, d);
}

Var mab(const Net& net, Var x, const std::string& prefix, const std::string& wiring) {
    const Shape& xs = net.t.shape(x);
    if (xs.size() != 3) throw DimensionError("mab: rank-3 input required");
    int d = xs[2];
    Var body{};
    if (wiring == "serial") {
        Var y = gmlp_axis(net, x, prefix + ".g1", 0);
        body = gmlp_axis(net, y, prefix + ".g2", 1);
    } else {
        if (d % 2) throw ConfigError("mab: channel width must be even, got " + std::to_string(d));
        bool swapped = wiring == "parallel_swapped";
        Var a = slice(x, 2, 0, d / 2);
        Var b = slice(x, 2, d / 2, d / 2);
        Var ga = gmlp_axis(net, a, prefix + ".g1", swapped ? 1 : 0);
        Var gb = gmlp_axis(net, b, prefix + ".g2", swapped ? 0 : 1);
        body = concat({ga, gb}, 2);
    }
    return x + linear(net, body, prefix + ".merge");
}

void register_rcab(ParamStore& s, const std::string& prefix, int d, uint64_t seed) {
    s.create_const(prefix + ".ln.g", {d}, 1.0);
    s.create_const(prefix + ".ln.b", {d}, 0.0);
    register_linear(s, prefix + ".t1", d, d, seed);
    register_linear_zero(s, prefix + ".t2", d, d);
    int bottleneck = std::max(1, d / 4);
    register_linear(s, prefix + ".ca1", d, bottleneck, seed);
    register_linear(s, prefix + ".ca2", bottleneck, d, seed);
}

Var rcab(const Net& net, Var x, const std::string& prefix) {
    Var xn = affine_ln(net, x, prefix + ".ln", 2);
    Var t = gelu(linear(net, xn, prefix + ".t1"));
    Var y = linear(net, t, prefix + ".t2");  // [n1, n2, d]
    Var pooled = mean_axis(mean_axis(y, 0), 0);  // [d]
    Var z = gelu(linear(net, pooled, prefix + ".ca1"));
    Var g = logistic(linear(net, z, prefix + ".ca2"));
    return x + scale_axis(y, g, 2);
}

void register_maxim_stack(ParamStore& s, const std::string& prefix, int stages, int n1,
                          int n2, int d, const std::string& wiring, uint64_t seed) {
    for (int i = 0; i < stages; ++i) {
        std::string sp = prefix + ".s" + std::to_string(i);
        register_mab(s, sp + ".mab", n1, n2, d, wiring, seed);
        register_rcab(s, sp + ".rcab", d, seed);
    }
}

Var maxim_stack(const Net& net, Var x, const std::string& prefix, int stages,
                const std::string& wiring) {
    for (int i = 0; i < stages; ++i) {
        std::string sp = prefix + ".s" + std::to_string(i);
        x = mab(net, x, sp + ".mab", wiring);
        x = rcab(net, x, sp + ".rcab");
    }
    return x;
}

RealGrid positional_table(int n1, int n2, int d) {
    RealGrid pe({n1, n2, d});
    int dh = d / 2;
    auto fill = [&](int pos, int c_off, int dh_len, int i, int j) {
        for (int c = 0; c < dh_len; ++c) {
            double expo = (double)(2 * (c / 2)) / (double)dh_len;
            double w = std::pow(10000.0, -expo);
            double v = (c % 2 == 0) ? std::sin(pos * w) : std::cos(pos * w);
            pe.at3(i, j, c_off + c) = v;
        }
    };
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            fill(i, 0, dh, i, j);
            fill(j, dh, d - dh, i, j);
        }
    return pe;
}

int64_t mab_spatial_projection_multiplies(int n1, int n2, int d) {
    // Half the channels project along each token axis: n1^2 * n2 * d/2 plus
    // n2^2 * n1 * d/2.
    return (int64_t)n1 * n2 * (n1 + n2) * (d / 2);
}

}  // namespace ag
}  // namespace csifb
