// SPDX-License-Identifier: Apache-2.0

#include "csifb/cpi.hpp"

namespace csifb {
namespace ag {

namespace {

void register_branch(ParamStore& s, const std::string& prefix, int n_t, uint64_t seed) {
    int w = 2 * n_t;
    register_linear(s, prefix + ".m1", w, w, seed);
    register_linear(s, prefix + ".m2", w, w, seed);
    register_linear(s, prefix + ".f1", w, w, seed);
    register_linear(s, prefix + ".f2", w, w, seed);
    register_linear(s, prefix + ".u1", 2 * w, w, seed);
    register_linear(s, prefix + ".u2", w, w, seed);
}

Var mlp2(const Net& net, Var x, const std::string& p1, const std::string& p2) {
    return linear(net, gelu(linear(net, x, p1)), p2);
}

// [N_c, N_t, 2] -> [N_c, 2*N_t], real parts then imaginary parts.
Var flatten_branch(Var x) {
    const Shape& s = x.t->shape(x);
    Var re = reshape(slice(x, 2, 0, 1), {s[0], s[1]});
    Var im = reshape(slice(x, 2, 1, 1), {s[0], s[1]});
    return concat({re, im}, 1);
}

Var unflatten_branch(Var x, int n_t) {
    const Shape& s = x.t->shape(x);
    Var re = reshape(slice(x, 1, 0, n_t), {s[0], n_t, 1});
    Var im = reshape(slice(x, 1, n_t, n_t), {s[0], n_t, 1});
    return concat({re, im}, 2);
}

}  // namespace

void register_cpi(ParamStore& s, const std::string& prefix, int n_t, bool shared,
                  uint64_t seed) {
    if (shared) {
        register_branch(s, prefix, n_t, seed);
    } else {
        register_branch(s, prefix + ".h", n_t, seed);
        register_branch(s, prefix + ".v", n_t, seed);
    }
}

std::pair<Var, Var> cpi(const Net& net, const SystemConfig& sys, const std::string& prefix,
                        Var p_h_in, Var p_v_in) {
    if (net.t.shape(p_h_in) != net.t.shape(p_v_in))
        throw DimensionError("cpi: branch shapes differ");
    const Shape& s = net.t.shape(p_h_in);
    if (s.size() != 3 || s[2] != 2) throw DimensionError("cpi: expected [N_c, N_t, 2] inputs");
    int n_t = s[1];
    std::string ph = sys.cpi_shared ? prefix : prefix + ".h";
    std::string pv = sys.cpi_shared ? prefix : prefix + ".v";

    Var h = flatten_branch(p_h_in);
    Var v = flatten_branch(p_v_in);

    Var m_h = mlp2(net, h, ph + ".m1", ph + ".m2");
    Var m_v = mlp2(net, v, pv + ".m1", pv + ".m2");

    // Column-wise softmax normalizes over rows (each column sums to one).
    int sm_axis = sys.cpi_softmax == "col" ? 0 : 1;
    Var z_vh = softmax(matmul(m_h, transpose(m_v)), sm_axis);
    Var z_hv = softmax(matmul(m_v, transpose(m_h)), sm_axis);

    Var f_h = mlp2(net, h, ph + ".f1", ph + ".f2");
    Var f_v = mlp2(net, v, pv + ".f1", pv + ".f2");

    Var p_vh = matmul(z_vh, f_v);
    Var p_hv = matmul(z_hv, f_h);

    Var out_h = mlp2(net, concat({p_vh, h}, 1), ph + ".u1", ph + ".u2");
    Var out_v = mlp2(net, concat({p_hv, v}, 1), pv + ".u1", pv + ".u2");

    return {unflatten_branch(out_h, n_t), unflatten_branch(out_v, n_t)};
}

}  // namespace ag
}  // namespace csifb
