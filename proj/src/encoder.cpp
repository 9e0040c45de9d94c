// SPDX-License-Identifier: Apache-2.0

#include "csifb/encoder.hpp"

#include "csifb/cpi.hpp"
#include "csifb/maxim.hpp"

namespace csifb {
namespace ag {

void register_encoder(ParamStore& s, const SystemConfig& sys, uint64_t seed) {
    int d = sys.d_model;
    int w2 = sys.trunk2_width();
    register_linear(s, "enc.embed", 2, d, seed);
    register_maxim_stack(s, "enc.l1", sys.L1, sys.N_c, sys.N_t, d, sys.mab_wiring, seed);
    register_linear(s, "enc.branch_head", d, 2, seed);
    if (sys.cpi) register_cpi(s, "enc.cpi", sys.N_t, sys.cpi_shared, seed);
    register_linear(s, "enc.reembed", 2 * sys.N_r, w2, seed);
    register_maxim_stack(s, "enc.l2", sys.L2, sys.N_c, sys.N_t, w2, sys.mab_wiring, seed);
    register_linear(s, "enc.head", sys.N_c * sys.N_t * w2, 2 * sys.m, seed);
}

void split_polarization(const ComplexGrid& h_d_k, RealGrid& h_pol_h, RealGrid& h_pol_v) {
    const Shape& s = h_d_k.shape();
    if (s.size() != 3) throw DimensionError("split_polarization: expected [N_c, N_r, N_t]");
    int nc = s[0], nr = s[1], nt = s[2];
    if (nr != 2)
        throw ConfigError("split_polarization: dual-polarized receive requires N_r = 2, got " +
                          std::to_string(nr));
    h_pol_h = RealGrid({nc, nt, 2});
    h_pol_v = RealGrid({nc, nt, 2});
    for (int n = 0; n < nc; ++n)
        for (int t = 0; t < nt; ++t) {
            int64_t ih = ((int64_t)n * nr + 0) * nt + t;
            int64_t iv = ((int64_t)n * nr + 1) * nt + t;
            h_pol_h.at3(n, t, 0) = h_d_k.re[ih];
            h_pol_h.at3(n, t, 1) = h_d_k.im[ih];
            h_pol_v.at3(n, t, 0) = h_d_k.re[iv];
            h_pol_v.at3(n, t, 1) = h_d_k.im[iv];
        }
}

Var encode(const Net& net, const SystemConfig& sys, const ComplexGrid& h_d_k) {
    if (sys.N_r != 2)
        throw ConfigError("encode: dual-polarized receive requires N_r = 2");
    h_d_k.ensure_finite("encoder input");
    RealGrid pol_h, pol_v;
    split_polarization(h_d_k, pol_h, pol_v);
    Tape& t = net.t;

    Var pe = t.constant(positional_table(sys.N_c, sys.N_t, sys.d_model));
    Var e_h = linear(net, t.constant(pol_h), "enc.embed") + pe;
    Var e_v = linear(net, t.constant(pol_v), "enc.embed") + pe;

    Var f_h = maxim_stack(net, e_h, "enc.l1", sys.L1, sys.mab_wiring);
    Var f_v = maxim_stack(net, e_v, "enc.l1", sys.L1, sys.mab_wiring);

    Var p_h = linear(net, f_h, "enc.branch_head");
    Var p_v = linear(net, f_v, "enc.branch_head");

    if (sys.cpi) {
        auto [c_h, c_v] = cpi(net, sys, "enc.cpi", p_h, p_v);
        p_h = c_h;
        p_v = c_v;
    }

    Var x = concat({p_h, p_v}, 2);  // [N_c, N_t, 2*N_r]
    x = linear(net, x, "enc.reembed");
    x = maxim_stack(net, x, "enc.l2", sys.L2, sys.mab_wiring);

    int w2 = sys.trunk2_width();
    Var flat = reshape(x, {1, sys.N_c * sys.N_t * w2});
    return reshape(linear(net, flat, "enc.head"), {2 * sys.m});
}

CVar to_complex_symbols(Var s, int m) {
    Tape& t = *s.t;
    if (t.shape(s) != Shape{2 * m})
        throw DimensionError("to_complex_symbols: expected [2m] input");
    Var re = reshape(slice(s, 0, 0, m), {m, 1});
    Var im = reshape(slice(s, 0, m, m), {m, 1});
    CVar sc{re, im};
    Var power = cpower(sc);
    if (t.val(power)[0] <= 0.0)
        throw DegenerateInputError("to_complex_symbols: all-zero feedback vector");
    Var scale = mul_scalar(powc(power, -0.5), std::sqrt((double)m));
    return cmul_scalarvar(sc, scale);
}

}  // namespace ag

ComplexGrid to_complex_symbols(const std::vector<double>& s) {
    if (s.size() % 2) throw DimensionError("to_complex_symbols: odd length");
    int m = (int)s.size() / 2;
    double power = 0;
    for (double v : s) power += v * v;
    if (power <= 0.0)
        throw DegenerateInputError("to_complex_symbols: all-zero feedback vector");
    double scale = std::sqrt((double)m / power);
    ComplexGrid out({m, 1});
    for (int i = 0; i < m; ++i) {
        out.re.at2(i, 0) = s[(size_t)i] * scale;
        out.im.at2(i, 0) = s[(size_t)(m + i)] * scale;
    }
    return out;
}

}  // namespace csifb
