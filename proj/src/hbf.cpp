// SPDX-License-Identifier: Apache-2.0

#include "csifb/hbf.hpp"

#include <cmath>

#include "csifb/maxim.hpp"

namespace csifb {

ComplexGrid build_analog(const RealGrid& theta) {
    if (theta.rank() != 2) throw DimensionError("build_analog: expected [N_t, N_RF]");
    int nt = theta.shape[0];
    double a = 1.0 / std::sqrt((double)nt);
    ComplexGrid f(theta.shape);
    for (int64_t i = 0; i < theta.size(); ++i) {
        f.re[i] = a * std::cos(theta[i]);
        f.im[i] = a * std::sin(theta[i]);
    }
    return f;
}

ComplexGrid normalize_power(const ComplexGrid& f_rf, const ComplexGrid& f_bb_raw) {
    const Shape& s = f_bb_raw.shape();
    if (s.size() != 3) throw DimensionError("normalize_power: expected [N_c, N_RF, K]");
    int nc = s[0], nrf = s[1], k = s[2];
    int nt = f_rf.shape()[0];
    ComplexGrid out = f_bb_raw;
    for (int n = 0; n < nc; ++n) {
        double p = 0;
        for (int t = 0; t < nt; ++t)
            for (int u = 0; u < k; ++u) {
                std::complex<double> acc = 0;
                for (int r = 0; r < nrf; ++r)
                    acc += f_rf.at2(t, r) * f_bb_raw.at(((int64_t)n * nrf + r) * k + u);
                p += std::norm(acc);
            }
        if (p <= 0.0)
            throw DegenerateInputError("normalize_power: zero F_RF*F_BB product at subcarrier " +
                                       std::to_string(n));
        double scale = std::sqrt((double)k / p);
        for (int r = 0; r < nrf; ++r)
            for (int u = 0; u < k; ++u) {
                int64_t i = ((int64_t)n * nrf + r) * k + u;
                out.re[i] *= scale;
                out.im[i] *= scale;
            }
    }
    return out;
}

namespace ag {

void register_decoder(ParamStore& s, const SystemConfig& sys, uint64_t seed) {
    int c3 = 2 * sys.K * sys.N_r;
    int cv = 2 * sys.K * sys.N_s;
    register_linear(s, "dec.input", 2 * sys.K * sys.m, sys.N_c * sys.N_t * c3, seed);
    register_maxim_stack(s, "dec.l3", sys.L3, sys.N_c, sys.N_t, c3, sys.mab_wiring, seed);
    register_linear(s, "dec.virt", c3, cv, seed);
    register_maxim_stack(s, "dec.l4", sys.L4, sys.N_c, sys.N_t, cv, sys.mab_wiring, seed);
    register_linear(s, "dec.analog_head", cv, sys.N_RF, seed);
    register_maxim_stack(s, "dec.l5", sys.L5, sys.N_c, sys.N_t, cv, sys.mab_wiring, seed);
    register_linear(s, "dec.digital_head", cv, 2 * sys.N_RF * sys.K * sys.N_s, seed);
}

DecoderOut decode_to_beamformer(const Net& net, const SystemConfig& sys, CVar shat) {
    Tape& t = net.t;
    const Shape& ss = t.shape(shat.re);
    if (ss.size() != 2 || ss[0] != sys.m || ss[1] != sys.K)
        throw DimensionError("decode_to_beamformer: expected [m, K] symbols, got " +
                             shape_str(ss));
    // Realify user-major: [re_k ; im_k] blocks.
    std::vector<Var> parts;
    for (int k = 0; k < sys.K; ++k) {
        parts.push_back(reshape(slice(shat.re, 1, k, 1), {sys.m}));
        parts.push_back(reshape(slice(shat.im, 1, k, 1), {sys.m}));
    }
    Var a = concat(parts, 0);  // [2Km]

    int c3 = 2 * sys.K * sys.N_r;
    Var x = linear(net, reshape(a, {1, 2 * sys.K * sys.m}), "dec.input");
    x = reshape(x, {sys.N_c, sys.N_t, c3});
    x = maxim_stack(net, x, "dec.l3", sys.L3, sys.mab_wiring);
    Var f_virt = linear(net, x, "dec.virt");  // [N_c, N_t, 2KN_s]

    // Analog branch: frequency-flat phases via the subcarrier mean.
    Var xa = maxim_stack(net, f_virt, "dec.l4", sys.L4, sys.mab_wiring);
    xa = linear(net, xa, "dec.analog_head");  // [N_c, N_t, N_RF]
    Var theta = mean_axis(xa, 0);             // [N_t, N_RF]

    // Digital branch: per-subcarrier coefficients via the antenna mean.
    Var xd = maxim_stack(net, f_virt, "dec.l5", sys.L5, sys.mab_wiring);
    xd = linear(net, xd, "dec.digital_head");  // [N_c, N_t, 2*N_RF*K*N_s]
    Var fb = mean_axis(xd, 1);                 // [N_c, 2*N_RF*K*N_s]

    // Last axis pairs (K, 2): index 2k is the real part, 2k+1 the imaginary.
    Var fb3 = reshape(fb, {sys.N_c, sys.N_RF, 2 * sys.K * sys.N_s});
    DecoderOut out;
    out.theta = theta;
    for (int n = 0; n < sys.N_c; ++n) {
        Var fn = reshape(slice(fb3, 0, n, 1), {sys.N_RF, sys.K, 2});
        Var re = reshape(slice(fn, 2, 0, 1), {sys.N_RF, sys.K});
        Var im = reshape(slice(fn, 2, 1, 1), {sys.N_RF, sys.K});
        out.f_bb.push_back({re, im});
    }
    return out;
}

CVar build_analog_t(Var theta) {
    int nt = theta.t->shape(theta)[0];
    double a = 1.0 / std::sqrt((double)nt);
    return {mul_scalar(vcos(theta), a), mul_scalar(vsin(theta), a)};
}

CVar normalize_power_t(CVar f_rf, CVar f_bb_raw_n, int k_users) {
    CVar g = cmatmul(f_rf, f_bb_raw_n);  // [N_t, K]
    Var p = cpower(g);
    if (p.t->val(p)[0] <= 0.0)
        throw DegenerateInputError("normalize_power: zero F_RF*F_BB product");
    Var scale = mul_scalar(powc(p, -0.5), std::sqrt((double)k_users));
    return cmul_scalarvar(f_bb_raw_n, scale);
}

BeamformerT assemble_beamformer(const Net& net, const SystemConfig& sys, CVar shat) {
    DecoderOut dec = decode_to_beamformer(net, sys, shat);
    BeamformerT b;
    b.theta = dec.theta;
    b.f_rf = build_analog_t(dec.theta);
    for (int n = 0; n < sys.N_c; ++n)
        b.f_bb.push_back(normalize_power_t(b.f_rf, dec.f_bb[(size_t)n], sys.K));
    return b;
}

HybridBeamformer read_beamformer(const Net& net, const SystemConfig& sys,
                                 const BeamformerT& b) {
    HybridBeamformer out;
    out.theta = net.t.val(b.theta);
    out.f_rf = ComplexGrid(net.t.val(b.f_rf.re), net.t.val(b.f_rf.im));
    out.f_bb = ComplexGrid({sys.N_c, sys.N_RF, sys.K});
    for (int n = 0; n < sys.N_c; ++n) {
        const RealGrid& re = net.t.val(b.f_bb[(size_t)n].re);
        const RealGrid& im = net.t.val(b.f_bb[(size_t)n].im);
        for (int64_t i = 0; i < re.size(); ++i) {
            out.f_bb.re[(int64_t)n * re.size() + i] = re[i];
            out.f_bb.im[(int64_t)n * re.size() + i] = im[i];
        }
    }
    return out;
}

}  // namespace ag
}  // namespace csifb
