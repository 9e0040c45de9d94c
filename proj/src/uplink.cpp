// SPDX-License-Identifier: Apache-2.0

#include "csifb/uplink.hpp"

#include <cmath>

#include "csifb/numeric.hpp"

namespace csifb {

namespace {

// Extracts H_eff[n] as an [N_t, K] matrix from the [m, N_t, K] stack.
ComplexGrid heff_at(const ComplexGrid& h_eff, int n) {
    int nt = h_eff.shape()[1], k = h_eff.shape()[2];
    ComplexGrid out({nt, k});
    int64_t base = (int64_t)n * nt * k;
    for (int64_t i = 0; i < (int64_t)nt * k; ++i) {
        out.re[i] = h_eff.re[base + i];
        out.im[i] = h_eff.im[base + i];
    }
    return out;
}

ComplexGrid row_as_col(const ComplexGrid& mat, int row) {
    int cols = mat.shape()[1];
    ComplexGrid out({cols, 1});
    for (int j = 0; j < cols; ++j) out.set2(j, 0, mat.at2(row, j));
    return out;
}

}  // namespace

ComplexGrid effective_channel(const ComplexGrid& h_u_k) {
    const Shape& s = h_u_k.shape();
    if (s.size() != 3) throw DimensionError("effective_channel: expected [N_c, N_t, N_r]");
    int nc = s[0], nt = s[1], nr = s[2];
    ComplexGrid out({nc, nt});
    for (int n = 0; n < nc; ++n)
        for (int t = 0; t < nt; ++t) {
            std::complex<double> acc = 0;
            for (int r = 0; r < nr; ++r)
                acc += h_u_k.at(((int64_t)n * nt + t) * nr + r);
            out.set2(n, t, acc);
        }
    return out;
}

ComplexGrid stack_effective_channels(const ComplexGrid& h_u, int m) {
    const Shape& s = h_u.shape();
    if (s.size() != 4) throw DimensionError("stack_effective_channels: expected [K, N_c, N_t, N_r]");
    int k_users = s[0], nc = s[1], nt = s[2], nr = s[3];
    if (m > nc) throw DimensionError("stack_effective_channels: m exceeds N_c");
    ComplexGrid out({m, nt, k_users});
    for (int k = 0; k < k_users; ++k)
        for (int n = 0; n < m; ++n)
            for (int t = 0; t < nt; ++t) {
                std::complex<double> acc = 0;
                for (int r = 0; r < nr; ++r)
                    acc += h_u.at((((int64_t)k * nc + n) * nt + t) * nr + r);
                out.set(((int64_t)n * nt + t) * k_users + k, acc);
            }
    return out;
}

ComplexGrid draw_cnoise(int rows, int cols, double sigma_u, uint64_t seed) {
    ComplexGrid z({rows, cols});
    if (sigma_u == 0.0) return z;
    Rng rng(seed);
    double s = sigma_u * M_SQRT1_2;  // per real dimension
    for (int64_t i = 0; i < z.size(); ++i) {
        z.re[i] = s * rng.normal();
        z.im[i] = s * rng.normal();
    }
    return z;
}

ComplexGrid uplink_transmit(const ComplexGrid& s, const ComplexGrid& h_eff, double sigma_u,
                            Rng& rng) {
    if (sigma_u < 0) throw ConfigError("uplink_transmit: sigma_u must be nonnegative");
    int m = s.shape()[0], k = s.shape()[1];
    int nt = h_eff.shape()[1];
    if (h_eff.shape()[0] != m || h_eff.shape()[2] != k)
        throw DimensionError("uplink_transmit: H_eff/S shape mismatch");
    ComplexGrid y({m, nt});
    double sd = sigma_u * M_SQRT1_2;
    for (int n = 0; n < m; ++n) {
        ComplexGrid hn = heff_at(h_eff, n);
        for (int t = 0; t < nt; ++t) {
            std::complex<double> acc = 0;
            for (int u = 0; u < k; ++u) acc += hn.at2(t, u) * s.at2(n, u);
            if (sigma_u > 0) acc += std::complex<double>(sd * rng.normal(), sd * rng.normal());
            y.set2(n, t, acc);
        }
    }
    return y;
}

ComplexGrid mmse_matrix(const ComplexGrid& h, double sigma_u) {
    int k = h.shape()[1];
    ComplexGrid hh = cconj_transpose(h);
    ComplexGrid gram = cmatmul(hh, h);
    for (int i = 0; i < k; ++i) gram.re.at2(i, i) += sigma_u * sigma_u;
    return hermitian_solve(gram, hh);
}

UplinkOutcome mmse_detect(const ComplexGrid& y, const ComplexGrid& h_eff, double sigma_u) {
    int m = y.shape()[0], nt = y.shape()[1];
    int k = h_eff.shape()[2];
    UplinkOutcome out;
    out.shat = ComplexGrid({m, k});
    out.resource_units = m;
    out.residual_mse.resize((size_t)m);
    for (int n = 0; n < m; ++n) {
        ComplexGrid hn = heff_at(h_eff, n);
        ComplexGrid w = mmse_matrix(hn, sigma_u);
        ComplexGrid yn = row_as_col(y, n);
        ComplexGrid sn = cmatmul(w, yn);
        for (int u = 0; u < k; ++u) out.shat.set2(n, u, sn.at2(u, 0));
        ComplexGrid yhat = cmatmul(hn, sn);
        double res = 0;
        for (int t = 0; t < nt; ++t) {
            auto d = yn.at2(t, 0) - yhat.at2(t, 0);
            res += std::norm(d);
        }
        out.residual_mse[(size_t)n] = res / nt;
    }
    return out;
}

UplinkOutcome tdma_mrc_uplink(const ComplexGrid& s, const ComplexGrid& h_eff, double sigma_u,
                              Rng& rng) {
    int m = s.shape()[0], k = s.shape()[1];
    int nt = h_eff.shape()[1];
    UplinkOutcome out;
    out.shat = ComplexGrid({m, k});
    out.resource_units = k * m;
    out.residual_mse.assign((size_t)m, 0.0);
    double sd = sigma_u * M_SQRT1_2;
    for (int u = 0; u < k; ++u)
        for (int n = 0; n < m; ++n) {
            double h2 = 0;
            std::complex<double> acc = 0;
            for (int t = 0; t < nt; ++t) {
                std::complex<double> h = h_eff.at(((int64_t)n * nt + t) * k + u);
                h2 += std::norm(h);
                std::complex<double> yt = h * s.at2(n, u);
                if (sigma_u > 0)
                    yt += std::complex<double>(sd * rng.normal(), sd * rng.normal());
                acc += std::conj(h) * yt;
            }
            if (h2 <= 0.0)
                throw DegenerateInputError("tdma_mrc_uplink: zero channel vector, user " +
                                           std::to_string(u));
            out.shat.set2(n, u, acc / h2);
        }
    return out;
}

UplinkOutcome awgn_uplink(const ComplexGrid& s, double sigma_u, Rng& rng) {
    int m = s.shape()[0], k = s.shape()[1];
    UplinkOutcome out;
    out.shat = ComplexGrid({m, k});
    out.resource_units = m;
    out.residual_mse.assign((size_t)m, 0.0);
    double sd = sigma_u * M_SQRT1_2;
    for (int64_t i = 0; i < s.size(); ++i) {
        out.shat.re[i] = s.re[i] + (sigma_u > 0 ? sd * rng.normal() : 0.0);
        out.shat.im[i] = s.im[i] + (sigma_u > 0 ? sd * rng.normal() : 0.0);
    }
    return out;
}

std::vector<double> sscc_roundtrip(const std::vector<double>& s, const SsccConfig& cfg,
                                   Rng& rng) {
    double c = cfg.clip_halfwidth;
    if (c <= 0) throw ConfigError("sscc_roundtrip: clip_halfwidth must be positive");
    int q = cfg.q;
    uint32_t levels = 1u << q;
    std::vector<double> out(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        double x = std::min(std::max(s[i], -c), c);
        double u = (x + c) / (2.0 * c);
        uint32_t level = (uint32_t)std::min((double)(levels - 1), std::floor(u * levels));
        // One uniform draw per bit regardless of the flip probability, so
        // sweeps over ber share common random numbers.
        if (cfg.bit_channel == "bsc") {
            for (int b = 0; b < q; ++b)
                if (rng.uniform() < cfg.ber) level ^= (1u << b);
        }
        out[i] = -c + (level + 0.5) * (2.0 * c / levels);
    }
    return out;
}

SymbolCost sscc_symbol_cost(int b, int q, double r, int a) {
    if (a < 2 || (a & (a - 1))) throw ConfigError("sscc_symbol_cost: a must be a power of 2");
    if (r <= 0 || r > 1) throw ConfigError("sscc_symbol_cost: r must be in (0, 1]");
    SymbolCost out;
    out.exact = (double)b * q / (r * std::log2((double)a));
    double rounded = std::round(out.exact);
    out.integral = std::abs(out.exact - rounded) < 1e-9;
    out.symbols = (int64_t)rounded;
    return out;
}

double detector_mse(const ComplexGrid& w, const ComplexGrid& h, double sigma_u) {
    int k = h.shape()[1];
    ComplexGrid wh = cmatmul(w, h);
    double e = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            auto v = wh.at2(i, j) - ((i == j) ? std::complex<double>(1, 0)
                                              : std::complex<double>(0, 0));
            e += std::norm(v);
        }
    return e + sigma_u * sigma_u * w.frob_norm_sq();
}

// ---------------------------------------------------------------------------
// tape-level
// ---------------------------------------------------------------------------

namespace ag {

namespace {

CVar const_mat(Tape& t, const ComplexGrid& g) { return cconst(t, g); }

// Column n of the tape-level [m, K] symbol grid as [K, 1].
CVar symbol_col(CVar s, int n, int k) {
    Var re = reshape(slice(s.re, 0, n, 1), {k, 1});
    Var im = reshape(slice(s.im, 0, n, 1), {k, 1});
    return {re, im};
}

}  // namespace

CVar uplink_transmit_t(Tape& t, CVar s, const ComplexGrid& h_eff, const ComplexGrid& noise) {
    int m = t.shape(s.re)[0], k = t.shape(s.re)[1];
    int nt = h_eff.shape()[1];
    std::vector<Var> rows_re, rows_im;
    for (int n = 0; n < m; ++n) {
        CVar hn = const_mat(t, heff_at(h_eff, n));  // [N_t, K]
        CVar sn = symbol_col(s, n, k);
        CVar yn = cmatmul(hn, sn);  // [N_t, 1]
        ComplexGrid zn({nt, 1});
        for (int tt = 0; tt < nt; ++tt) zn.set2(tt, 0, noise.at2(n, tt));
        CVar ynz = cadd(yn, const_mat(t, zn));
        rows_re.push_back(reshape(ynz.re, {1, nt}));
        rows_im.push_back(reshape(ynz.im, {1, nt}));
    }
    return {concat(rows_re, 0), concat(rows_im, 0)};
}

UplinkResultT mmse_detect_t(Tape& t, CVar y, const ComplexGrid& h_eff, double sigma_u) {
    int m = t.shape(y.re)[0], nt = t.shape(y.re)[1];
    int k = h_eff.shape()[2];
    std::vector<Var> rows_re, rows_im;
    for (int n = 0; n < m; ++n) {
        ComplexGrid hn = heff_at(h_eff, n);
        ComplexGrid gram = cmatmul(cconj_transpose(hn), hn);
        for (int i = 0; i < k; ++i) gram.re.at2(i, i) += sigma_u * sigma_u;
        CVar a = const_mat(t, gram);
        CVar hh = const_mat(t, cconj_transpose(hn));  // [K, N_t]
        CVar yn{reshape(slice(y.re, 0, n, 1), {nt, 1}),
                reshape(slice(y.im, 0, n, 1), {nt, 1})};
        CVar b = cmatmul(hh, yn);               // [K, 1]
        CVar sn = hermitian_solve(a, b);        // [K, 1]
        rows_re.push_back(reshape(sn.re, {1, k}));
        rows_im.push_back(reshape(sn.im, {1, k}));
    }
    return {{concat(rows_re, 0), concat(rows_im, 0)}, m};
}

UplinkResultT tdma_mrc_t(Tape& t, CVar s, const ComplexGrid& h_eff, double sigma_u,
                         const ComplexGrid& noise) {
    int m = t.shape(s.re)[0], k = t.shape(s.re)[1];
    int nt = h_eff.shape()[1];
    (void)sigma_u;
    std::vector<Var> rows_re, rows_im;
    for (int n = 0; n < m; ++n) {
        std::vector<Var> cell_re, cell_im;
        for (int u = 0; u < k; ++u) {
            // h for this user/subcarrier and the MRC weights are constants.
            ComplexGrid h({nt, 1});
            double h2 = 0;
            for (int tt = 0; tt < nt; ++tt) {
                auto v = h_eff.at(((int64_t)n * nt + tt) * k + u);
                h.set2(tt, 0, v);
                h2 += std::norm(v);
            }
            if (h2 <= 0.0)
                throw DegenerateInputError("tdma_mrc: zero channel vector, user " +
                                           std::to_string(u));
            // shat = s + h^H z / ||h||^2 with z from this user's slot.
            std::complex<double> hz = 0;
            for (int tt = 0; tt < nt; ++tt)
                hz += std::conj(h.at2(tt, 0)) * noise.at2(u * m + n, tt);
            hz /= h2;
            Var sre = reshape(slice(slice(s.re, 0, n, 1), 1, u, 1), {1, 1});
            Var sim = reshape(slice(slice(s.im, 0, n, 1), 1, u, 1), {1, 1});
            cell_re.push_back(add_scalar(sre, hz.real()));
            cell_im.push_back(add_scalar(sim, hz.imag()));
        }
        rows_re.push_back(concat(cell_re, 1));
        rows_im.push_back(concat(cell_im, 1));
    }
    return {{concat(rows_re, 0), concat(rows_im, 0)}, k * m};
}

UplinkResultT awgn_t(Tape& t, CVar s, const ComplexGrid& noise) {
    int m = t.shape(s.re)[0];
    CVar z = cconst(t, noise);
    return {cadd(s, z), m};
}

}  // namespace ag

}  // namespace csifb
