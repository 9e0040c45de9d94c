// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "csifb/channel.hpp"
#include "csifb/complex_ops.hpp"
#include "csifb/config.hpp"
#include "csifb/rng.hpp"

namespace csifb {

// Recovered multi-user symbols plus bookkeeping. `resource_units` counts
// uplink time-frequency units: m for simultaneous transmission, K*m for
// TDMA.
struct UplinkOutcome {
    ComplexGrid shat;                  // [m, K]
    std::vector<double> residual_mse;  // per subcarrier, ||y - H shat||^2 / N_t
    int resource_units = 0;
};

// h_eff[k, n] = H_u[k, n] * 1 (all-ones UE precoder). Input is one user's
// uplink CSI [N_c, N_t, N_r]; output column n of the result is h_eff for
// subcarrier n, shape [N_c, N_t].
ComplexGrid effective_channel(const ComplexGrid& h_u_k);

// Stacks the per-user effective channels of the first m subcarriers into
// [m, N_t, K].
ComplexGrid stack_effective_channels(const ComplexGrid& h_u, int m);

// y[n] = H_eff[n] s[n] + z[n]; noise CN(0, sigma_u^2) per complex entry.
ComplexGrid uplink_transmit(const ComplexGrid& s, const ComplexGrid& h_eff, double sigma_u,
                            Rng& rng);

// Per subcarrier: shat[n] = (H^H H + sigma_u^2 I)^{-1} H^H y[n].
UplinkOutcome mmse_detect(const ComplexGrid& y, const ComplexGrid& h_eff, double sigma_u);

// Each user transmits alone in its slot; shat_k[n] = h^H y / ||h||^2.
UplinkOutcome tdma_mrc_uplink(const ComplexGrid& s, const ComplexGrid& h_eff, double sigma_u,
                              Rng& rng);

// shat = s + z elementwise.
UplinkOutcome awgn_uplink(const ComplexGrid& s, double sigma_u, Rng& rng);

// ---- SSCC comparison path ---------------------------------------------------

// Uniform scalar quantization to q bits per dimension over
// [-clip_halfwidth, clip_halfwidth], bits through the configured bit channel,
// dequantized to bin centers. Bit flips are drawn in a fixed order so sweeps
// over the flip probability share common random numbers.
std::vector<double> sscc_roundtrip(const std::vector<double>& s, const SsccConfig& cfg,
                                   Rng& rng);

struct SymbolCost {
    double exact = 0.0;   // b*q / (r*log2 a)
    bool integral = false;
    int64_t symbols = 0;  // valid when integral
};
SymbolCost sscc_symbol_cost(int b, int q, double r, int a);

// Mean detector MSE E||W y - s||^2 under unit-power symbols, in closed form:
// ||W H - I||_F^2 + sigma_u^2 ||W||_F^2.
double detector_mse(const ComplexGrid& w, const ComplexGrid& h, double sigma_u);
ComplexGrid mmse_matrix(const ComplexGrid& h, double sigma_u);  // [K, N_t]

// ---- tape-level counterparts (gradients flow through the symbols) ----------
namespace ag {

struct UplinkResultT {
    CVar shat;  // [m, K]
    int resource_units = 0;
};

// noise: [m, N_t] for simultaneous, [K, m, N_t] laid out as [K*m, N_t] for
// TDMA, [m, K] for AWGN; scaled by sigma_u already.
CVar uplink_transmit_t(Tape& t, CVar s, const ComplexGrid& h_eff, const ComplexGrid& noise);
UplinkResultT mmse_detect_t(Tape& t, CVar y, const ComplexGrid& h_eff, double sigma_u);
UplinkResultT tdma_mrc_t(Tape& t, CVar s, const ComplexGrid& h_eff, double sigma_u,
                         const ComplexGrid& noise);
UplinkResultT awgn_t(Tape& t, CVar s, const ComplexGrid& noise);

}  // namespace ag

// Draws uplink noise with per-entry std sigma_u (complex), deterministic in
// the seed. shape rows x cols.
ComplexGrid draw_cnoise(int rows, int cols, double sigma_u, uint64_t seed);

}  // namespace csifb
