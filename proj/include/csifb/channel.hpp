// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <string>
#include <vector>

#include "csifb/config.hpp"
#include "csifb/grid.hpp"
#include "csifb/rng.hpp"

namespace csifb {

// One multipath component. Gains are per receive-polarization pairs sharing
// the same geometry; uplink gains may be an independent redraw.
struct Path {
    std::complex<double> beta_h, beta_v;        // downlink gains (h/v ports)
    std::complex<double> beta_ul_h, beta_ul_v;  // uplink gains
    double delay = 0.0;                         // seconds, in [0, tau_max]
    double aod = 0.0;                           // radians, BS side
    double aoa = 0.0;                           // radians, UE side
};

struct PathSet {
    std::vector<Path> paths;
};

struct ChannelSample {
    ComplexGrid H_d;  // [K, N_c, N_r, N_t]
    ComplexGrid H_u;  // [K, N_c, N_t, N_r]
    uint64_t seed = 0;
    std::vector<PathSet> paths;  // per user, kept for diagnostics
};

enum class LinkDirection { Downlink, Uplink };

// Half-wavelength ULA steering vector: entry i = exp(-j pi i sin(angle)).
ComplexGrid steering_vector(double angle, int n);

// Frequency response of one user's channel from its path set.
// Downlink: [N_c, N_r, N_t]; uplink: [N_c, N_t, N_r]. Receive polarization
// rows (downlink) / transmit polarization columns (uplink) alternate h/v and
// use the polarization-paired gains.
ComplexGrid synth_channel(const PathSet& paths, const SystemConfig& sys,
                          LinkDirection direction);

// Draws one user's paths: L ~ U{l_min..l_max}, angles U(-angle_max, angle_max),
// delays U(0, tau_max) with tau_max * f_s = N_c / 4. The v-port gain is
// rho_pol-correlated with the h-port gain and carries the co-polar power
// fraction xpd/(1+xpd).
PathSet draw_paths(Rng& rng, const SystemConfig& sys, const ChannelConfig& chan);

// One full multi-user draw, normalized per user.
ChannelSample make_sample(const SystemConfig& sys, const ChannelConfig& chan, uint64_t seed);

// Per-user Frobenius normalization: ||H_d[k]||_F^2 = N_c * N_r * N_t exactly
// (and identically for H_u[k]).
void normalize_sample(ChannelSample& sample);

// ---- dataset persistence --------------------------------------------------
// Layout: magic "CSID", u16 version=1, u32 count,K,N_c,N_r,N_t, u64 base
// seed; then per sample H_d and H_u as little-endian float32, interleaved
// re/im, row-major in the axis order above.

struct DatasetHeader {
    uint32_t count = 0, K = 0, N_c = 0, N_r = 0, N_t = 0;
    uint64_t base_seed = 0;
};

void generate_dataset(const SystemConfig& sys, const ChannelConfig& chan, int count,
                      uint64_t seed, const std::string& path);

DatasetHeader read_dataset_header(const std::string& path);

// Loads samples [first, first+count) (count = -1 for all).
std::vector<ChannelSample> load_dataset(const std::string& path, int first = 0,
                                        int count = -1);

uint64_t file_digest(const std::string& path);

}  // namespace csifb
