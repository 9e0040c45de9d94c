// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "csifb/complex_ops.hpp"
#include "csifb/config.hpp"
#include "csifb/hbf.hpp"

namespace csifb {

struct RateBreakdown {
    RealGrid per_user_subcarrier;  // [K, N_c], bits/s/Hz
    double sum_rate = 0.0;         // (1/N_c) * sum over users and subcarriers
};

// Achievable rate of user k on one subcarrier given everyone's effective
// precoders w_{k'} (each [N_t, 1]). Computed as the log-det difference of two
// Hermitian PD matrices, log2 det(Phi + S_k) - log2 det(Phi), with
// Phi = sigma_d^2 I + sum_{k' != k} H w w^H H^H.
double user_rate(const ComplexGrid& h_dk_n, const std::vector<ComplexGrid>& w_all, int k,
                 double sigma_d);

// h_d: one sample's downlink CSI [K, N_c, N_r, N_t].
RateBreakdown sum_rate(const ComplexGrid& h_d, const HybridBeamformer& bf, double sigma_d);

namespace ag {

struct RateResultT {
    Var sum_rate;              // [1]
    RealGrid per_user_subcarrier;  // [K, N_c] values (no gradients)
};

Var user_rate_t(Tape& t, const ComplexGrid& h_dk_n, const std::vector<CVar>& w_all, int k,
                double sigma_d);

RateResultT sum_rate_t(Tape& t, const ComplexGrid& h_d, const BeamformerT& bf,
                       double sigma_d);

}  // namespace ag
}  // namespace csifb
