// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "csifb/channel.hpp"
#include "csifb/complex_ops.hpp"
#include "csifb/config.hpp"
#include "csifb/params.hpp"

namespace csifb {
namespace ag {

// UE-side pipeline, weight-shared across all users:
// realify -> polarization split -> embed + positional encoding ->
// L1 MAXIM per branch (shared) -> branch head to 2 channels -> CPI ->
// concat along polarization -> re-embed -> L2 MAXIM -> flatten -> 2m reals.
void register_encoder(ParamStore& s, const SystemConfig& sys, uint64_t seed);

// One user's downlink CSI [N_c, N_r, N_t] to the real feedback vector [2m].
Var encode(const Net& net, const SystemConfig& sys, const ComplexGrid& h_d_k);

// Pairs the 2m reals (first half real parts, second half imaginary parts)
// into m complex symbols scaled so the total power is exactly m.
CVar to_complex_symbols(Var s, int m);

// Splits one user's realified CSI into the two polarization branches, each
// [N_c, N_t, 2] with re/im on the last axis.
void split_polarization(const ComplexGrid& h_d_k, RealGrid& h_pol_h, RealGrid& h_pol_v);

}  // namespace ag

// Value-level symbol mapping for the feedback vector (same pairing and
// normalization as the tape op).
ComplexGrid to_complex_symbols(const std::vector<double>& s);

}  // namespace csifb
