// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "csifb/complex_ops.hpp"
#include "csifb/config.hpp"
#include "csifb/params.hpp"

namespace csifb {

// Value-level beamformer. F_RF entries have modulus 1/sqrt(N_t); after
// normalize_power, ||F_RF F_BB[n]||_F^2 = K for every subcarrier.
struct HybridBeamformer {
    RealGrid theta;   // [N_t, N_RF] radians
    ComplexGrid f_rf; // [N_t, N_RF]
    ComplexGrid f_bb; // [N_c, N_RF, K]
};

ComplexGrid build_analog(const RealGrid& theta);
// Scales each F_BB[n] so the power constraint holds with equality.
ComplexGrid normalize_power(const ComplexGrid& f_rf, const ComplexGrid& f_bb_raw);

namespace ag {

// BS-side decoder: realify detected symbols -> input linear + reshape ->
// L3 trunk -> virtual fully-digital stage -> analog branch (L4, head,
// subcarrier mean) and digital branch (L5, head, antenna mean).
void register_decoder(ParamStore& s, const SystemConfig& sys, uint64_t seed);

struct DecoderOut {
    Var theta;                 // [N_t, N_RF]
    std::vector<CVar> f_bb;    // per subcarrier, [N_RF, K], pre-normalization
};

DecoderOut decode_to_beamformer(const Net& net, const SystemConfig& sys, CVar shat);

struct BeamformerT {
    Var theta;
    CVar f_rf;                 // [N_t, N_RF]
    std::vector<CVar> f_bb;    // per subcarrier, [N_RF, K], power-normalized
};

CVar build_analog_t(Var theta);
// Returns F_BB[n] scaled so ||F_RF F_BB[n]||_F^2 = K.
CVar normalize_power_t(CVar f_rf, CVar f_bb_raw_n, int k_users);

BeamformerT assemble_beamformer(const Net& net, const SystemConfig& sys, CVar shat);

// Reads the tape values of a BeamformerT into a value-level beamformer.
HybridBeamformer read_beamformer(const Net& net, const SystemConfig& sys,
                                 const BeamformerT& b);

}  // namespace ag
}  // namespace csifb
