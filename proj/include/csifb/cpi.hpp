// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>

#include "csifb/config.hpp"
#include "csifb/params.hpp"

namespace csifb {
namespace ag {

// Cross-polarization interaction: bidirectional co-attention between the
// horizontal and vertical branch features. Inputs and outputs are
// [N_c, N_t, 2]; internally each branch is flattened to [N_c, 2*N_t] with
// real parts first, imaginary parts second.
//
// M_h/M_v    <- extractor-M MLP
// Z_{v->h}   = colsoftmax(M_h M_v^T), Z_{h->v} = colsoftmax(M_v M_h^T)
// F_h/F_v    <- extractor-F MLP on the original inputs
// P_{v->h}   = Z_{v->h} F_v, P_{h->v} = Z_{h->v} F_h
// outputs    = fusion MLP of concat(cross, original input)
//
// With shared weights (default) the module is equivariant under swapping the
// two polarization inputs.
void register_cpi(ParamStore& s, const std::string& prefix, int n_t, bool shared,
                  uint64_t seed);

std::pair<Var, Var> cpi(const Net& net, const SystemConfig& sys, const std::string& prefix,
                        Var p_h_in, Var p_v_in);

}  // namespace ag
}  // namespace csifb
