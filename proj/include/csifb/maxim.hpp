// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "csifb/config.hpp"
#include "csifb/params.hpp"

namespace csifb {
namespace ag {

// Axis-gated MLP over a [n1, n2, d] grid. `axis` selects the token axis the
// spatial gate projects along (0: subcarrier, 1: antenna).
//
// R1  = GELU(LN(X) W1 + b1)
// U,V = channel split of R1
// SGU = U . (W2-projection of LN(V) along `axis` + b2)
// out = X + (SGU W3 + b3)
//
// Init: W2 = 0, b2 = 1 (gate starts as pass-through), W3 = 0, so the block
// is the identity map at initialization.
void register_gmlp(ParamStore& s, const std::string& prefix, int d, int axis_len,
                   uint64_t seed);
Var gmlp_axis(const Net& net, Var x, const std::string& prefix, int axis);

// Multi-axis gated block. Parallel wiring: channel halves gate along the two
// token axes separately, then a (zero-initialized) merge projection and a
// residual add. Serial wiring: full-width gMLPs along axis 0 then axis 1.
void register_mab(ParamStore& s, const std::string& prefix, int n1, int n2, int d,
                  const std::string& wiring, uint64_t seed);
Var mab(const Net& net, Var x, const std::string& prefix, const std::string& wiring);

// Residual channel attention block: token MLP -> global pooling -> bottleneck
// (ratio 4) -> logistic gate on channels. Token-MLP output is
// zero-initialized, so the block starts as the identity.
void register_rcab(ParamStore& s, const std::string& prefix, int d, uint64_t seed);
Var rcab(const Net& net, Var x, const std::string& prefix);

// L cascaded MAB+RCAB stages.
void register_maxim_stack(ParamStore& s, const std::string& prefix, int stages, int n1,
                          int n2, int d, const std::string& wiring, uint64_t seed);
Var maxim_stack(const Net& net, Var x, const std::string& prefix, int stages,
                const std::string& wiring);

// Fixed sinusoidal positional table [n1, n2, d]; the first d/2 channels
// encode the axis-0 position, the rest the axis-1 position.
RealGrid positional_table(int n1, int n2, int d);

// Spatial-projection multiply count of one parallel MAB: n1*n2*(n1+n2)*(d/2).
int64_t mab_spatial_projection_multiplies(int n1, int n2, int d);

}  // namespace ag
}  // namespace csifb
