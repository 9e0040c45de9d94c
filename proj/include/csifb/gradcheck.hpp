// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "csifb/params.hpp"
#include "csifb/tape.hpp"

namespace csifb {

struct GradientReport {
    std::string name;
    double grad_norm = 0.0;
    double max_rel_dev = 0.0;
    bool pass = false;
};

struct GradCheckOptions {
    double tol = 1e-4;
    // Central differences with step rel_step * (1 + |theta|).
    double rel_step = 1e-5;
    // Coordinates sampled per parameter block (deterministic selection).
    int max_coords_per_block = 64;
    uint64_t select_seed = 0;
};

// f must be deterministic: it rebuilds the computation on the given tape from
// the supplied leaves and returns the scalar loss node. Deviations are
// measured relative to max(|analytic|, |fd|) with a floor that keeps
// finite-difference roundoff on near-zero gradients from dominating.
std::vector<GradientReport> grad_check(
    const std::function<ag::Var(ag::Tape&, const ag::LeafMap&)>& f, ParamStore& params,
    const GradCheckOptions& opt = {});

bool all_pass(const std::vector<GradientReport>& reports);

}  // namespace csifb
