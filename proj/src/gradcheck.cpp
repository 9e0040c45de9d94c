// SPDX-License-Identifier: Apache-2.0

#include "csifb/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "csifb/rng.hpp"

namespace csifb {

std::vector<GradientReport> grad_check(
    const std::function<ag::Var(ag::Tape&, const ag::LeafMap&)>& f, ParamStore& params,
    const GradCheckOptions& opt) {
    // Analytic pass.
    std::map<std::string, RealGrid> analytic;
    {
        ag::Tape t;
        ag::LeafMap leaves = ag::make_leaves(t, params, true);
        ag::Var loss = f(t, leaves);
        t.backward(loss);
        for (auto& [name, var] : leaves) analytic.emplace(name, t.grad(var));
    }

    auto eval_loss = [&]() {
        ag::Tape t;
        ag::LeafMap leaves = ag::make_leaves(t, params, false);
        return t.val(f(t, leaves))[0];
    };

    std::vector<GradientReport> reports;
    for (auto& [name, entry] : params.entries) {
        const RealGrid& g = analytic.at(name);
        GradientReport rep;
        rep.name = name;
        rep.grad_norm = g.frob_norm();

        int64_t n = entry.value.size();
        std::vector<int64_t> coords;
        if (n <= opt.max_coords_per_block) {
            for (int64_t i = 0; i < n; ++i) coords.push_back(i);
        } else {
            Rng rng(substream(opt.select_seed, {fnv1a64_str(name)}));
            for (int i = 0; i < opt.max_coords_per_block; ++i)
                coords.push_back((int64_t)(rng.next_u64() % (uint64_t)n));
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
        }

        double max_dev = 0.0;
        for (int64_t c : coords) {
            double theta = entry.value[c];
            double h = opt.rel_step * (1.0 + std::abs(theta));
            entry.value[c] = theta + h;
            double fp = eval_loss();
            entry.value[c] = theta - h;
            double fm = eval_loss();
            entry.value[c] = theta;
            double fd = (fp - fm) / (2.0 * h);
            double a = g[c];
            double denom = std::max({std::abs(a), std::abs(fd), 1e-3});
            max_dev = std::max(max_dev, std::abs(a - fd) / denom);
        }
        rep.max_rel_dev = max_dev;
        rep.pass = max_dev <= opt.tol;
        reports.push_back(std::move(rep));
    }
    return reports;
}

bool all_pass(const std::vector<GradientReport>& reports) {
    for (const auto& r : reports)
        if (!r.pass) return false;
    return true;
}

}  // namespace csifb
