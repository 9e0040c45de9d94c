// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "csifb/grid.hpp"
#include "csifb/rng.hpp"
#include "csifb/tape.hpp"

namespace csifb {

// Named parameter tree with optimizer state. Single writer per training
// step; reads are shared.
struct ParamStore {
    struct Entry {
        RealGrid value;
        RealGrid grad;
        RealGrid m;  // Adam first moment
        RealGrid v;  // Adam second moment
    };

    std::map<std::string, Entry> entries;

    bool has(const std::string& name) const { return entries.count(name) != 0; }

    RealGrid& value(const std::string& name) {
        auto it = entries.find(name);
        if (it == entries.end()) throw ConfigError("unknown parameter: " + name);
        return it->second.value;
    }
    const RealGrid& value(const std::string& name) const {
        auto it = entries.find(name);
        if (it == entries.end()) throw ConfigError("unknown parameter: " + name);
        return it->second.value;
    }

    void create(const std::string& name, Shape shape) {
        if (has(name)) throw ConfigError("duplicate parameter: " + name);
        Entry e;
        e.value = RealGrid::zeros(shape);
        e.grad = RealGrid::zeros(shape);
        e.m = RealGrid::zeros(shape);
        e.v = RealGrid::zeros(std::move(shape));
        entries.emplace(name, std::move(e));
    }

    // Gaussian init, std = scale / sqrt(fan_in). The stream is derived from
    // (seed, name) so initialization does not depend on creation order.
    void create_random(const std::string& name, Shape shape, int fan_in, uint64_t seed,
                       double scale = 1.0) {
        create(name, shape);
        Rng rng(substream(seed, {fnv1a64_str(name)}));
        RealGrid& v = entries.at(name).value;
        double s = scale / std::sqrt((double)std::max(1, fan_in));
        for (int64_t i = 0; i < v.size(); ++i) v[i] = rng.normal() * s;
    }

    void create_const(const std::string& name, Shape shape, double fill) {
        create(name, std::move(shape));
        RealGrid& v = entries.at(name).value;
        std::fill(v.data.begin(), v.data.end(), fill);
    }

    int64_t total_params() const {
        int64_t n = 0;
        for (const auto& [k, e] : entries) n += e.value.size();
        return n;
    }

    void zero_grads() {
        for (auto& [k, e] : entries)
            std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
    }
};

namespace ag {

using LeafMap = std::map<std::string, Var>;

inline LeafMap make_leaves(Tape& t, const ParamStore& store, bool requires_grad = true) {
    LeafMap m;
    for (const auto& [name, e] : store.entries) m.emplace(name, t.leaf(e.value, requires_grad));
    return m;
}

// Forward-pass context: the tape plus the parameter leaves.
struct Net {
    Tape& t;
    const LeafMap& p;
    Var P(const std::string& name) const {
        auto it = p.find(name);
        if (it == p.end()) throw ConfigError("parameter leaf missing: " + name);
        return it->second;
    }
};

// y = x W + b over the last axis.
inline Var linear(const Net& net, Var x, const std::string& prefix) {
    Var y = contract_last(x, net.P(prefix + ".w"));
    return add_bias(y, net.P(prefix + ".b"), (int)net.t.shape(y).size() - 1);
}

inline void register_linear(ParamStore& s, const std::string& prefix, int in, int out,
                            uint64_t seed) {
    s.create_random(prefix + ".w", {in, out}, in, seed);
    s.create_const(prefix + ".b", {out}, 0.0);
}

inline void register_linear_zero(ParamStore& s, const std::string& prefix, int in, int out) {
    s.create_const(prefix + ".w", {in, out}, 0.0);
    s.create_const(prefix + ".b", {out}, 0.0);
}

}  // namespace ag
}  // namespace csifb
