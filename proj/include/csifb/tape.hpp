// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "csifb/grid.hpp"

namespace csifb {
namespace ag {

class Tape;

// Lightweight handle to a tape node.
struct Var {
    Tape* t = nullptr;
    int id = -1;
    bool valid() const { return t != nullptr && id >= 0; }
};

// Reverse-mode tape over RealGrid values. Nodes are appended in evaluation
// order, so reverse iteration is a valid topological order for backprop.
// Gradients propagate only through nodes that require them; constant
// subgraphs (channel realizations, noise draws) cost nothing on the way back.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(RealGrid v, bool requires_grad = true);
    Var constant(RealGrid v) { return leaf(std::move(v), false); }
    Var scalar_const(double v) { return constant(RealGrid::scalar(v)); }

    const RealGrid& val(Var x) const { return nodes_[(size_t)x.id].value; }
    const Shape& shape(Var x) const { return nodes_[(size_t)x.id].value.shape; }
    bool requires_grad(Var x) const { return nodes_[(size_t)x.id].req; }

    // Runs backprop from a scalar node (shape [1]).
    void backward(Var loss);

    // Gradient of the last backward() call w.r.t. x; zeros if none reached it.
    RealGrid grad(Var x) const;

    size_t num_nodes() const { return nodes_.size(); }
    void clear();

    // --- internal plumbing used by the op implementations ---
    using BackFn = std::function<void(Tape&, int self)>;
    int emit(RealGrid value, std::vector<int> parents, BackFn back);
    void accumulate(int id, const RealGrid& g);
    const RealGrid* grad_ptr(int id) const;
    bool node_requires(int id) const { return nodes_[(size_t)id].req; }
    const RealGrid& node_val(int id) const { return nodes_[(size_t)id].value; }

private:
    struct Node {
        RealGrid value;
        std::vector<int> parents;
        BackFn back;
        bool req = false;
    };
    std::vector<Node> nodes_;
    std::vector<RealGrid> grads_;
    std::vector<char> has_grad_;
};

// ---- elementwise / arithmetic ----
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var add_scalar(Var a, double c);
Var mul_scalar(Var a, double c);
// elementwise x^p (x must stay positive for non-integer p)
Var powc(Var a, double p);
Var vsin(Var a);
Var vcos(Var a);
Var gelu(Var a);
Var logistic(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var a) { return neg(a); }

// ---- shape ----
Var reshape(Var a, Shape s);
Var permute(Var a, const std::vector<int>& perm);
Var transpose(Var a);  // rank-2
Var slice(Var a, int axis, int start, int len);
Var concat(const std::vector<Var>& xs, int axis);

// ---- reductions ----
Var sum_all(Var a);              // -> [1]
Var sum_axis(Var a, int axis);   // drops the axis
Var mean_axis(Var a, int axis);  // drops the axis

// ---- broadcasting helpers ----
// b has length shape(a)[axis]; added across all other axes.
Var add_bias(Var a, Var b, int axis);
// s has length shape(a)[axis]; multiplies across all other axes.
Var scale_axis(Var a, Var s, int axis);
// s is a [1] scalar node.
Var mul_scalarvar(Var a, Var s);

// ---- linear algebra ----
Var matmul(Var a, Var b);  // rank-2 x rank-2
// X = A^{-1} B for symmetric positive definite A (Cholesky).
Var solve_spd(Var a, Var b);
// ln det(A) for symmetric positive definite A -> [1].
Var logdet_spd(Var a);

// ---- neural primitives ----
Var layer_norm(Var a, int axis, double eps = 1e-6);
Var softmax(Var a, int axis);

// ---- composition helpers (no new node types) ----
// x: [..., d] times w: [d, e] -> [..., e]
Var contract_last(Var x, Var w);
// rank-3 x: [n0, n1, d]; contracts the chosen token axis (0 or 1) with w.
Var axis_project(Var x, Var w, int axis);

}  // namespace ag
}  // namespace csifb
