// SPDX-License-Identifier: Apache-2.0

#include "csifb/tape.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "csifb/kernels.hpp"

namespace csifb {
namespace ag {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<const RowMat>;
using MapMatMut = Eigen::Map<RowMat>;

// ---------------------------------------------------------------------------
// Tape core
// ---------------------------------------------------------------------------

Var Tape::leaf(RealGrid v, bool requires_grad) {
    Node n;
    n.value = std::move(v);
    n.req = requires_grad;
    nodes_.push_back(std::move(n));
    return Var{this, (int)nodes_.size() - 1};
}

int Tape::emit(RealGrid value, std::vector<int> parents, BackFn back) {
    Node n;
    n.value = std::move(value);
    n.parents = std::move(parents);
    for (int p : n.parents)
        if (nodes_[(size_t)p].req) n.req = true;
    if (n.req) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return (int)nodes_.size() - 1;
}

void Tape::accumulate(int id, const RealGrid& g) {
    if (!nodes_[(size_t)id].req) return;
    if (!has_grad_[(size_t)id]) {
        grads_[(size_t)id] = g;
        has_grad_[(size_t)id] = 1;
    } else {
        RealGrid& acc = grads_[(size_t)id];
        for (int64_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
    }
}

const RealGrid* Tape::grad_ptr(int id) const {
    if (!has_grad_[(size_t)id]) return nullptr;
    return &grads_[(size_t)id];
}

void Tape::backward(Var loss) {
    if (loss.t != this) throw Error("backward: node from another tape");
    if (val(loss).size() != 1) throw DimensionError("backward: loss must be scalar");
    grads_.assign(nodes_.size(), RealGrid{});
    has_grad_.assign(nodes_.size(), 0);
    grads_[(size_t)loss.id] = RealGrid::scalar(1.0);
    has_grad_[(size_t)loss.id] = 1;
    for (int i = loss.id; i >= 0; --i) {
        Node& n = nodes_[(size_t)i];
        if (!n.req || !has_grad_[(size_t)i] || !n.back) continue;
        n.back(*this, i);
    }
}

RealGrid Tape::grad(Var x) const {
    if (x.t != this) throw Error("grad: node from another tape");
    if (has_grad_[(size_t)x.id]) return grads_[(size_t)x.id];
    return RealGrid::zeros(nodes_[(size_t)x.id].value.shape);
}

void Tape::clear() {
    nodes_.clear();
    grads_.clear();
    has_grad_.clear();
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

namespace {

void check_same_tape(Var a, Var b, const char* op) {
    if (a.t != b.t) throw Error(std::string(op) + ": operands from different tapes");
}

void check_same_shape(Var a, Var b, const char* op) {
    if (a.t->shape(a) != b.t->shape(b))
        throw DimensionError(std::string(op) + ": shape mismatch " +
                             shape_str(a.t->shape(a)) + " vs " + shape_str(b.t->shape(b)));
}

Var unary_map(Var a, std::function<double(double)> f, std::function<double(double)> df) {
    Tape& t = *a.t;
    const RealGrid& x = t.val(a);
    RealGrid y(x.shape);
    for (int64_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
    int pa = a.id;
    int id = t.emit(std::move(y), {pa}, [pa, df](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        const RealGrid& x = tp.node_val(pa);
        RealGrid gx(x.shape);
        for (int64_t i = 0; i < x.size(); ++i) gx[i] = g[i] * df(x[i]);
        tp.accumulate(pa, gx);
    });
    return Var{&t, id};
}

}  // namespace

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

Var add(Var a, Var b) {
    check_same_tape(a, b, "add");
    check_same_shape(a, b, "add");
    Tape& t = *a.t;
    const RealGrid& xa = t.val(a);
    const RealGrid& xb = t.val(b);
    RealGrid y(xa.shape);
    for (int64_t i = 0; i < y.size(); ++i) y[i] = xa[i] + xb[i];
    int pa = a.id, pb = b.id;
    int id = t.emit(std::move(y), {pa, pb}, [pa, pb](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        tp.accumulate(pa, g);
        tp.accumulate(pb, g);
    });
    return Var{&t, id};
}

Var sub(Var a, Var b) {
    check_same_tape(a, b, "sub");
    check_same_shape(a, b, "sub");
    Tape& t = *a.t;
    const RealGrid& xa = t.val(a);
    const RealGrid& xb = t.val(b);
    RealGrid y(xa.shape);
    for (int64_t i = 0; i < y.size(); ++i) y[i] = xa[i] - xb[i];
    int pa = a.id, pb = b.id;
    int id = t.emit(std::move(y), {pa, pb}, [pa, pb](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        tp.accumulate(pa, g);
        RealGrid gb(g.shape);
        for (int64_t i = 0; i < g.size(); ++i) gb[i] = -g[i];
        tp.accumulate(pb, gb);
    });
    return Var{&t, id};
}

Var mul(Var a, Var b) {
    check_same_tape(a, b, "mul");
    check_same_shape(a, b, "mul");
    Tape& t = *a.t;
    const RealGrid& xa = t.val(a);
    const RealGrid& xb = t.val(b);
    RealGrid y(xa.shape);
    for (int64_t i = 0; i < y.size(); ++i) y[i] = xa[i] * xb[i];
    int pa = a.id, pb = b.id;
    int id = t.emit(std::move(y), {pa, pb}, [pa, pb](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        const RealGrid& xa = tp.node_val(pa);
        const RealGrid& xb = tp.node_val(pb);
        if (tp.node_requires(pa)) {
            RealGrid ga(g.shape);
            for (int64_t i = 0; i < g.size(); ++i) ga[i] = g[i] * xb[i];
            tp.accumulate(pa, ga);
        }
        if (tp.node_requires(pb)) {
            RealGrid gb(g.shape);
            for (int64_t i = 0; i < g.size(); ++i) gb[i] = g[i] * xa[i];
            tp.accumulate(pb, gb);
        }
    });
    return Var{&t, id};
}

Var neg(Var a) {
    return unary_map(
        a, [](double x) { return -x; }, [](double) { return -1.0; });
}

Var add_scalar(Var a, double c) {
    return unary_map(
        a, [c](double x) { return x + c; }, [](double) { return 1.0; });
}

Var mul_scalar(Var a, double c) {
    return unary_map(
        a, [c](double x) { return x * c; }, [c](double) { return c; });
}

Var powc(Var a, double p) {
    return unary_map(
        a, [p](double x) { return std::pow(x, p); },
        [p](double x) { return p * std::pow(x, p - 1.0); });
}

Var vsin(Var a) {
    return unary_map(
        a, [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); });
}

Var vcos(Var a) {
    return unary_map(
        a, [](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); });
}

Var gelu(Var a) {
    return unary_map(a, &kern::gelu1, &kern::gelu1_grad);
}

Var logistic(Var a) {
    return unary_map(
        a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double x) {
            double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 - s);
        });
}

// ---------------------------------------------------------------------------
// shape ops
// ---------------------------------------------------------------------------

Var reshape(Var a, Shape s) {
    Tape& t = *a.t;
    const RealGrid& x = t.val(a);
    if (shape_size(s) != x.size())
        throw DimensionError("reshape: size mismatch " + shape_str(x.shape) + " -> " +
                             shape_str(s));
    RealGrid y(s, x.data);
    int pa = a.id;
    int id = t.emit(std::move(y), {pa}, [pa](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        RealGrid gx(tp.node_val(pa).shape, g.data);
        tp.accumulate(pa, gx);
    });
    return Var{&t, id};
}

namespace {

RealGrid permute_values(const RealGrid& x, const std::vector<int>& perm) {
    int r = x.rank();
    Shape out_shape(r);
    for (int i = 0; i < r; ++i) out_shape[i] = x.shape[perm[i]];
    RealGrid y(out_shape);
    auto in_strides = row_major_strides(x.shape);
    auto out_strides = row_major_strides(out_shape);
    std::vector<int64_t> idx(r, 0);
    for (int64_t o = 0; o < y.size(); ++o) {
        int64_t rem = o, src = 0;
        for (int i = 0; i < r; ++i) {
            int64_t q = rem / out_strides[i];
            rem -= q * out_strides[i];
            src += q * in_strides[perm[i]];
        }
        y[o] = x[src];
    }
    return y;
}

std::vector<int> inverse_perm(const std::vector<int>& perm) {
    std::vector<int> inv(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) inv[(size_t)perm[i]] = (int)i;
    return inv;
}

}  // namespace

Var permute(Var a, const std::vector<int>& perm) {
    Tape& t = *a.t;
    const RealGrid& x = t.val(a);
    if ((int)perm.size() != x.rank()) throw DimensionError("permute: rank mismatch");
    RealGrid y = permute_values(x, perm);
    int pa = a.id;
    std::vector<int> inv = inverse_perm(perm);
    int id = t.emit(std::move(y), {pa}, [pa, inv](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        tp.accumulate(pa, permute_values(g, inv));
    });
    return Var{&t, id};
}

Var transpose(Var a) {
    if (a.t->val(a).rank() != 2) throw DimensionError("transpose: rank-2 only");
    return permute(a, {1, 0});
}

Var slice(Var a, int axis, int start, int len) {
    Tape& t = *a.t;
    const RealGrid& x = t.val(a);
    if (axis < 0 || axis >= x.rank() || start < 0 || start + len > x.shape[axis])
        throw DimensionError("slice: out of range on " + shape_str(x.shape));
    Shape out_shape = x.shape;
    out_shape[axis] = len;
    kern::AxisLanes in(x.shape, axis);
    RealGrid y(out_shape);
    int64_t o2 = 0;
    for (int64_t o = 0; o < in.outer; ++o)
        for (int64_t k = 0; k < len; ++k)
            for (int64_t c = 0; c < in.inner; ++c) y[o2++] = x[in.idx(o, start + k, c)];
    int pa = a.id;
    Shape in_shape = x.shape;
    int id = t.emit(std::move(y), {pa},
                    [pa, axis, start, len, in_shape](Tape& tp, int self) {
                        const RealGrid& g = *tp.grad_ptr(self);
                        RealGrid gx(in_shape);
                        kern::AxisLanes in(in_shape, axis);
                        int64_t o2 = 0;
                        for (int64_t o = 0; o < in.outer; ++o)
                            for (int64_t k = 0; k < len; ++k)
                                for (int64_t c = 0; c < in.inner; ++c)
                                    gx[in.idx(o, start + k, c)] = g[o2++];
                        tp.accumulate(pa, gx);
                    });
    return Var{&t, id};
}

Var concat(const std::vector<Var>& xs, int axis) {
    if (xs.empty()) throw DimensionError("concat: empty input list");
    Tape& t = *xs[0].t;
    const RealGrid& x0 = t.val(xs[0]);
    Shape out_shape = x0.shape;
    int total = 0;
    std::vector<int> lens;
    for (Var x : xs) {
        check_same_tape(xs[0], x, "concat");
        const RealGrid& xi = t.val(x);
        if (xi.rank() != x0.rank()) throw DimensionError("concat: rank mismatch");
        for (int i = 0; i < x0.rank(); ++i)
            if (i != axis && xi.shape[i] != x0.shape[i])
                throw DimensionError("concat: shape mismatch off-axis");
        lens.push_back(xi.shape[axis]);
        total += xi.shape[axis];
    }
    out_shape[axis] = total;
    RealGrid y(out_shape);
    kern::AxisLanes out(out_shape, axis);
    int off = 0;
    for (size_t j = 0; j < xs.size(); ++j) {
        const RealGrid& xi = t.val(xs[j]);
        kern::AxisLanes in(xi.shape, axis);
        for (int64_t o = 0; o < in.outer; ++o)
            for (int64_t k = 0; k < in.len; ++k)
                for (int64_t c = 0; c < in.inner; ++c)
                    y[out.idx(o, off + k, c)] = xi[in.idx(o, k, c)];
        off += lens[j];
    }
    std::vector<int> parents;
    for (Var x : xs) parents.push_back(x.id);
    std::vector<Shape> in_shapes;
    for (Var x : xs) in_shapes.push_back(t.val(x).shape);
    int id = t.emit(std::move(y), parents,
                    [parents, axis, in_shapes, lens](Tape& tp, int self) {
                        const RealGrid& g = *tp.grad_ptr(self);
                        kern::AxisLanes out(g.shape, axis);
                        int off = 0;
                        for (size_t j = 0; j < parents.size(); ++j) {
                            if (tp.node_requires(parents[j])) {
                                RealGrid gx(in_shapes[j]);
                                kern::AxisLanes in(in_shapes[j], axis);
                                for (int64_t o = 0; o < in.outer; ++o)
                                    for (int64_t k = 0; k < in.len; ++k)
                                        for (int64_t c = 0; c < in.inner; ++c)
                                            gx[in.idx(o, k, c)] = g[out.idx(o, off + k, c)];
                                tp.accumulate(parents[j], gx);
                            }
                            off += lens[j];
                        }
                    });
    return Var{&t, id};
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

Var sum_all(Var a) {
    Tape& t = *a.t;
    const RealGrid& x = t.val(a);
    double s = 0;
    for (int64_t i = 0; i < x.size(); ++i) s += x[i];
    int pa = a.id;
    int id = t.emit(RealGrid::scalar(s), {pa}, [pa](Tape& tp, int self) {
        double g = (*tp.grad_ptr(self))[0];
        tp.accumulate(pa, RealGrid::full(tp.node_val(pa).shape, g));
    });
    return Var{&t, id};
}

namespace {

Var reduce_axis(Var a, int axis, double scale) {
    Tape& t = *a.t;
    const RealGrid& x = t.val(a);
    if (axis < 0 || axis >= x.rank()) throw DimensionError("reduce: bad axis");
    Shape out_shape;
    for (int i = 0; i < x.rank(); ++i)
        if (i != axis) out_shape.push_back(x.shape[i]);
    if (out_shape.empty()) out_shape = {1};
    kern::AxisLanes lanes(x.shape, axis);
    RealGrid y(out_shape);
    int64_t o2 = 0;
    for (int64_t o = 0; o < lanes.outer; ++o)
        for (int64_t c = 0; c < lanes.inner; ++c) {
            double s = 0;
            for (int64_t k = 0; k < lanes.len; ++k) s += x[lanes.idx(o, k, c)];
            y[o2++] = s * scale;
        }
    int pa = a.id;
    Shape in_shape = x.shape;
    int id = t.emit(std::move(y), {pa}, [pa, axis, scale, in_shape](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        RealGrid gx(in_shape);
        kern::AxisLanes lanes(in_shape, axis);
        int64_t o2 = 0;
        for (int64_t o = 0; o < lanes.outer; ++o)
            for (int64_t c = 0; c < lanes.inner; ++c) {
                double gv = g[o2++] * scale;
                for (int64_t k = 0; k < lanes.len; ++k) gx[lanes.idx(o, k, c)] = gv;
            }
        tp.accumulate(pa, gx);
    });
    return Var{&t, id};
}

}  // namespace

Var sum_axis(Var a, int axis) { return reduce_axis(a, axis, 1.0); }

Var mean_axis(Var a, int axis) {
    return reduce_axis(a, axis, 1.0 / (double)a.t->shape(a)[axis]);
}

// ---------------------------------------------------------------------------
// broadcasting
// ---------------------------------------------------------------------------

namespace {

enum class BcastKind { Add, Mul };

Var bcast_axis(Var a, Var b, int axis, BcastKind kind) {
    check_same_tape(a, b, "bcast_axis");
    Tape& t = *a.t;
    const RealGrid& x = t.val(a);
    const RealGrid& v = t.val(b);
    if (axis < 0 || axis >= x.rank()) throw DimensionError("bcast_axis: bad axis");
    if (v.rank() != 1 || v.shape[0] != x.shape[axis])
        throw DimensionError("bcast_axis: vector length " + shape_str(v.shape) +
                             " does not match axis of " + shape_str(x.shape));
    kern::AxisLanes lanes(x.shape, axis);
    RealGrid y(x.shape);
    for (int64_t o = 0; o < lanes.outer; ++o)
        for (int64_t k = 0; k < lanes.len; ++k)
            for (int64_t c = 0; c < lanes.inner; ++c) {
                int64_t i = lanes.idx(o, k, c);
                y[i] = kind == BcastKind::Add ? x[i] + v[k] : x[i] * v[k];
            }
    int pa = a.id, pb = b.id;
    int id = t.emit(std::move(y), {pa, pb}, [pa, pb, axis, kind](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        const RealGrid& x = tp.node_val(pa);
        const RealGrid& v = tp.node_val(pb);
        kern::AxisLanes lanes(x.shape, axis);
        if (tp.node_requires(pa)) {
            if (kind == BcastKind::Add) {
                tp.accumulate(pa, g);
            } else {
                RealGrid gx(x.shape);
                for (int64_t o = 0; o < lanes.outer; ++o)
                    for (int64_t k = 0; k < lanes.len; ++k)
                        for (int64_t c = 0; c < lanes.inner; ++c) {
                            int64_t i = lanes.idx(o, k, c);
                            gx[i] = g[i] * v[k];
                        }
                tp.accumulate(pa, gx);
            }
        }
        if (tp.node_requires(pb)) {
            RealGrid gv(v.shape);
            for (int64_t o = 0; o < lanes.outer; ++o)
                for (int64_t k = 0; k < lanes.len; ++k)
                    for (int64_t c = 0; c < lanes.inner; ++c) {
                        int64_t i = lanes.idx(o, k, c);
                        gv[k] += kind == BcastKind::Add ? g[i] : g[i] * x[i];
                    }
            tp.accumulate(pb, gv);
        }
    });
    return Var{&t, id};
}

}  // namespace

Var add_bias(Var a, Var b, int axis) { return bcast_axis(a, b, axis, BcastKind::Add); }
Var scale_axis(Var a, Var s, int axis) { return bcast_axis(a, s, axis, BcastKind::Mul); }

Var mul_scalarvar(Var a, Var s) {
    check_same_tape(a, s, "mul_scalarvar");
    Tape& t = *a.t;
    if (t.val(s).size() != 1) throw DimensionError("mul_scalarvar: s must be scalar");
    const RealGrid& x = t.val(a);
    double sv = t.val(s)[0];
    RealGrid y(x.shape);
    for (int64_t i = 0; i < x.size(); ++i) y[i] = x[i] * sv;
    int pa = a.id, ps = s.id;
    int id = t.emit(std::move(y), {pa, ps}, [pa, ps](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        const RealGrid& x = tp.node_val(pa);
        double sv = tp.node_val(ps)[0];
        if (tp.node_requires(pa)) {
            RealGrid gx(x.shape);
            for (int64_t i = 0; i < x.size(); ++i) gx[i] = g[i] * sv;
            tp.accumulate(pa, gx);
        }
        if (tp.node_requires(ps)) {
            double gs = 0;
            for (int64_t i = 0; i < x.size(); ++i) gs += g[i] * x[i];
            tp.accumulate(ps, RealGrid::scalar(gs));
        }
    });
    return Var{&t, id};
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
    check_same_tape(a, b, "matmul");
    Tape& t = *a.t;
    const RealGrid& xa = t.val(a);
    const RealGrid& xb = t.val(b);
    if (xa.rank() != 2 || xb.rank() != 2 || xa.shape[1] != xb.shape[0])
        throw DimensionError("matmul: incompatible " + shape_str(xa.shape) + " x " +
                             shape_str(xb.shape));
    int mrows = xa.shape[0], k = xa.shape[1], ncols = xb.shape[1];
    RealGrid y({mrows, ncols});
    MapMatMut(y.data.data(), mrows, ncols) =
        MapMat(xa.data.data(), mrows, k) * MapMat(xb.data.data(), k, ncols);
    int pa = a.id, pb = b.id;
    int id = t.emit(std::move(y), {pa, pb}, [pa, pb](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        const RealGrid& xa = tp.node_val(pa);
        const RealGrid& xb = tp.node_val(pb);
        int mrows = xa.shape[0], k = xa.shape[1], ncols = xb.shape[1];
        MapMat G(g.data.data(), mrows, ncols);
        if (tp.node_requires(pa)) {
            RealGrid ga({mrows, k});
            MapMatMut(ga.data.data(), mrows, k) = G * MapMat(xb.data.data(), k, ncols).transpose();
            tp.accumulate(pa, ga);
        }
        if (tp.node_requires(pb)) {
            RealGrid gb({k, ncols});
            MapMatMut(gb.data.data(), k, ncols) = MapMat(xa.data.data(), mrows, k).transpose() * G;
            tp.accumulate(pb, gb);
        }
    });
    return Var{&t, id};
}

Var solve_spd(Var a, Var b) {
    check_same_tape(a, b, "solve_spd");
    Tape& t = *a.t;
    const RealGrid& xa = t.val(a);
    const RealGrid& xb = t.val(b);
    if (xa.rank() != 2 || xa.shape[0] != xa.shape[1])
        throw DimensionError("solve_spd: A must be square, got " + shape_str(xa.shape));
    if (xb.rank() != 2 || xb.shape[0] != xa.shape[0])
        throw DimensionError("solve_spd: B rows must match A");
    int n = xa.shape[0], mcols = xb.shape[1];
    Eigen::MatrixXd A = MapMat(xa.data.data(), n, n);
    auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(A);
    if (llt->info() != Eigen::Success)
        throw NumericError("solve_spd: factorization failed (matrix not positive definite), n=" +
                           std::to_string(n));
    Eigen::MatrixXd B = MapMat(xb.data.data(), n, mcols);
    Eigen::MatrixXd X = llt->solve(B);
    RealGrid y({n, mcols});
    MapMatMut(y.data.data(), n, mcols) = X;
    int pa = a.id, pb = b.id;
    int id = t.emit(std::move(y), {pa, pb}, [pa, pb, llt](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        const RealGrid& xval = tp.node_val(self);
        int n = xval.shape[0], mcols = xval.shape[1];
        Eigen::MatrixXd G = MapMat(g.data.data(), n, mcols);
        Eigen::MatrixXd S = llt->solve(G);  // A^{-1} G (A symmetric)
        if (tp.node_requires(pb)) {
            RealGrid gb({n, mcols});
            MapMatMut(gb.data.data(), n, mcols) = S;
            tp.accumulate(pb, gb);
        }
        if (tp.node_requires(pa)) {
            Eigen::MatrixXd X = MapMat(xval.data.data(), n, mcols);
            RealGrid ga({n, n});
            MapMatMut(ga.data.data(), n, n) = -S * X.transpose();
            tp.accumulate(pa, ga);
        }
    });
    return Var{&t, id};
}

Var logdet_spd(Var a) {
    Tape& t = *a.t;
    const RealGrid& xa = t.val(a);
    if (xa.rank() != 2 || xa.shape[0] != xa.shape[1])
        throw DimensionError("logdet_spd: A must be square");
    int n = xa.shape[0];
    Eigen::MatrixXd A = MapMat(xa.data.data(), n, n);
    auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(A);
    if (llt->info() != Eigen::Success)
        throw NumericError("logdet_spd: factorization failed (matrix not positive definite), n=" +
                           std::to_string(n));
    double ld = 0;
    for (int i = 0; i < n; ++i) ld += 2.0 * std::log(llt->matrixL()(i, i));
    int pa = a.id;
    int id = t.emit(RealGrid::scalar(ld), {pa}, [pa, llt, n](Tape& tp, int self) {
        double g = (*tp.grad_ptr(self))[0];
        Eigen::MatrixXd inv = llt->solve(Eigen::MatrixXd::Identity(n, n));
        RealGrid ga({n, n});
        MapMatMut(ga.data.data(), n, n) = g * inv;
        tp.accumulate(pa, ga);
    });
    return Var{&t, id};
}

// ---------------------------------------------------------------------------
// neural primitives
// ---------------------------------------------------------------------------

Var layer_norm(Var a, int axis, double eps) {
    Tape& t = *a.t;
    const RealGrid& x = t.val(a);
    if (axis < 0 || axis >= x.rank()) throw DimensionError("layer_norm: bad axis");
    RealGrid y(x.shape), inv_std;
    kern::layer_norm(x, axis, eps, y, &inv_std);
    int pa = a.id;
    RealGrid ycopy = y;
    int id = t.emit(std::move(y), {pa},
                    [pa, axis, ycopy, inv_std](Tape& tp, int self) {
                        const RealGrid& g = *tp.grad_ptr(self);
                        RealGrid gx(ycopy.shape);
                        kern::AxisLanes lanes(ycopy.shape, axis);
                        int64_t li = 0;
                        double len = (double)lanes.len;
                        for (int64_t o = 0; o < lanes.outer; ++o)
                            for (int64_t c = 0; c < lanes.inner; ++c, ++li) {
                                double gm = 0, gym = 0;
                                for (int64_t k = 0; k < lanes.len; ++k) {
                                    int64_t i = lanes.idx(o, k, c);
                                    gm += g[i];
                                    gym += g[i] * ycopy[i];
                                }
                                gm /= len;
                                gym /= len;
                                double is = inv_std[li];
                                for (int64_t k = 0; k < lanes.len; ++k) {
                                    int64_t i = lanes.idx(o, k, c);
                                    gx[i] = is * (g[i] - gm - ycopy[i] * gym);
                                }
                            }
                        tp.accumulate(pa, gx);
                    });
    return Var{&t, id};
}

Var softmax(Var a, int axis) {
    Tape& t = *a.t;
    const RealGrid& x = t.val(a);
    if (axis < 0 || axis >= x.rank()) throw DimensionError("softmax: bad axis");
    RealGrid y(x.shape);
    kern::softmax(x, axis, y);
    int pa = a.id;
    RealGrid ycopy = y;
    int id = t.emit(std::move(y), {pa}, [pa, axis, ycopy](Tape& tp, int self) {
        const RealGrid& g = *tp.grad_ptr(self);
        RealGrid gx(ycopy.shape);
        kern::AxisLanes lanes(ycopy.shape, axis);
        for (int64_t o = 0; o < lanes.outer; ++o)
            for (int64_t c = 0; c < lanes.inner; ++c) {
                double dot = 0;
                for (int64_t k = 0; k < lanes.len; ++k) {
                    int64_t i = lanes.idx(o, k, c);
                    dot += g[i] * ycopy[i];
                }
                for (int64_t k = 0; k < lanes.len; ++k) {
                    int64_t i = lanes.idx(o, k, c);
                    gx[i] = ycopy[i] * (g[i] - dot);
                }
            }
        tp.accumulate(pa, gx);
    });
    return Var{&t, id};
}

// ---------------------------------------------------------------------------
// composition helpers
// ---------------------------------------------------------------------------

Var contract_last(Var x, Var w) {
    Tape& t = *x.t;
    const Shape& xs = t.shape(x);
    const Shape& ws = t.shape(w);
    if (ws.size() != 2 || xs.back() != ws[0])
        throw DimensionError("contract_last: incompatible " + shape_str(xs) + " x " +
                             shape_str(ws));
    int64_t lead = 1;
    for (size_t i = 0; i + 1 < xs.size(); ++i) lead *= xs[i];
    Var flat = reshape(x, {(int)lead, xs.back()});
    Var y = matmul(flat, w);
    Shape out(xs.begin(), xs.end() - 1);
    out.push_back(ws[1]);
    return reshape(y, out);
}

Var axis_project(Var x, Var w, int axis) {
    Tape& t = *x.t;
    const Shape& xs = t.shape(x);
    if (xs.size() != 3) throw DimensionError("axis_project: rank-3 input required");
    const Shape& ws = t.shape(w);
    if (ws.size() != 2 || ws[0] != ws[1] || ws[0] != xs[(size_t)axis])
        throw DimensionError("axis_project: weight " + shape_str(ws) +
                             " does not match axis of " + shape_str(xs));
    if (axis == 0) {
        // [n0, n1, d]: contract n0 -> W * X(n0, n1*d)
        Var flat = reshape(x, {xs[0], xs[1] * xs[2]});
        Var y = matmul(w, flat);
        return reshape(y, xs);
    }
    if (axis == 1) {
        Var p = permute(x, {1, 0, 2});  // [n1, n0, d]
        Var flat = reshape(p, {xs[1], xs[0] * xs[2]});
        Var y = matmul(w, flat);
        Var back = reshape(y, {xs[1], xs[0], xs[2]});
        return permute(back, {1, 0, 2});
    }
    throw DimensionError("axis_project: axis must be 0 or 1");
}

}  // namespace ag
}  // namespace csifb
