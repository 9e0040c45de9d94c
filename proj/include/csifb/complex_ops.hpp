// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "csifb/grid.hpp"
#include "csifb/tape.hpp"

namespace csifb {
namespace ag {

// Complex value on the tape: a pair of real nodes with matching shapes.
// All complex arithmetic lowers onto real ops, so gradients need no
// Wirtinger bookkeeping.
struct CVar {
    Var re, im;
};

inline CVar cconst(Tape& t, const ComplexGrid& g) {
    return {t.constant(g.re), t.constant(g.im)};
}

inline CVar cadd(CVar a, CVar b) { return {a.re + b.re, a.im + b.im}; }
inline CVar csub(CVar a, CVar b) { return {a.re - b.re, a.im - b.im}; }
inline CVar cneg(CVar a) { return {neg(a.re), neg(a.im)}; }
inline CVar cconj(CVar a) { return {a.re, neg(a.im)}; }

inline CVar ctranspose(CVar a) { return {transpose(a.re), transpose(a.im)}; }
inline CVar chermitian(CVar a) { return {transpose(a.re), neg(transpose(a.im))}; }

inline CVar cmatmul(CVar a, CVar b) {
    Var re = matmul(a.re, b.re) - matmul(a.im, b.im);
    Var im = matmul(a.re, b.im) + matmul(a.im, b.re);
    return {re, im};
}

inline CVar cmul_scalarvar(CVar a, Var s) {
    return {mul_scalarvar(a.re, s), mul_scalarvar(a.im, s)};
}

// |a|^2 elementwise, as a real node.
inline Var cabs2(CVar a) { return a.re * a.re + a.im * a.im; }

// Sum of squared moduli over all entries -> [1].
inline Var cpower(CVar a) { return sum_all(cabs2(a)); }

// Real 2Nx2N embedding of a complex NxN matrix: [[Re, -Im], [Im, Re]].
// Hermitian positive definite A maps to a symmetric positive definite image.
inline Var cembed_real(CVar a) {
    Var top = concat({a.re, neg(a.im)}, 1);
    Var bot = concat({a.im, a.re}, 1);
    return concat({top, bot}, 0);
}

// X with A X = B, A Hermitian positive definite, via the real embedding.
inline CVar hermitian_solve(CVar a, CVar b) {
    int n = a.re.t->shape(a.re)[0];
    Var m = cembed_real(a);
    Var rhs = concat({b.re, b.im}, 0);
    Var x = solve_spd(m, rhs);
    return {slice(x, 0, 0, n), slice(x, 0, n, n)};
}

// log2 det(A) for Hermitian positive definite A -> [1].
// det of the real embedding equals |det A|^2 = det(A)^2 for HPD A.
inline Var logdet2_hpd(CVar a) {
    Var ld = logdet_spd(cembed_real(a));
    return mul_scalar(ld, 0.5 / std::log(2.0));
}

}  // namespace ag
}  // namespace csifb
