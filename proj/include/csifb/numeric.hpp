// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "csifb/grid.hpp"

namespace csifb {

// Value-level complex linear algebra on ComplexGrid (rank-2 operands).

// C = A * B under complex arithmetic.
ComplexGrid cmatmul(const ComplexGrid& a, const ComplexGrid& b);

// X with A X = B for Hermitian positive definite A (Cholesky).
// A must be Hermitian within `herm_tol`; a failed factorization raises
// NumericError.
ComplexGrid hermitian_solve(const ComplexGrid& a, const ComplexGrid& b,
                            double herm_tol = 1e-10);

// log2 det(A) for Hermitian positive definite A.
double logdet2_hpd(const ComplexGrid& a, double herm_tol = 1e-10);

// Helpers.
ComplexGrid cidentity(int n);
ComplexGrid cconj_transpose(const ComplexGrid& a);

}  // namespace csifb
