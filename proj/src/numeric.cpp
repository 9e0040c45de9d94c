// SPDX-License-Identifier: Apache-2.0

#include "csifb/numeric.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

namespace csifb {

namespace {

using CMat = Eigen::MatrixXcd;

CMat to_eigen(const ComplexGrid& a) {
    if (a.shape().size() != 2) throw DimensionError("expected rank-2 complex grid");
    int r = a.shape()[0], c = a.shape()[1];
    CMat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = a.at2(i, j);
    return m;
}

ComplexGrid from_eigen(const CMat& m) {
    ComplexGrid g({(int)m.rows(), (int)m.cols()});
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) g.set2(i, j, m(i, j));
    return g;
}

void check_hermitian(const CMat& m, double tol, const char* op) {
    double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (dev > tol * scale)
        throw NumericError(std::string(op) + ": matrix not Hermitian (deviation " +
                           std::to_string(dev) + ")");
}

}  // namespace

ComplexGrid cmatmul(const ComplexGrid& a, const ComplexGrid& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0])
        throw DimensionError("cmatmul: incompatible " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    return from_eigen(to_eigen(a) * to_eigen(b));
}

ComplexGrid hermitian_solve(const ComplexGrid& a, const ComplexGrid& b, double herm_tol) {
    CMat A = to_eigen(a);
    if (A.rows() != A.cols()) throw DimensionError("hermitian_solve: A must be square");
    CMat B = to_eigen(b);
    if (B.rows() != A.rows()) throw DimensionError("hermitian_solve: B rows must match A");
    check_hermitian(A, herm_tol, "hermitian_solve");
    Eigen::LLT<CMat> llt(A);
    if (llt.info() != Eigen::Success)
        throw NumericError("hermitian_solve: Cholesky failed (matrix not positive definite), n=" +
                           std::to_string(A.rows()));
    return from_eigen(llt.solve(B));
}

double logdet2_hpd(const ComplexGrid& a, double herm_tol) {
    CMat A = to_eigen(a);
    if (A.rows() != A.cols()) throw DimensionError("logdet2_hpd: A must be square");
    check_hermitian(A, herm_tol, "logdet2_hpd");
    Eigen::LLT<CMat> llt(A);
    if (llt.info() != Eigen::Success)
        throw NumericError("logdet2_hpd: Cholesky failed (matrix not positive definite), n=" +
                           std::to_string(A.rows()));
    double ld = 0;
    for (int i = 0; i < A.rows(); ++i) ld += 2.0 * std::log(llt.matrixL()(i, i).real());
    double out = ld / std::log(2.0);
    if (!std::isfinite(out)) throw NumericError("logdet2_hpd: non-finite result");
    return out;
}

ComplexGrid cidentity(int n) {
    ComplexGrid g({n, n});
    for (int i = 0; i < n; ++i) g.re.at2(i, i) = 1.0;
    return g;
}

ComplexGrid cconj_transpose(const ComplexGrid& a) {
    if (a.shape().size() != 2) throw DimensionError("cconj_transpose: rank-2 only");
    int r = a.shape()[0], c = a.shape()[1];
    ComplexGrid g({c, r});
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) g.set2(j, i, std::conj(a.at2(i, j)));
    return g;
}

}  // namespace csifb
