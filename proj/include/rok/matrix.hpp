// Dense complex matrices and the small set of numerical primitives the
// library is built on: Hermitian eigendecompositions, operator norms,
// and clipped positive-semidefinite square roots.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

#include "rok/errors.hpp"

namespace rok {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Largest entry magnitude; 0 for an empty matrix.
inline double max_abs(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

inline bool is_finite(const ComplexMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
                return false;
    return true;
}

inline ComplexMatrix hermitized(const ComplexMatrix& m) {
    return 0.5 * (m + m.adjoint());
}

/// max |m - m*|, the distance from being Hermitian.
inline double hermitian_defect(const ComplexMatrix& m) {
    return max_abs(m - ComplexMatrix(m.adjoint()));
}

struct HermitianEigensystem {
    RealVector values;      // ascending
    ComplexMatrix vectors;  // columns
};

/// Eigendecomposition of the Hermitian part of `m`.
inline HermitianEigensystem hermitian_eig(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitized(m));
    if (solver.info() != Eigen::Success)
        throw NumericalFailure("hermitian eigendecomposition did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Largest singular value; 0 for an empty matrix.
inline double operator_norm(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    if (svd.info() != Eigen::Success)
        throw NumericalFailure("SVD did not converge");
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

}  // namespace rok
