// Kolmogorov/GNS factorization K(s,t) = V_s* V_t at finite scale.
//
// The dilation space is realized as the coordinate space of the retained
// Gram rank r, with the canonical basis playing the orthonormal system
// {e_i}. Factors come from the Hermitian eigendecomposition of the Gram
// matrix rather than Cholesky: Gram matrices here are routinely rank
// deficient and the eigenvalue route makes rank reporting direct.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rok/errors.hpp"
#include "rok/kernel.hpp"
#include "rok/matrix.hpp"

namespace rok {

struct KolmogorovFactor {
    std::vector<std::string> points;
    std::size_t dim = 0;   // d
    std::size_t rank = 0;  // r = dim of the dilation space
    std::vector<ComplexMatrix> factors;  // per point, r x d (V_s : H -> H')
    double rank_tol = kDefaultTol;

    const ComplexMatrix& factor(std::size_t i) const {
        if (i >= factors.size()) throw IndexOutOfRange("factor index out of range");
        return factors[i];
    }

    const ComplexMatrix& factor_of(const std::string& name) const {
        for (std::size_t i = 0; i < points.size(); ++i)
            if (points[i] == name) return factors[i];
        throw IndexOutOfRange("unknown point '" + name + "'");
    }

    /// All factors side by side: r x (N d), column block i is V_{s_i}.
    ComplexMatrix stacked() const {
        ComplexMatrix f(rank, points.size() * dim);
        for (std::size_t i = 0; i < points.size(); ++i)
            f.block(0, i * dim, rank, dim) = factors[i];
        return f;
    }
};

/// Eigendecompose the Gram matrix, keep eigenvalues above
/// rank_tol * lambda_max, and split F = Lambda_r^{1/2} Q_r* into per-point
/// column blocks. Eigenvalues below -rank_tol * max(1, lambda_max) mean the
/// kernel is genuinely indefinite and raise NotPositiveDefinite; anything
/// between is round-off and is clipped to zero.
inline KolmogorovFactor factorize(const OperatorKernel& kernel, double rank_tol = kDefaultTol) {
    if (rank_tol < 0.0) throw InvalidArgument("rank_tol must be nonnegative");
    const GramMatrix gram = assemble_gram(kernel);
    auto eig = hermitian_eig(gram.matrix);
    const Eigen::Index nd = eig.values.size();
    const double lambda_max = eig.values(nd - 1);
    const double lambda_min = eig.values(0);
    if (lambda_min < -rank_tol * std::max(1.0, lambda_max))
        throw NotPositiveDefinite("factorize: Gram matrix indefinite (min eigenvalue " +
                                  std::to_string(lambda_min) + ")");

    const double cutoff = rank_tol * std::max(lambda_max, 0.0);
    std::vector<Eigen::Index> kept;  // descending eigenvalue order
    for (Eigen::Index i = nd - 1; i >= 0; --i)
        if (eig.values(i) > cutoff && eig.values(i) > 0.0) kept.push_back(i);

    const std::size_t r = kept.size();
    const std::size_t d = kernel.dim();
    const std::size_t n = kernel.num_points();
    ComplexMatrix f(r, nd);
    for (std::size_t k = 0; k < r; ++k)
        f.row(k) = std::sqrt(eig.values(kept[k])) * eig.vectors.col(kept[k]).adjoint();

    KolmogorovFactor factor;
    factor.points = kernel.points();
    factor.dim = d;
    factor.rank = r;
    factor.rank_tol = rank_tol;
    factor.factors.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        factor.factors.push_back(f.block(0, i * d, r, d));
    return factor;
}

/// max over (s,t) of |V_s* V_t - K(s,t)|_max.
inline double reconstruction_error(const KolmogorovFactor& factor, const OperatorKernel& kernel) {
    if (factor.points != kernel.points() || factor.dim != kernel.dim())
        throw DimensionMismatch("factor and kernel have different layouts");
    double err = 0.0;
    const std::size_t n = factor.points.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            ComplexMatrix rec = factor.factors[i].adjoint() * factor.factors[j];
            err = std::max(err, max_abs(rec - kernel.block(i, j)));
        }
    return err;
}

/// tr K(s,s) per point, in point order. The diagonal blocks must be
/// Hermitian and their traces real to 1e-10.
inline std::vector<double> trace_diagonal(const OperatorKernel& kernel) {
    std::vector<double> traces;
    traces.reserve(kernel.num_points());
    for (std::size_t i = 0; i < kernel.num_points(); ++i) {
        const ComplexMatrix& block = kernel.block(i, i);
        const double scale = std::max(1.0, max_abs(block));
        if (hermitian_defect(block) > 1e-8 * scale)
            throw NonHermitianDiagonal("diagonal block at point '" + kernel.points()[i] +
                                       "' is not Hermitian");
        const Complex tr = block.trace();
        if (std::abs(tr.imag()) > 1e-10 * scale)
            throw NonHermitianDiagonal("diagonal trace at point '" + kernel.points()[i] +
                                       "' has imaginary part " + std::to_string(tr.imag()));
        traces.push_back(tr.real());
    }
    return traces;
}

}  // namespace rok
