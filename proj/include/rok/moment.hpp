// Moment kernels of random operators and their unitary dilations.
//
// For a finitely supported random operator A the mixed second moments
// K(m,n) = E[A*^m A^n] form a p.d. kernel on {0..M}. When the shifted
// kernel K(m+1,n+1) is dominated by K, the shift B V_n = V_{n+1} on the
// Kolmogorov factor is a contraction, and a truncated Egervary/Schaffer
// unitary dilates its powers up to the chain length. That yields the
// triple (U, P, W) with E[A*^m A^n] = W* U*^m P U^n W for m,n <= N, and
// the mean-square von Neumann bound E[f(A)*f(A)] <= (sup_{|z|=1}|f|)^2 I.
//
// Mixed moments are computed exactly from the discrete law, so dilation
// residuals are limited only by linear-algebra round-off.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rok/errors.hpp"
#include "rok/kernel.hpp"
#include "rok/kolmogorov.hpp"
#include "rok/matrix.hpp"

namespace rok {

class RandomOperator {
public:
    struct Atom {
        double weight;
        ComplexMatrix matrix;  // d x d
    };

    RandomOperator(std::size_t dim, std::vector<Atom> atoms) : dim_(dim), atoms_(std::move(atoms)) {
        if (dim_ == 0) throw DimensionMismatch("operator dimension must be positive");
        if (atoms_.empty()) throw InvalidArgument("random operator needs atoms");
        double total = 0.0;
        for (const auto& a : atoms_) {
            if (!(a.weight > 0.0)) throw InvalidArgument("atom weights must be positive");
            if (a.matrix.rows() != static_cast<Eigen::Index>(dim_) ||
                a.matrix.cols() != static_cast<Eigen::Index>(dim_))
                throw DimensionMismatch("operator atom is not dim x dim");
            if (!is_finite(a.matrix)) throw InvalidArgument("operator atom has non-finite entries");
            total += a.weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw InvalidArgument("atom weights must sum to 1 within 1e-12");
    }

    /// Deterministic operator (a point mass).
    static RandomOperator deterministic(const ComplexMatrix& a) {
        return RandomOperator(static_cast<std::size_t>(a.rows()), {{1.0, a}});
    }

    /// Scalar operator taking value v_i with probability w_i.
    static RandomOperator scalar(const std::vector<std::pair<double, Complex>>& law) {
        std::vector<Atom> atoms;
        atoms.reserve(law.size());
        for (const auto& [w, v] : law) {
            ComplexMatrix m(1, 1);
            m(0, 0) = v;
            atoms.push_back({w, m});
        }
        return RandomOperator(1, std::move(atoms));
    }

    std::size_t dim() const { return dim_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

private:
    std::size_t dim_;
    std::vector<Atom> atoms_;
};

class MomentKernel {
public:
    MomentKernel(std::size_t max_power, OperatorKernel kernel)
        : max_power_(max_power), kernel_(std::move(kernel)) {
        if (kernel_.num_points() != max_power_ + 1)
            throw DimensionMismatch("moment kernel needs points 0..max_power");
        if (max_abs(kernel_.block(0, 0) -
                    ComplexMatrix::Identity(kernel_.dim(), kernel_.dim())) > 1e-10)
            throw InvalidArgument("moment kernel block (0,0) must be the identity");
    }

    std::size_t max_power() const { return max_power_; }
    std::size_t dim() const { return kernel_.dim(); }
    const ComplexMatrix& block(std::size_t m, std::size_t n) const { return kernel_.block(m, n); }
    const OperatorKernel& as_kernel() const { return kernel_; }

private:
    std::size_t max_power_;
    OperatorKernel kernel_;
};

/// K(m,n) = E[A*^m A^n] for m,n in 0..max_power, as exact weighted sums
/// over the discrete law.
inline MomentKernel moment_kernel(const RandomOperator& a, std::size_t max_power) {
    if (max_power < 1) throw InvalidArgument("max_power must be >= 1");
    const std::size_t d = a.dim();
    const std::size_t n = max_power + 1;
    std::vector<ComplexMatrix> blocks(n * n, ComplexMatrix::Zero(d, d));
    for (const auto& atom : a.atoms()) {
        std::vector<ComplexMatrix> powers(n);
        powers[0] = ComplexMatrix::Identity(d, d);
        for (std::size_t p = 1; p < n; ++p) powers[p] = powers[p - 1] * atom.matrix;
        for (std::size_t m = 0; m < n; ++m)
            for (std::size_t k = 0; k < n; ++k)
                blocks[m * n + k] += atom.weight * (powers[m].adjoint() * powers[k]);
    }
    std::vector<std::string> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = std::to_string(i);
    return MomentKernel(max_power, OperatorKernel(std::move(pts), d, std::move(blocks)));
}

struct DominationReport {
    bool holds = false;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double tol = 0.0;
};

/// K restricted to the initial segment {0..M-1}.
inline OperatorKernel initial_restriction(const OperatorKernel& k) {
    const std::size_t n = k.num_points();
    if (n < 2) throw TooFewPoints("restriction requires at least points {0,1}");
    std::vector<std::string> pts(n - 1);
    std::vector<ComplexMatrix> blocks((n - 1) * (n - 1));
    for (std::size_t i = 0; i + 1 < n; ++i) pts[i] = std::to_string(i);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = 0; j + 1 < n; ++j) blocks[i * (n - 1) + j] = k.block(i, j);
    return OperatorKernel(std::move(pts), k.dim(), std::move(blocks));
}

/// Shift domination K_shift <= K: the difference kernel
/// D(m,n) = K(m,n) - K(m+1,n+1) on {0..M-1} must be p.d.
inline DominationReport shift_domination(const OperatorKernel& k, double tol = kDefaultTol) {
    PdReport pd = check_pd(initial_restriction(k) - shift_kernel(k), tol);
    return DominationReport{pd.is_pd, pd.min_eigenvalue, pd.max_eigenvalue, tol};
}

inline DominationReport shift_domination(const MomentKernel& k, double tol = kDefaultTol) {
    return shift_domination(k.as_kernel(), tol);
}

struct ShiftResult {
    KolmogorovFactor factor;  // of K on {0..M}
    ComplexMatrix shift;      // B, r x r, with B V_n = V_{n+1}
    double op_norm = 0.0;
    double consistency_residual = 0.0;  // max_n |B V_n - V_{n+1}|_max
    ComplexMatrix domain_basis;         // orthonormal basis of range(X)
    double isometry_defect = 0.0;       // max |eig(Q*(B*B - I)Q)| on range(X)
};

/// Build the shift B with B V_n = V_{n+1} as Y X^+ where X stacks
/// V_0..V_{M-1} and Y stacks V_1..V_M. The pseudoinverse cutoff equals the
/// factorization rank_tol so null-space handling matches the factor; B is
/// zero on the orthogonal complement of range(X). Requires shift
/// domination, which is exactly what makes B well defined and contractive.
inline ShiftResult build_shift(const OperatorKernel& k, double rank_tol = kDefaultTol) {
    DominationReport domination = shift_domination(k, rank_tol);
    if (!domination.holds)
        throw ShiftDominationViolated("K_shift <= K fails (min eigenvalue " +
                                      std::to_string(domination.min_eigenvalue) + ")");

    ShiftResult result{factorize(k, rank_tol), ComplexMatrix(), 0.0, 0.0, ComplexMatrix(), 0.0};
    const KolmogorovFactor& factor = result.factor;
    const std::size_t m = factor.points.size() - 1;  // number of shifted pairs
    const std::size_t d = factor.dim;
    const std::size_t r = factor.rank;

    ComplexMatrix x(r, m * d), y(r, m * d);
    for (std::size_t i = 0; i < m; ++i) {
        x.block(0, i * d, r, d) = factor.factors[i];
        y.block(0, i * d, r, d) = factor.factors[i + 1];
    }

    if (r == 0) {
        result.shift = ComplexMatrix::Zero(0, 0);
        result.domain_basis = ComplexMatrix::Zero(0, 0);
        return result;
    }

    Eigen::JacobiSVD<ComplexMatrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalFailure("SVD of factor stack failed");
    const auto& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    const double cutoff = rank_tol * std::max(sigma_max, 1.0);
    Eigen::Index kept = 0;
    while (kept < sigma.size() && sigma(kept) > cutoff) ++kept;

    ComplexMatrix u_kept = svd.matrixU().leftCols(kept);
    ComplexMatrix v_kept = svd.matrixV().leftCols(kept);
    RealVector inv_sigma(kept);
    for (Eigen::Index i = 0; i < kept; ++i) inv_sigma(i) = 1.0 / sigma(i);

    // B = Y X^+; the pseudoinverse annihilates the complement of range(X).
    ComplexMatrix b = y * v_kept * inv_sigma.asDiagonal() * u_kept.adjoint();

    double scale = std::max(1.0, max_abs(factor.stacked()));
    double residual = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        residual = std::max(residual,
                            max_abs(b * factor.factors[i] - factor.factors[i + 1]));
    if (residual > 1e-8 * scale)
        throw IllConditioned("shift consistency residual " + std::to_string(residual) +
                             " exceeds tolerance");

    double norm = operator_norm(b);
    if (norm > 1.0 + 1e-8)
        throw IllConditioned("shift operator norm " + std::to_string(norm) +
                             " exceeds 1 beyond tolerance");
    if (norm > 1.0) {
        // Round-off at the stationary boundary; renormalize so the defect
        // operators stay psd.
        b /= norm;
        norm = 1.0;
    }

    result.shift = std::move(b);
    result.op_norm = norm;
    result.consistency_residual = residual;
    result.domain_basis = u_kept;
    if (kept > 0) {
        ComplexMatrix gram_defect =
            u_kept.adjoint() * (result.shift.adjoint() * result.shift -
                                ComplexMatrix::Identity(r, r)) * u_kept;
        auto eig = hermitian_eig(gram_defect);
        result.isometry_defect =
            std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
    }
    return result;
}

inline ShiftResult build_shift(const MomentKernel& k, double rank_tol = kDefaultTol) {
    return build_shift(k.as_kernel(), rank_tol);
}

struct DilationTriple {
    std::size_t space_dim = 0;    // r * (N + 1)
    std::size_t rank = 0;         // r; J embeds onto the first r coordinates
    std::size_t trunc_depth = 0;  // N
    std::size_t dim = 0;          // d
    ComplexMatrix unitary;        // U on the dilation space
    ComplexMatrix projection;     // P = J J*
    ComplexMatrix isometry;       // W = J V_0, space_dim x d
    ComplexMatrix shift;          // B, r x r
};

/// Truncated Egervary/Schaffer dilation of the shift: on (C^r)^(N+1) the
/// unitary has first block row [B, 0, ..., 0, D_{B*}], second
/// [D_B, 0, ..., 0, -B*], and an identity chain below; compressions to the
/// first block reproduce B^n exactly for n <= N. With J the first-block
/// embedding, W = J V_0 and P = J J* give K(m,n) = W* U*^m P U^n W for
/// m,n <= N.
inline DilationTriple build_dilation(const OperatorKernel& k, double rank_tol = kDefaultTol) {
    ShiftResult shift = build_shift(k, rank_tol);
    const std::size_t r = shift.factor.rank;
    const std::size_t n_depth = shift.factor.points.size() - 1;  // N = M
    const std::size_t blocks = n_depth + 1;
    const std::size_t dim_k = r * blocks;
    const std::size_t d = shift.factor.dim;

    // Both defect operators D_B = (I - B*B)^(1/2) and D_{B*} = (I - BB*)^(1/2)
    // come from one SVD of B, so the intertwining B* D_{B*} = D_B B* and the
    // column identities B*B + D_B^2 = I hold to the SVD's backward error even
    // when singular values sit on 1. Negative 1 - sigma^2 is clipped to zero.
    const ComplexMatrix& b = shift.shift;
    ComplexMatrix eye = ComplexMatrix::Identity(r, r);
    ComplexMatrix defect = eye, defect_adj = eye;  // B = 0 case
    if (r > 0) {
        Eigen::JacobiSVD<ComplexMatrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
        if (svd.info() != Eigen::Success)
            throw NumericalFailure("SVD of the shift operator failed");
        RealVector defect_sigma(r);
        for (std::size_t i = 0; i < r; ++i) {
            const double s = svd.singularValues()(static_cast<Eigen::Index>(i));
            defect_sigma(static_cast<Eigen::Index>(i)) = std::sqrt(std::max(0.0, 1.0 - s * s));
        }
        defect = svd.matrixV() * defect_sigma.asDiagonal() * svd.matrixV().adjoint();
        defect_adj = svd.matrixU() * defect_sigma.asDiagonal() * svd.matrixU().adjoint();
    }

    ComplexMatrix u = ComplexMatrix::Zero(dim_k, dim_k);
    u.block(0, 0, r, r) = b;
    u.block(0, (blocks - 1) * r, r, r) = defect_adj;
    if (blocks >= 2) {
        u.block(r, 0, r, r) = defect;
        u.block(r, (blocks - 1) * r, r, r) = -b.adjoint();
        for (std::size_t i = 2; i < blocks; ++i)
            u.block(i * r, (i - 1) * r, r, r) = eye;
    }

    DilationTriple triple;
    triple.space_dim = dim_k;
    triple.rank = r;
    triple.trunc_depth = n_depth;
    triple.dim = d;
    triple.unitary = std::move(u);
    triple.projection = ComplexMatrix::Zero(dim_k, dim_k);
    triple.projection.block(0, 0, r, r) = eye;
    triple.isometry = ComplexMatrix::Zero(dim_k, d);
    if (!shift.factor.factors.empty())
        triple.isometry.block(0, 0, r, d) = shift.factor.factors[0];
    triple.shift = b;
    return triple;
}

inline DilationTriple build_dilation(const MomentKernel& k, double rank_tol = kDefaultTol) {
    return build_dilation(k.as_kernel(), rank_tol);
}

struct VerificationReport {
    double max_residual = 0.0;  // max_{m,n<=N} |K(m,n) - W* U*^m P U^n W|
    double unitarity = 0.0;     // |U*U - I|
    double projection = 0.0;    // max(|P^2 - P|, |P - P*|)
    double isometry = 0.0;      // |W*W - I_d|
    double compression = 0.0;   // max_{n<=N} |J* U^n J - B^n|
    bool c3_holds = false;
    double c3_min_eigenvalue = 0.0;
};

/// Check the moment identity, the structural invariants, and the
/// compressed positivity P - U*PU >= 0 on span{U^k W H}. The span stops at
/// k = N-1: the quadratic form at power k compares against the shifted
/// power k+1, and the truncated chain represents shifted powers exactly
/// only up to N.
inline VerificationReport verify_dilation(const OperatorKernel& k, const DilationTriple& t) {
    const std::size_t n_points = k.num_points();
    const std::size_t d = k.dim();
    if (t.dim != d) throw DimensionMismatch("dilation triple dim does not match kernel");
    if (t.trunc_depth + 1 > n_points)
        throw DimensionMismatch("kernel has fewer powers than the dilation depth");
    const std::size_t depth = t.trunc_depth;
    const std::size_t r = t.rank;

    VerificationReport report;
    const ComplexMatrix& u = t.unitary;
    const ComplexMatrix& p = t.projection;
    const ComplexMatrix& w = t.isometry;
    report.unitarity = max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
    report.projection = std::max(max_abs(p * p - p), hermitian_defect(p));
    report.isometry = max_abs(w.adjoint() * w - ComplexMatrix::Identity(d, d));

    // Powers U^n W and U^n J for n = 0..N.
    std::vector<ComplexMatrix> uw(depth + 1);
    uw[0] = w;
    ComplexMatrix uj = ComplexMatrix::Zero(t.space_dim, r);
    uj.block(0, 0, r, r) = ComplexMatrix::Identity(r, r);
    ComplexMatrix b_power = ComplexMatrix::Identity(r, r);
    for (std::size_t n = 0; n <= depth; ++n) {
        if (n > 0) {
            uw[n] = u * uw[n - 1];
            uj = u * uj;
            b_power = t.shift * b_power;
        }
        report.compression = std::max(report.compression, max_abs(uj.topRows(r) - b_power));
    }

    for (std::size_t m = 0; m <= depth; ++m)
        for (std::size_t n = 0; n <= depth; ++n) {
            ComplexMatrix reproduced = uw[m].adjoint() * p * uw[n];
            report.max_residual = std::max(report.max_residual,
                                           max_abs(reproduced - k.block(m, n)));
        }

    // Orthonormal basis of span{U^k W H : k <= N-1} via SVD with a
    // relative rank cutoff.
    const std::size_t span_powers = depth;  // k = 0..N-1
    ComplexMatrix stack(t.space_dim, span_powers * d);
    for (std::size_t kk = 0; kk < span_powers; ++kk)
        stack.block(0, kk * d, t.space_dim, d) = uw[kk];
    Eigen::JacobiSVD<ComplexMatrix> svd(stack, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success) throw NumericalFailure("SVD of reachable span failed");
    const auto& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    Eigen::Index kept = 0;
    while (kept < sigma.size() && sigma(kept) > 1e-10 * std::max(sigma_max, 1.0)) ++kept;
    if (kept == 0) {
        report.c3_holds = true;
        report.c3_min_eigenvalue = 0.0;
        return report;
    }
    ComplexMatrix q = svd.matrixU().leftCols(kept);
    ComplexMatrix compressed = q.adjoint() * (p - u.adjoint() * p * u) * q;
    auto eig = hermitian_eig(compressed);
    report.c3_min_eigenvalue = eig.values(0);
    report.c3_holds = report.c3_min_eigenvalue >= -1e-8;
    return report;
}

inline VerificationReport verify_dilation(const MomentKernel& k, const DilationTriple& t) {
    return verify_dilation(k.as_kernel(), t);
}

struct VnReport {
    ComplexMatrix lhs;              // E[f(A)* f(A)]
    double lhs_max_eigenvalue = 0.0;
    double sup_f = 0.0;             // grid maximum of |f| on the circle
    double sup_f_margin = 0.0;      // certified upper-bound proxy
    double slack = 0.0;             // sup_f_margin^2 - lhs_max_eigenvalue
    bool holds = false;
};

/// Evaluate f(A) = sum c_n A^n by Horner's rule.
inline ComplexMatrix polynomial_at(const std::vector<Complex>& coeffs, const ComplexMatrix& a) {
    const Eigen::Index d = a.rows();
    ComplexMatrix acc = ComplexMatrix::Zero(d, d);
    for (std::size_t i = coeffs.size(); i-- > 0;)
        acc = acc * a + coeffs[i] * ComplexMatrix::Identity(d, d);
    return acc;
}

/// Mean-square von Neumann inequality check:
/// E[f(A)* f(A)] <= (sup_{|z|=1} |f|)^2 I for operators admitting a moment
/// dilation. The sup is taken over an equispaced grid and inflated by
/// (1 + pi * deg / grid_size), a one-sided bound that avoids root-finding.
inline VnReport von_neumann_check(const RandomOperator& a, const std::vector<Complex>& coeffs,
                                  std::size_t grid_size = 4096) {
    if (coeffs.empty()) throw EmptyPolynomial("polynomial has no coefficients");
    if (grid_size < 64) throw InvalidArgument("grid_size must be >= 64");

    std::size_t degree = coeffs.size() - 1;
    while (degree > 0 && std::abs(coeffs[degree]) == 0.0) --degree;

    // Dilation precondition at the polynomial's depth.
    MomentKernel moments = moment_kernel(a, std::max<std::size_t>(degree, 1));
    DominationReport domination = shift_domination(moments);
    if (!domination.holds)
        throw ShiftDominationViolated("operator admits no moment dilation (min eigenvalue " +
                                      std::to_string(domination.min_eigenvalue) + ")");

    VnReport report;
    report.lhs = ComplexMatrix::Zero(a.dim(), a.dim());
    for (const auto& atom : a.atoms()) {
        ComplexMatrix fa = polynomial_at(coeffs, atom.matrix);
        report.lhs += atom.weight * (fa.adjoint() * fa);
    }
    auto eig = hermitian_eig(report.lhs);
    report.lhs_max_eigenvalue = eig.values(eig.values.size() - 1);

    constexpr double kPi = 3.14159265358979323846;
    for (std::size_t j = 0; j < grid_size; ++j) {
        const double angle = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(grid_size);
        const Complex z(std::cos(angle), std::sin(angle));
        Complex value = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) value = value * z + coeffs[i];
        report.sup_f = std::max(report.sup_f, std::abs(value));
    }
    report.sup_f_margin =
        report.sup_f * (1.0 + kPi * static_cast<double>(degree) / static_cast<double>(grid_size));
    report.slack = report.sup_f_margin * report.sup_f_margin - report.lhs_max_eigenvalue;
    report.holds = report.lhs_max_eigenvalue <= report.sup_f_margin * report.sup_f_margin + 1e-8;
    return report;
}

}  // namespace rok
