// Operator-valued positive definite kernels at finite scale.
//
// An OperatorKernel stores K(s,t) as d x d blocks over a finite ordered
// point set; a RandomKernel is either a finitely supported distribution
// over such kernels or a seeded sampler. Positivity means the block Gram
// matrix is positive semidefinite, and the random variant asks for that
// only in expectation.

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rok/errors.hpp"
#include "rok/matrix.hpp"
#include "rok/rng.hpp"

namespace rok {

inline constexpr double kDefaultTol = 1e-10;

class OperatorKernel {
public:
    /// Takes N*N blocks in row-major (i,j) order, each dim x dim.
    /// Validates finiteness and Hermitian pairing block(j,i) = block(i,j)*
    /// within `hermitian_tol` relative to the largest block entry.
    OperatorKernel(std::vector<std::string> points, std::size_t dim,
                   std::vector<ComplexMatrix> blocks,
                   double hermitian_tol = 1e-8)
        : points_(std::move(points)), dim_(dim), blocks_(std::move(blocks)) {
        const std::size_t n = points_.size();
        if (n == 0) throw TooFewPoints("kernel needs at least one point");
        if (dim_ == 0) throw DimensionMismatch("kernel dimension must be positive");
        if (blocks_.size() != n * n)
            throw DimensionMismatch("expected " + std::to_string(n * n) + " blocks, got " +
                                    std::to_string(blocks_.size()));
        double scale = 1.0;
        for (const auto& b : blocks_) {
            if (b.rows() != static_cast<Eigen::Index>(dim_) ||
                b.cols() != static_cast<Eigen::Index>(dim_))
                throw DimensionMismatch("kernel block is not dim x dim");
            if (!is_finite(b)) throw InvalidArgument("kernel block has non-finite entries");
            scale = std::max(scale, max_abs(b));
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double defect = max_abs(block(i, j) - ComplexMatrix(block(j, i).adjoint()));
                if (defect > hermitian_tol * scale)
                    throw InvalidArgument("kernel violates Hermitian symmetry at (" +
                                          points_[i] + "," + points_[j] + ")");
            }
    }

    /// Scalar kernel (d = 1) from an N x N matrix; points named "0".."N-1".
    static OperatorKernel scalar(const ComplexMatrix& k) {
        if (k.rows() != k.cols()) throw DimensionMismatch("scalar kernel matrix must be square");
        const std::size_t n = static_cast<std::size_t>(k.rows());
        std::vector<std::string> pts(n);
        std::vector<ComplexMatrix> blocks(n * n);
        for (std::size_t i = 0; i < n; ++i) pts[i] = std::to_string(i);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                ComplexMatrix b(1, 1);
                b(0, 0) = k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                blocks[i * n + j] = b;
            }
        return OperatorKernel(std::move(pts), 1, std::move(blocks));
    }

    /// K(s,t) = delta_{st} I_d.
    static OperatorKernel identity(std::vector<std::string> points, std::size_t dim) {
        const std::size_t n = points.size();
        std::vector<ComplexMatrix> blocks(n * n, ComplexMatrix::Zero(dim, dim));
        for (std::size_t i = 0; i < n; ++i)
            blocks[i * n + i] = ComplexMatrix::Identity(dim, dim);
        return OperatorKernel(std::move(points), dim, std::move(blocks));
    }

    const std::vector<std::string>& points() const { return points_; }
    std::size_t num_points() const { return points_.size(); }
    std::size_t dim() const { return dim_; }

    const ComplexMatrix& block(std::size_t i, std::size_t j) const {
        if (i >= points_.size() || j >= points_.size())
            throw IndexOutOfRange("kernel block index out of range");
        return blocks_[i * points_.size() + j];
    }

    std::size_t point_index(const std::string& name) const {
        for (std::size_t i = 0; i < points_.size(); ++i)
            if (points_[i] == name) return i;
        throw IndexOutOfRange("unknown point '" + name + "'");
    }

    bool same_layout(const OperatorKernel& other) const {
        return dim_ == other.dim_ && points_ == other.points_;
    }

private:
    std::vector<std::string> points_;
    std::size_t dim_;
    std::vector<ComplexMatrix> blocks_;  // row-major N*N
};

/// Entrywise linear combination; layouts must match.
inline OperatorKernel linear_combination(double alpha, const OperatorKernel& a,
                                         double beta, const OperatorKernel& b) {
    if (!a.same_layout(b))
        throw DimensionMismatch("kernel arithmetic requires matching points and dim");
    const std::size_t n = a.num_points();
    std::vector<ComplexMatrix> blocks;
    blocks.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            blocks.push_back(alpha * a.block(i, j) + beta * b.block(i, j));
    return OperatorKernel(a.points(), a.dim(), std::move(blocks));
}

inline OperatorKernel operator+(const OperatorKernel& a, const OperatorKernel& b) {
    return linear_combination(1.0, a, 1.0, b);
}

inline OperatorKernel operator-(const OperatorKernel& a, const OperatorKernel& b) {
    return linear_combination(1.0, a, -1.0, b);
}

inline OperatorKernel operator*(double alpha, const OperatorKernel& k) {
    return linear_combination(alpha, k, 0.0, k);
}

/// Raw (N d) x (N d) block stacking without symmetrization.
inline ComplexMatrix stacked_blocks(const OperatorKernel& k) {
    const std::size_t n = k.num_points();
    const std::size_t d = k.dim();
    ComplexMatrix g = ComplexMatrix::Zero(n * d, n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            g.block(i * d, j * d, d, d) = k.block(i, j);
    return g;
}

struct GramMatrix {
    ComplexMatrix matrix;  // (N d) x (N d), Hermitian
    std::vector<std::string> points;
    std::size_t dim = 0;
};

/// Block Gram matrix of the kernel, symmetrized as (G + G*)/2 so the
/// quadratic-form semantics survive representation round-off.
inline GramMatrix assemble_gram(const OperatorKernel& k) {
    return GramMatrix{hermitized(stacked_blocks(k)), k.points(), k.dim()};
}

struct PdReport {
    bool is_pd = false;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double tol = 0.0;
};

/// Positivity of an already-assembled Gram matrix. Accepts
/// lambda_min >= -tol * max(1, lambda_max), a scale-free criterion.
inline PdReport check_pd(const GramMatrix& gram, double tol = kDefaultTol) {
    if (tol < 0.0) throw InvalidArgument("tolerance must be nonnegative");
    auto eig = hermitian_eig(gram.matrix);
    const Eigen::Index n = eig.values.size();
    PdReport report;
    report.min_eigenvalue = eig.values(0);
    report.max_eigenvalue = eig.values(n - 1);
    report.tol = tol;
    report.is_pd = report.min_eigenvalue >= -tol * std::max(1.0, report.max_eigenvalue);
    return report;
}

inline PdReport check_pd(const OperatorKernel& k, double tol = kDefaultTol) {
    return check_pd(assemble_gram(k), tol);
}

class RandomKernel {
public:
    struct Atom {
        double weight;
        OperatorKernel kernel;
    };

    using Sampler = std::function<OperatorKernel(SeededRng&)>;

    /// Finitely supported law. Weights must be positive and sum to one
    /// within 1e-12; atoms must share points and dim.
    static RandomKernel discrete(std::vector<Atom> atoms) {
        if (atoms.empty()) throw InvalidArgument("discrete random kernel needs atoms");
        double total = 0.0;
        for (const auto& a : atoms) {
            if (!(a.weight > 0.0)) throw InvalidArgument("atom weights must be positive");
            if (!a.kernel.same_layout(atoms.front().kernel))
                throw DimensionMismatch("atoms must share points and dim");
            total += a.weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw InvalidArgument("atom weights must sum to 1 within 1e-12");
        RandomKernel rk;
        rk.atoms_ = std::move(atoms);
        return rk;
    }

    /// Seeded generator with fixed points and dim.
    static RandomKernel generative(std::vector<std::string> points, std::size_t dim,
                                   Sampler sampler) {
        if (!sampler) throw InvalidArgument("generative random kernel needs a sampler");
        RandomKernel rk;
        rk.gen_points_ = std::move(points);
        rk.gen_dim_ = dim;
        rk.sampler_ = std::move(sampler);
        return rk;
    }

    bool is_discrete() const { return !atoms_.empty(); }

    const std::vector<Atom>& atoms() const {
        if (!is_discrete()) throw InvalidArgument("random kernel is not discrete");
        return atoms_;
    }

    const std::vector<std::string>& points() const {
        return is_discrete() ? atoms_.front().kernel.points() : gen_points_;
    }

    std::size_t dim() const { return is_discrete() ? atoms_.front().kernel.dim() : gen_dim_; }

    /// One i.i.d. draw: discrete laws sample atoms by weight (inverse CDF
    /// on one uniform), generative laws call the sampler.
    OperatorKernel sample(SeededRng& rng) const {
        if (is_discrete()) return atoms_[sample_atom_index(rng)].kernel;
        return sampler_(rng);
    }

    std::size_t sample_atom_index(SeededRng& rng) const {
        const auto& as = atoms();
        const double u = rng.uniform();
        double cumulative = 0.0;
        for (std::size_t i = 0; i < as.size(); ++i) {
            cumulative += as[i].weight;
            if (u < cumulative) return i;
        }
        return as.size() - 1;
    }

private:
    RandomKernel() = default;

    std::vector<Atom> atoms_;
    std::vector<std::string> gen_points_;
    std::size_t gen_dim_ = 0;
    Sampler sampler_;
};

/// Exact weighted average of a discrete law. The mean of a random p.d.
/// kernel is deterministically p.d.
inline OperatorKernel mean_kernel(const RandomKernel& rk) {
    const auto& atoms = rk.atoms();
    const std::size_t n = atoms.front().kernel.num_points();
    std::vector<ComplexMatrix> blocks(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            ComplexMatrix acc =
                ComplexMatrix::Zero(atoms.front().kernel.dim(), atoms.front().kernel.dim());
            for (const auto& a : atoms) acc += a.weight * a.kernel.block(i, j);
            blocks[i * n + j] = std::move(acc);
        }
    return OperatorKernel(atoms.front().kernel.points(), atoms.front().kernel.dim(),
                          std::move(blocks));
}

struct MeanEstimate {
    OperatorKernel kernel;
    std::size_t sample_count;
};

/// Monte Carlo mean for generative laws (also valid, if wasteful, for
/// discrete ones). Accumulation runs in draw-index order.
inline MeanEstimate mean_kernel(const RandomKernel& rk, std::size_t samples, SeededRng rng) {
    if (samples < 1) throw InvalidArgument("sample count must be >= 1");
    const std::size_t n = rk.points().size();
    const std::size_t d = rk.dim();
    std::vector<ComplexMatrix> sum(n * n, ComplexMatrix::Zero(d, d));
    for (std::size_t m = 0; m < samples; ++m) {
        SeededRng sub = rng.split(m);
        OperatorKernel draw = rk.sample(sub);
        if (draw.points() != rk.points() || draw.dim() != d)
            throw DimensionMismatch("sampled kernel layout does not match the law");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) sum[i * n + j] += draw.block(i, j);
    }
    for (auto& b : sum) b /= static_cast<double>(samples);
    return MeanEstimate{OperatorKernel(rk.points(), d, std::move(sum)), samples};
}

/// Random positivity: expectation and the Gram form commute by linearity,
/// so this is exactly check_pd of the mean kernel.
inline PdReport check_rpd(const RandomKernel& rk, double tol = kDefaultTol) {
    return check_pd(mean_kernel(rk), tol);
}

struct PathwiseReport {
    std::vector<PdReport> per_atom;
    bool all_pathwise_pd = true;
};

/// Per-atom positivity verdicts. A random kernel that passes check_rpd may
/// still be indefinite with positive probability.
inline PathwiseReport is_pathwise_pd(const RandomKernel& rk, double tol = kDefaultTol) {
    PathwiseReport report;
    for (const auto& a : rk.atoms()) {
        report.per_atom.push_back(check_pd(a.kernel, tol));
        report.all_pathwise_pd = report.all_pathwise_pd && report.per_atom.back().is_pd;
    }
    return report;
}

/// Scalarization K~((s,a),(t,b)) = <a, K(s,t) b>, inner product linear in
/// the second variable. The result is p.d. whenever K is.
inline ComplexMatrix scalarize(const OperatorKernel& k,
                               const std::vector<std::pair<std::string, ComplexVector>>& pairs) {
    const std::size_t n = pairs.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx[i] = k.point_index(pairs[i].first);
        if (pairs[i].second.size() != static_cast<Eigen::Index>(k.dim()))
            throw DimensionMismatch("scalarize vector length must equal kernel dim");
    }
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out(i, j) = pairs[i].second.dot(k.block(idx[i], idx[j]) * pairs[j].second);
    return out;
}

/// For kernels indexed by consecutive integers 0..M, the shifted kernel
/// K_shift(m,n) = K(m+1,n+1) on 0..M-1.
inline OperatorKernel shift_kernel(const OperatorKernel& k) {
    const std::size_t n = k.num_points();
    for (std::size_t i = 0; i < n; ++i)
        if (k.points()[i] != std::to_string(i))
            throw InvalidArgument("shift_kernel requires points named 0..M in order");
    if (n < 2) throw TooFewPoints("shift_kernel requires at least points {0,1}");
    std::vector<std::string> pts(n - 1);
    std::vector<ComplexMatrix> blocks((n - 1) * (n - 1));
    for (std::size_t i = 0; i + 1 < n; ++i) pts[i] = std::to_string(i);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = 0; j + 1 < n; ++j)
            blocks[i * (n - 1) + j] = k.block(i + 1, j + 1);
    return OperatorKernel(std::move(pts), k.dim(), std::move(blocks));
}

}  // namespace rok
