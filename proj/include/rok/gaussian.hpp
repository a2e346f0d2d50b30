// Gaussian realization of a factorized p.d. kernel and empirical
// kernel averaging.
//
// A draw takes one real standard Gaussian vector z of length r (real even
// when H is complex; the covariance computation needs E[Z_i Z_j] = delta
// with no conjugation) and sets W_s = V_s* z for every point, so the
// process is jointly Gaussian across the point set. Per-draw substreams
// make draws order-independent; averages are accumulated with compensated
// summation in draw-index order so results do not depend on scheduling.

#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rok/errors.hpp"
#include "rok/kernel.hpp"
#include "rok/kolmogorov.hpp"
#include "rok/matrix.hpp"
#include "rok/rng.hpp"

namespace rok {

struct ConvergencePoint {
    std::size_t m = 0;
    double max_abs_error = 0.0;
    double stderr_estimate = 0.0;
};

namespace detail {

inline void validate_coordinate_subset(const std::vector<std::size_t>& subset, std::size_t rank) {
    for (std::size_t i : subset)
        if (i >= rank) throw IndexOutOfRange("coordinate index " + std::to_string(i) +
                                             " outside rank " + std::to_string(rank));
}

/// Kahan-compensated running mean with an error/stderr trace at
/// checkpoints 1, 2, 4, ..., total.
class ConvergenceAccumulator {
public:
    ConvergenceAccumulator(std::size_t rows, std::size_t cols, std::size_t total,
                           const ComplexMatrix* reference)
        : sum_(ComplexMatrix::Zero(rows, cols)),
          comp_(ComplexMatrix::Zero(rows, cols)),
          sumsq_re_(RealMatrix::Zero(rows, cols)),
          sumsq_im_(RealMatrix::Zero(rows, cols)),
          reference_(reference) {
        for (std::size_t c = 1; c < total; c *= 2) checkpoints_.push_back(c);
        checkpoints_.push_back(total);
    }

    void add(const ComplexMatrix& x) {
        ComplexMatrix y = x - comp_;
        ComplexMatrix t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
        sumsq_re_ += x.real().cwiseAbs2();
        sumsq_im_ += x.imag().cwiseAbs2();
        ++count_;
        if (next_ < checkpoints_.size() && count_ == checkpoints_[next_]) {
            ++next_;
            mean_ = sum_ / static_cast<double>(count_);
            if (reference_) {
                ConvergencePoint cp;
                cp.m = count_;
                cp.max_abs_error = max_abs(mean_ - *reference_);
                if (count_ >= 2) {
                    const double c = static_cast<double>(count_);
                    RealMatrix var_re =
                        (sumsq_re_ - c * mean_.real().cwiseAbs2()).cwiseMax(0.0) / (c - 1.0);
                    RealMatrix var_im =
                        (sumsq_im_ - c * mean_.imag().cwiseAbs2()).cwiseMax(0.0) / (c - 1.0);
                    cp.stderr_estimate = ((var_re + var_im) / c).cwiseSqrt().maxCoeff();
                }
                record.push_back(cp);
            }
        }
    }

    /// Mean at the last reached checkpoint (the final mean once all
    /// `total` terms were added).
    const ComplexMatrix& mean() const { return mean_; }

    std::vector<ConvergencePoint> record;

private:
    ComplexMatrix sum_, comp_, mean_;
    RealMatrix sumsq_re_, sumsq_im_;
    const ComplexMatrix* reference_;
    std::vector<std::size_t> checkpoints_;
    std::size_t count_ = 0;
    std::size_t next_ = 0;
};

}  // namespace detail

struct GaussianRealization {
    KolmogorovFactor factor;
    std::size_t sample_count = 0;
    // samples[draw][point] is W_s(draw), a length-d vector in H
    std::vector<std::vector<ComplexVector>> samples;
};

namespace detail {

inline GaussianRealization sample_impl(const KolmogorovFactor& factor, std::size_t count,
                                       const SeededRng& rng,
                                       const std::vector<std::size_t>* subset) {
    if (count < 1) throw InvalidArgument("sample count must be >= 1");
    GaussianRealization out;
    out.factor = factor;
    out.sample_count = count;
    out.samples.resize(count);
    const std::size_t n = factor.points.size();
    const std::size_t r = factor.rank;
    std::vector<char> keep;
    if (subset) {
        keep.assign(r, 0);
        for (std::size_t i : *subset) keep[i] = 1;
    }
    for (std::size_t draw = 0; draw < count; ++draw) {
        SeededRng sub = rng.split(draw);
        RealVector z(r);
        for (std::size_t i = 0; i < r; ++i) z(static_cast<Eigen::Index>(i)) = sub.normal();
        if (subset)
            for (std::size_t i = 0; i < r; ++i)
                if (!keep[i]) z(static_cast<Eigen::Index>(i)) = 0.0;
        out.samples[draw].reserve(n);
        for (std::size_t p = 0; p < n; ++p)
            out.samples[draw].push_back(factor.factors[p].adjoint() * z.cast<Complex>());
    }
    return out;
}

}  // namespace detail

/// M independent draws of {W_s = V_s* z}.
inline GaussianRealization sample_paths(const KolmogorovFactor& factor, std::size_t count,
                                        const SeededRng& rng) {
    return detail::sample_impl(factor, count, rng, nullptr);
}

/// Finite-rank truncation W_s^(F) = (P_F V_s)* z. The full z is drawn and
/// then projected, so the full coordinate set reproduces sample_paths
/// draw-for-draw under the same rng.
inline GaussianRealization truncated_realization(const KolmogorovFactor& factor,
                                                 const std::vector<std::size_t>& coords,
                                                 std::size_t count, const SeededRng& rng) {
    if (coords.empty())
        throw InvalidArgument("truncated_realization requires a nonempty coordinate set");
    detail::validate_coordinate_subset(coords, factor.rank);
    return detail::sample_impl(factor, count, rng, &coords);
}

/// E|W_s^(F)|^2 = tr(V_s* P_F V_s): the retained rows' squared norms.
/// Monotone in F and equal to tr K(s,s) at the full coordinate set.
inline double truncation_energy(const KolmogorovFactor& factor, std::size_t point_index,
                                const std::vector<std::size_t>& coords) {
    if (point_index >= factor.points.size())
        throw IndexOutOfRange("point index out of range");
    detail::validate_coordinate_subset(coords, factor.rank);
    const ComplexMatrix& v = factor.factors[point_index];
    double energy = 0.0;
    for (std::size_t i : coords) energy += v.row(static_cast<Eigen::Index>(i)).squaredNorm();
    return energy;
}

inline double truncation_energy(const KolmogorovFactor& factor, const std::string& point,
                                const std::vector<std::size_t>& coords) {
    for (std::size_t i = 0; i < factor.points.size(); ++i)
        if (factor.points[i] == point) return truncation_energy(factor, i, coords);
    throw IndexOutOfRange("unknown point '" + point + "'");
}

/// The mean kernel of the truncated realization: V_s* P_F V_t (the full
/// reconstruction when `coords` is the whole coordinate set).
inline OperatorKernel expected_truncated_kernel(const KolmogorovFactor& factor,
                                                const std::vector<std::size_t>& coords) {
    detail::validate_coordinate_subset(coords, factor.rank);
    const std::size_t n = factor.points.size();
    ComplexMatrix pf = ComplexMatrix::Zero(factor.rank, factor.rank);
    for (std::size_t i : coords) pf(i, i) = 1.0;
    std::vector<ComplexMatrix> blocks;
    blocks.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            blocks.push_back(factor.factors[i].adjoint() * pf * factor.factors[j]);
    return OperatorKernel(factor.points, factor.dim, std::move(blocks));
}

/// The rank-one random kernel k(w,s,t) = |W_s(w)><W_t(w)| with uniform
/// weights 1/M. Every atom is pathwise p.d. (its Gram is an outer product).
inline RandomKernel rank_one_random_kernel(const GaussianRealization& realization) {
    if (realization.sample_count == 0)
        throw InvalidArgument("realization has no samples");
    const std::size_t n = realization.factor.points.size();
    const std::size_t d = realization.factor.dim;
    std::vector<RandomKernel::Atom> atoms;
    atoms.reserve(realization.sample_count);
    const double w = 1.0 / static_cast<double>(realization.sample_count);
    for (const auto& draw : realization.samples) {
        std::vector<ComplexMatrix> blocks;
        blocks.reserve(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                blocks.push_back(draw[i] * draw[j].adjoint());
        atoms.push_back({w, OperatorKernel(realization.factor.points, d, std::move(blocks))});
    }
    return RandomKernel::discrete(std::move(atoms));
}

/// Convergence of the running mean of |W_s><W_t| over the realization's
/// draws (in draw order) against a reference kernel.
inline std::vector<ConvergencePoint> realization_convergence(const GaussianRealization& r,
                                                             const OperatorKernel& reference) {
    if (reference.points() != r.factor.points || reference.dim() != r.factor.dim)
        throw DimensionMismatch("reference kernel layout does not match the realization");
    const std::size_t n = r.factor.points.size();
    const std::size_t d = r.factor.dim;
    const ComplexMatrix ref = stacked_blocks(reference);
    detail::ConvergenceAccumulator acc(n * d, n * d, r.sample_count, &ref);
    ComplexMatrix outer(n * d, n * d);
    for (const auto& draw : r.samples) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                outer.block(i * d, j * d, d, d) = draw[i] * draw[j].adjoint();
        acc.add(outer);
    }
    return acc.record;
}

struct EmpiricalResult {
    OperatorKernel average;
    std::size_t sample_count = 0;
    std::vector<ConvergencePoint> record;

    /// The average wrapped as a one-atom random kernel, for check_rpd.
    RandomKernel as_random_kernel() const {
        return RandomKernel::discrete({{1.0, average}});
    }
};

/// Empirical kernel: the unweighted average of m i.i.d. draws, with an
/// error trace against the mean kernel at checkpoints 1, 2, 4, ..., m.
/// For discrete laws the reference mean is exact; generative laws need an
/// explicit `reference` or the record is omitted.
inline EmpiricalResult empirical_kernel(const RandomKernel& rk, std::size_t m,
                                        const SeededRng& rng,
                                        std::optional<OperatorKernel> reference = std::nullopt) {
    if (m < 1) throw InvalidArgument("sample count must be >= 1");
    if (!reference && rk.is_discrete()) reference = mean_kernel(rk);

    const std::size_t n = rk.points().size();
    const std::size_t d = rk.dim();
    std::optional<ComplexMatrix> ref_stacked;
    if (reference) {
        if (reference->points() != rk.points() || reference->dim() != d)
            throw DimensionMismatch("reference kernel layout does not match");
        ref_stacked = stacked_blocks(*reference);
    }

    detail::ConvergenceAccumulator acc(n * d, n * d, m,
                                       ref_stacked ? &*ref_stacked : nullptr);
    for (std::size_t draw = 0; draw < m; ++draw) {
        SeededRng sub = rng.split(draw);
        OperatorKernel drawn = rk.sample(sub);
        if (drawn.points() != rk.points() || drawn.dim() != d)
            throw DimensionMismatch("sampled kernel layout does not match the law");
        acc.add(stacked_blocks(drawn));
    }

    const ComplexMatrix& mean = acc.mean();
    std::vector<ComplexMatrix> blocks;
    blocks.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            blocks.push_back(mean.block(i * d, j * d, d, d));
    return EmpiricalResult{OperatorKernel(rk.points(), d, std::move(blocks)), m,
                           std::move(acc.record)};
}

}  // namespace rok
